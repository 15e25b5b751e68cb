// Copyright 2026 The qcoord Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file Static SVG line charts for training curves.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qcoord {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotLabels {
  std::string title;
  std::string x;
  std::string y;
};

/// Non-finite points are skipped. Deterministic output for identical input.
void write_svg_line_chart(std::span<const PlotSeries> series, const PlotLabels& labels, std::ostream& out);

}  // namespace qcoord
