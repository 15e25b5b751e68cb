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

// Exercises the shared library through its C header only.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "qcoord/qcoord.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  qc_string_free(s);
  return out;
}

fs::path fresh(const std::string& name) {
  auto dir = fs::temp_directory_path() / "qcoord_test_capi" / name;
  fs::remove_all(dir);
  return dir;
}

void count_events(const char* event, void* user) {
  auto* events = static_cast<std::vector<json>*>(user);
  events->push_back(json::parse(event));
}

}  // namespace

TEST_CASE("status reporting") {
  CHECK(std::string(qc_version()).size() > 0);
  CHECK(std::string(qc_status_name(QC_IO)) == "I/O error");
  qc_game* g = nullptr;
  CHECK(qc_game_create("no-such-game", nullptr, &g) == QC_INVALID_ARGUMENT);
  CHECK(g == nullptr);
  CHECK(std::string(qc_last_error()).find("no-such-game") != std::string::npos);
  CHECK(qc_game_create(nullptr, nullptr, &g) == QC_INVALID_ARGUMENT);
  CHECK(qc_game_create("chsh", "sideways", &g) == QC_INVALID_ARGUMENT);
  CHECK(qc_game_create("chsh", nullptr, &g) == QC_OK);
  CHECK(std::string(qc_last_error()).empty());
  qc_game_free(g);
  qc_game_free(nullptr);
  qc_policy_free(nullptr);
  qc_string_free(nullptr);
}

TEST_CASE("games") {
  const std::pair<const char*, double> expected[] = {
      {"chsh", 0.75}, {"ghz", 0.75}, {"rendezvous-tetra", 0.625}, {"rendezvous-cube", 0.3125}};
  for (const auto& [name, value] : expected) {
    qc_game* g = nullptr;
    REQUIRE(qc_game_create(name, nullptr, &g) == QC_OK);
    double v = 0.0;
    CHECK(qc_game_classical_optimum(g, &v) == QC_OK);
    CHECK(v == value);
    CHECK(qc_game_quantum_reference(g, &v) == QC_OK);
    CHECK(v > value);
    qc_game_free(g);
  }
  char* names = nullptr;
  REQUIRE(qc_game_names(&names) == QC_OK);
  CHECK(json::parse(take(names)).size() == 4);
  CHECK(qc_game_classical_optimum(nullptr, nullptr) == QC_INVALID_ARGUMENT);
}

TEST_CASE("config schemas reject unknown keys and wrong types") {
  char* d = nullptr;
  REQUIRE(qc_config_defaults("train-game", &d) == QC_OK);
  const json defaults = json::parse(take(d));
  CHECK(defaults["batch"] == 512);
  CHECK(defaults["lr"] == 3e-2);
  CHECK(qc_config_defaults("nope", &d) == QC_INVALID_ARGUMENT);
  char* out = nullptr;
  CHECK(qc_train_game(R"({"stepz": 1})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(std::string(qc_last_error()).find("stepz") != std::string::npos);
  CHECK(qc_train_game(R"({"steps": "many"})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_game(R"({"steps": -3})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_game("[1, 2]", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_game("{not json", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_game(R"({"seeds": 0})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_queueing(R"({"clip_eps": 2.0})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(qc_train_queueing(R"({"sweep": "1:0:1"})", nullptr, nullptr, &out) == QC_INVALID_ARGUMENT);
  CHECK(out == nullptr);
}

TEST_CASE("train, load, evaluate and certify a game policy") {
  const fs::path dir = fresh("game");
  const json cfg{{"game", "chsh"}, {"seeds", 2}, {"steps", 150}, {"batch", 128}, {"out", dir.string()}};
  std::vector<json> events;
  char* out = nullptr;
  REQUIRE(qc_train_game(cfg.dump().c_str(), count_events, &events, &out) == QC_OK);
  const json result = json::parse(take(out));
  CHECK(events.size() == 2);
  CHECK(result["runs"].size() == 2);
  CHECK(result["classical_optimum"] == 0.75);

  qc_policy* p = nullptr;
  REQUIRE(qc_policy_load((dir / "seed_0" / "checkpoint.json").string().c_str(), &p) == QC_OK);
  const char* kind = nullptr;
  CHECK(qc_policy_kind(p, &kind) == QC_OK);
  CHECK(std::string(kind) == "entangled-game");
  double win = 0.0;
  CHECK(qc_policy_win_probability(p, nullptr, &win) == QC_OK);
  CHECK(win == result["runs"][0]["best_win"].get<double>());

  qc_game* ghz = nullptr;
  REQUIRE(qc_game_create("ghz", nullptr, &ghz) == QC_OK);
  CHECK(qc_policy_win_probability(p, ghz, &win) == QC_DIMENSION_MISMATCH);
  qc_game_free(ghz);

  char* cert = nullptr;
  REQUIRE(qc_policy_bell_check(p, nullptr, &cert) == QC_OK);
  const json c = json::parse(take(cert));
  CHECK(c["verified"] == true);
  CHECK(c["verdict"] == (win > 0.75 ? "outside" : "inside"));

  char* ev = nullptr;
  REQUIRE(qc_policy_evaluate(p, nullptr, nullptr, &ev) == QC_OK);
  const json e = json::parse(take(ev));
  CHECK(e["non_signaling"] == true);
  CHECK(e["win_probability"] == win);

  char* csv = nullptr;
  REQUIRE(qc_policy_table_csv(p, &csv) == QC_OK);
  CHECK(take(csv).rfind("h0,h1,a0,a1,probability\n", 0) == 0);

  const fs::path copy = dir / "copy.json";
  REQUIRE(qc_policy_save(p, copy.string().c_str()) == QC_OK);
  qc_policy* q = nullptr;
  REQUIRE(qc_policy_load(copy.string().c_str(), &q) == QC_OK);
  double win2 = 0.0;
  CHECK(qc_policy_win_probability(q, nullptr, &win2) == QC_OK);
  CHECK(std::memcmp(&win, &win2, sizeof win) == 0);
  qc_policy_free(q);
  qc_policy_free(p);

  CHECK(qc_policy_load((dir / "missing.json").string().c_str(), &p) == QC_IO);
}

TEST_CASE("queueing runs through the C API") {
  const fs::path dir = fresh("queue");
  const json cfg{{"coordinator", "quantum"}, {"updates", 2},        {"eval_interval", 1},      {"eval_episodes", 2},
                 {"eval_steps", 128},        {"rollout_length", 32}, {"envs", 2},               {"minibatch", 32},
                 {"final_eval_episodes", 2}, {"final_eval_steps", 256}, {"sweep", "5.5:6:0.5"}, {"out", dir.string()}};
  std::vector<json> events;
  char* out = nullptr;
  REQUIRE(qc_train_queueing(cfg.dump().c_str(), count_events, &events, &out) == QC_OK);
  const json r = json::parse(take(out));
  CHECK(r["points"].size() == 2);
  CHECK(events.size() == 2 * 2);  // evaluated after updates 1 and 2
  CHECK(fs::exists(dir / "sweep.csv"));

  qc_policy* p = nullptr;
  REQUIRE(qc_policy_load((dir / "point_1" / "checkpoint.json").string().c_str(), &p) == QC_OK);
  const char* kind = nullptr;
  CHECK(qc_policy_kind(p, &kind) == QC_OK);
  CHECK(std::string(kind) == "router-policy");
  char* ev = nullptr;
  REQUIRE(qc_policy_evaluate(p, nullptr, R"({"episodes": 2, "steps": 500})", &ev) == QC_OK);
  const json e = json::parse(take(ev));
  CHECK(e["wait_limit"] == 6.0);
  CHECK(e["coordinator"] == "quantum");
  CHECK(qc_policy_evaluate(p, nullptr, R"({"episodes": 0})", &ev) == QC_INVALID_ARGUMENT);
  double win = 0.0;
  CHECK(qc_policy_win_probability(p, nullptr, &win) == QC_INVALID_ARGUMENT);
  qc_policy_free(p);
}
