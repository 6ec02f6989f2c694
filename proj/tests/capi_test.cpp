// Copyright 2026 The lutcomp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exercises the shared library through its C header only.

#include "lutcomp/lutcomp.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "json.hpp"

namespace {

using nlohmann::json;

std::string take(char* s) {
  std::string out = s ? s : "";
  lutcomp_free_string(s);
  return out;
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("lutcomp_capi_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
    ASSERT_EQ(lutcomp_taskset_generate(5, &set_), LUTCOMP_OK);
  }
  void TearDown() override {
    lutcomp_taskset_free(set_);
    std::filesystem::remove_all(dir_);
  }
  std::string file(const char* name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
  lutcomp_taskset* set_ = nullptr;
};

TEST_F(CApiTest, Versions) {
  EXPECT_STREQ(lutcomp_version(), "1.0.0");
  EXPECT_STREQ(lutcomp_rng_version(), "mt19937_64+splitmix64/v1");
  EXPECT_EQ(lutcomp_derive_seed(1, "init", 0), lutcomp_derive_seed(1, "init", 0));
  EXPECT_NE(lutcomp_derive_seed(1, "init", 0), lutcomp_derive_seed(1, "train", 0));
}

TEST_F(CApiTest, TaskSetRoundTrip) {
  char* text = nullptr;
  ASSERT_EQ(lutcomp_taskset_to_json(set_, &text), LUTCOMP_OK);
  const std::string a = take(text);
  ASSERT_EQ(lutcomp_taskset_save(set_, file("t.json").c_str()), LUTCOMP_OK);
  lutcomp_taskset* back = nullptr;
  ASSERT_EQ(lutcomp_taskset_load(file("t.json").c_str(), &back), LUTCOMP_OK);
  ASSERT_EQ(lutcomp_taskset_to_json(back, &text), LUTCOMP_OK);
  EXPECT_EQ(take(text), a);
  char* h1 = nullptr;
  char* h2 = nullptr;
  lutcomp_taskset_hash(set_, &h1);
  lutcomp_taskset_hash(back, &h2);
  EXPECT_EQ(take(h1), take(h2));
  lutcomp_taskset_free(back);
}

TEST_F(CApiTest, ErrorCodesAndMessages) {
  lutcomp_taskset* missing = nullptr;
  EXPECT_EQ(lutcomp_taskset_load(file("absent.json").c_str(), &missing), LUTCOMP_IO_ERROR);
  EXPECT_EQ(missing, nullptr);
  EXPECT_NE(std::string(lutcomp_last_error()).find("absent"), std::string::npos);
  {
    std::ofstream out(file("bad.json"));
    out << "{not json";
  }
  EXPECT_EQ(lutcomp_taskset_load(file("bad.json").c_str(), &missing), LUTCOMP_FORMAT_ERROR);
  char* answer = nullptr;
  EXPECT_EQ(lutcomp_oracle_answer(set_, "NCz:001.", &answer), LUTCOMP_PARSE_ERROR);
  EXPECT_EQ(answer, nullptr);
  EXPECT_EQ(lutcomp_oracle_answer(nullptr, "NCa:001.", &answer), LUTCOMP_INVALID_ARGUMENT);
  EXPECT_EQ(lutcomp_oracle_answer(set_, nullptr, &answer), LUTCOMP_INVALID_ARGUMENT);
  EXPECT_EQ(lutcomp_train(R"({"variant":"nope"})", set_, nullptr, nullptr, nullptr),
            LUTCOMP_INVALID_ARGUMENT);
  lutcomp_model* model = nullptr;
  EXPECT_EQ(lutcomp_model_load(file("absent.ckpt").c_str(), &model), LUTCOMP_IO_ERROR);
  {
    std::ofstream out(file("junk.ckpt"), std::ios::binary);
    out << "garbage";
  }
  EXPECT_EQ(lutcomp_model_load(file("junk.ckpt").c_str(), &model), LUTCOMP_FORMAT_ERROR);
  char* result = nullptr;
  EXPECT_EQ(lutcomp_baseline(set_, "nonsense", 10, 1, &result), LUTCOMP_INVALID_ARGUMENT);
  lutcomp_taskset_free(nullptr);
  lutcomp_model_free(nullptr);
  lutcomp_free_string(nullptr);
}

TEST_F(CApiTest, OracleAgreesWithTrace) {
  char* answer = nullptr;
  ASSERT_EQ(lutcomp_oracle_answer(set_, "PCab:011.", &answer), LUTCOMP_OK);
  const std::string a = take(answer);
  EXPECT_EQ(a.size(), 7u);
  EXPECT_EQ(a.back(), '.');
  char* trace = nullptr;
  ASSERT_EQ(lutcomp_oracle_trace(set_, "PCab:011.", &trace), LUTCOMP_OK);
  EXPECT_FALSE(take(trace).empty());
}

TEST_F(CApiTest, TrainSaveLoadEvaluate) {
  const char* cfg =
      R"({"variant":"exp2","episodes_phase1":200,"episodes_phase2":200,)"
      R"("lstm_units":8,"init_seed":3,"train_seed":4,"log_every":100})";
  lutcomp_model* model = nullptr;
  char* record = nullptr;
  ASSERT_EQ(lutcomp_train(cfg, set_, file("log.jsonl").c_str(), &model, &record), LUTCOMP_OK)
      << lutcomp_last_error();
  const json rec = json::parse(take(record));
  EXPECT_EQ(rec.at("status"), "ok");
  EXPECT_EQ(rec.at("episodes_phase1"), 200);
  std::ifstream log(file("log.jsonl"));
  int lines = 0;
  for (std::string line; std::getline(log, line);) ++lines;
  EXPECT_EQ(lines, 4);

  ASSERT_EQ(lutcomp_model_save(model, file("m.ckpt").c_str()), LUTCOMP_OK);
  lutcomp_model* loaded = nullptr;
  ASSERT_EQ(lutcomp_model_load(file("m.ckpt").c_str(), &loaded), LUTCOMP_OK);
  char* a1 = nullptr;
  char* a2 = nullptr;
  ASSERT_EQ(lutcomp_model_answer(model, "PCab:011.", &a1), LUTCOMP_OK);
  ASSERT_EQ(lutcomp_model_answer(loaded, "PCab:011.", &a2), LUTCOMP_OK);
  EXPECT_EQ(take(a1), take(a2));

  char* report = nullptr;
  ASSERT_EQ(lutcomp_evaluate(loaded, set_, LUTCOMP_EVAL_ZERO_SHOT, &report), LUTCOMP_OK);
  const json zs = json::parse(take(report));
  EXPECT_EQ(zs.at("total"), 128);
  EXPECT_EQ(zs.at("kind"), "zero_shot");
  EXPECT_NEAR(zs.at("performance").get<double>(), rec.at("generalization_performance").get<double>(),
              1e-12);
  ASSERT_EQ(lutcomp_evaluate(loaded, set_, LUTCOMP_EVAL_EXHAUSTIVE, &report), LUTCOMP_OK);
  EXPECT_EQ(json::parse(take(report)).at("total"), 576);
  char* meta = nullptr;
  ASSERT_EQ(lutcomp_model_meta(loaded, &meta), LUTCOMP_OK);
  EXPECT_TRUE(json::parse(take(meta)).contains("config"));
  lutcomp_model_free(model);
  lutcomp_model_free(loaded);
}

TEST_F(CApiTest, BaselineKinds) {
  char* result = nullptr;
  ASSERT_EQ(lutcomp_baseline(set_, "random_wellformed", 20, 2, &result), LUTCOMP_OK);
  const json doc = json::parse(take(result));
  EXPECT_NEAR(doc.at("analytic").get<double>(), 100.0 / 64.0, 1e-12);
  ASSERT_EQ(lutcomp_baseline(set_, "random_output", 20, 2, &result), LUTCOMP_OK);
  lutcomp_free_string(result);
}

TEST_F(CApiTest, SearchAndReport) {
  const char* search =
      R"({"n_runs":2,"workers":2,"master_seed":8,)"
      R"("train":{"episodes_phase1":100,"episodes_phase2":100,"lstm_units":6,"log_every":0}})";
  ASSERT_EQ(lutcomp_search(search, set_, file("s.jsonl").c_str()), LUTCOMP_OK)
      << lutcomp_last_error();
  char* summary = nullptr;
  ASSERT_EQ(lutcomp_report(file("s.jsonl").c_str(), 10.0, file("rep").c_str(), &summary),
            LUTCOMP_OK);
  EXPECT_EQ(json::parse(take(summary)).at("ok"), 2);
  EXPECT_TRUE(std::filesystem::exists(file("rep.csv")));
  EXPECT_TRUE(std::filesystem::exists(file("rep.svg")));
  EXPECT_TRUE(std::filesystem::exists(file("rep.json")));
  char* cmp = nullptr;
  ASSERT_EQ(lutcomp_compare(file("s.jsonl").c_str(), file("s.jsonl").c_str(), 10.0,
                            file("cmp").c_str(), &cmp),
            LUTCOMP_OK);
  lutcomp_free_string(cmp);
  EXPECT_EQ(lutcomp_report(file("s.jsonl").c_str(), -1.0, file("rep").c_str(), &summary),
            LUTCOMP_INVALID_ARGUMENT);
}

}  // namespace
