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

// Training procedures.
//
// exp1 trains a 29-unit network in two phases: first the recurrent layer is
// regressed onto automaton state traces for random well-formed episodes,
// then the recurrent weights are frozen and the masked head is fitted on
// atomic tasks with cross-entropy. The remaining variants are the two-phase
// curriculum (atomic only, then atomic + composed) and its ablations. Every
// run updates after each episode.
//
// init_seed feeds only the parameter initialization; train_seed feeds only
// episode sampling and code obfuscation.

#ifndef LUTCOMP_TRAINER_HPP_
#define LUTCOMP_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lutcomp/eval.hpp"
#include "lutcomp/net.hpp"
#include "lutcomp/rng.hpp"
#include "lutcomp/tables.hpp"

namespace lutcomp {

enum class Variant {
  kExp1,
  kExp2,
  kComposedOnly,
  kShuffledPrompts,
  kRandomTaskCodes,
  kHeldOutCompositions,
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

inline constexpr std::uint64_t kDeskEpisodes = 200'000;
inline constexpr std::uint64_t kFullEpisodes = 1'000'000;

struct TrainConfig {
  Variant variant = Variant::kExp2;
  std::uint64_t episodes_phase1 = kDeskEpisodes;
  std::uint64_t episodes_phase2 = kDeskEpisodes;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  // 0 means "default for the variant": 29 for exp1, 60 otherwise.
  int lstm_units = 0;
  int sigmoid_units = 10;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 1e-3;
  // Learning rates for the two exp1 phases; 0 falls back to `lr`.
  double exp1_lr_phase1 = 0.0;
  double exp1_lr_phase2 = 0.0;
  bool final_output_only = false;
  // held_out_compositions: number of composed tasks withheld entirely.
  int held_out_tasks = 16;
  // exp1: per-unit hidden MSE after phase 1 must stay below this.
  double hidden_mse_threshold = 0.05;
  std::uint64_t log_every = 1000;

  NetConfig net_config() const;
  // Stable hash over every field that affects training.
  std::string hash() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const std::string& text);

// Success over the most recent episodes.
class RollingSuccess {
 public:
  static constexpr std::size_t kWindow = 100;

  void push(bool correct);
  std::size_t size() const { return count_; }
  double rate() const;  // percent, 0 when empty
  std::vector<bool> window() const;  // oldest first

 private:
  std::array<bool, kWindow> ring_{};
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  std::size_t hits_ = 0;
};

struct SampledEpisode {
  TaskRef task;
  BitString input;
  std::string shown_codes;  // codes rendered in the prompt
};

// How composed-task codes appear in prompts.
class CodePolicy {
 public:
  static CodePolicy identity() { return CodePolicy(); }
  static CodePolicy shuffled(const TaskSet& set, std::uint64_t train_seed);
  static CodePolicy random_codes(const TaskSet& set);

  // Codes shown for `task`; rng is consulted only by random_codes.
  std::string show(const TaskRef& task, Rng& rng) const;
  const std::map<TaskRef, std::string>& bijection() const { return bijection_; }

 private:
  enum class Kind { kIdentity, kShuffled, kRandom };
  Kind kind_ = Kind::kIdentity;
  std::map<TaskRef, std::string> bijection_;
  std::vector<std::string> codes_;
};

// The per-episode sampling stream of one run.
class EpisodeStream {
 public:
  EpisodeStream(const TaskSuite& suite, const TrainConfig& config);

  SampledEpisode next(int phase);
  const CodePolicy& policy() const { return policy_; }
  // Composed tasks withheld from training (held_out_compositions only).
  const std::vector<TaskRef>& withheld_tasks() const { return withheld_; }

 private:
  SampledEpisode draw(bool atomic);

  const TaskSuite& suite_;
  Variant variant_;
  Rng rng_;
  CodePolicy policy_;
  std::vector<TaskRef> atomic_;
  std::vector<TaskRef> composed_;  // trainable composed tasks
  std::vector<std::vector<BitString>> composed_inputs_;
  std::vector<TaskRef> withheld_;
};

// Returns the stream with the variant's sampling and prompt rules applied.
EpisodeStream apply_variant(Variant variant, const TaskSuite& suite,
                            TrainConfig config);

struct LogRecord {
  int phase = 0;
  std::uint64_t episode = 0;  // 1-based within the phase
  double rolling_success = 0.0;
  double mean_loss = 0.0;
};
std::string log_to_json(const LogRecord& rec);

using LogSink = std::function<void(const LogRecord&)>;
// Receives every sampled episode (phase, episode) for audits.
using EpisodeAudit = std::function<void(int, const SampledEpisode&)>;

struct Exp1Metrics {
  std::vector<LogRecord> curve;
  double phase1_hidden_mse = 0.0;   // mean over probe episodes
  double phase1_max_unit_mse = 0.0; // worst unit over probe episodes
  double phase2_final_rolling = 0.0;
  double exhaustive_accuracy = 0.0;
  bool tracking_ok = false;  // max unit MSE below the threshold
};

struct Exp1Result {
  NetParams params;
  OptState opt;
  Exp1Metrics metrics;
};

Exp1Result train_exp1(const TrainConfig& config, const TaskSuite& suite,
                      const LogSink& log = {});

struct RunRecord {
  std::uint64_t run_id = 0;
  std::string variant;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t episodes_phase1 = 0;
  std::uint64_t episodes_phase2 = 0;
  std::string optimizer;
  double lr = 0.0;
  std::string taskset_hash;
  std::string config_hash;
  double atomic_accuracy = 0.0;
  double seen_composed_accuracy = 0.0;
  double generalization_performance = 0.0;
  double exhaustive_accuracy = 0.0;
  double phase1_final_rolling = 0.0;
  double phase2_final_rolling = 0.0;
  double wall_time = 0.0;
  std::string status = "ok";  // ok | failed
  std::string error;

  // Equality on everything except wall_time.
  bool same_result(const RunRecord& other) const;
};

std::string record_to_json(const RunRecord& rec);
RunRecord record_from_json(const std::string& line);

struct RunResult {
  NetParams params;
  OptState opt;
  RunRecord record;
};

// The curriculum and all of its ablations; rejects exp1.
RunResult train_exp2(const TrainConfig& config, const TaskSuite& suite,
                     const LogSink& log = {}, const EpisodeAudit& audit = {});

// Dispatches on config.variant and fills run_id / taskset_hash. For exp1 the
// record's accuracies come from the trained network like any other run.
RunResult train_run(const TrainConfig& config, const TaskSuite& suite,
                    std::uint64_t run_id = 0, const LogSink& log = {});

// Zero-shot items as prompted under the run's variant (obfuscated codes or
// withheld tasks).
std::vector<TestItem> variant_test_items(const TaskSuite& suite,
                                         const TrainConfig& config,
                                         const EpisodeStream& stream);

std::string suite_hash(const TaskSuite& suite);

}  // namespace lutcomp

#endif  // LUTCOMP_TRAINER_HPP_
