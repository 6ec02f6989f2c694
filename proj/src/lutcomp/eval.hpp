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

// Exact-match scoring of free-running answers, and the random baselines.

#ifndef LUTCOMP_EVAL_HPP_
#define LUTCOMP_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lutcomp/net.hpp"
#include "lutcomp/tables.hpp"

namespace lutcomp {

// Produces an answer for a prompt, emitting at most `max_outputs` characters.
using Responder =
    std::function<std::string(const std::string& prompt, std::size_t max_outputs)>;

Responder network_responder(const NetParams& params);
Responder oracle_responder(const TaskSet& set);

struct TestItem {
  TaskRef task;
  BitString input;
  std::string shown_codes;  // empty: the task's own codes
};

// The held-out (composed task, input) pairs of the split.
std::vector<TestItem> zero_shot_items(const TaskSuite& suite);
// Every input of every atomic and composed task.
std::vector<TestItem> exhaustive_items(const TaskSet& set);
// Subsets used for training diagnostics.
std::vector<TestItem> atomic_items(const TaskSet& set);
std::vector<TestItem> seen_composed_items(const TaskSuite& suite);

struct EvalItem {
  std::string prompt;
  std::string target;
  std::string emitted;
  bool correct = false;
  std::string task;  // codes actually computed
};

struct EvalReport {
  std::vector<EvalItem> items;
  std::size_t correct = 0;
  double performance = 0.0;  // percent
  // task codes -> (correct, total)
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_task;
};

EvalReport score(const std::vector<TestItem>& items, const TaskSet& set,
                 const Responder& responder, bool final_output_only = false);

EvalReport evaluate_zero_shot(const NetParams& params, const TaskSuite& suite);
EvalReport evaluate_exhaustive(const NetParams& params, const TaskSet& set);

std::string report_to_json(const EvalReport& report, int indent = 2);

struct BaselineResult {
  double mean = 0.0;         // mean percentage over trials
  double analytic = 0.0;     // expected percentage
  double standard_error = 0.0;  // of the mean, binomial
  std::uint64_t trials = 0;
  std::size_t items_per_trial = 0;
};

// Emits uniformly random symbols from {0, 1, .} until '.' or the output cap.
BaselineResult baseline_random_output(const TaskSuite& suite,
                                      std::uint64_t trials, std::uint64_t seed);
// Emits six uniformly random bits and a dot for every item.
BaselineResult baseline_random_wellformed(const TaskSuite& suite,
                                          std::uint64_t trials,
                                          std::uint64_t seed);

}  // namespace lutcomp

#endif  // LUTCOMP_EVAL_HPP_
