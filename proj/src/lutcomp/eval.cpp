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

#include "lutcomp/eval.hpp"

#include <cmath>

#include "json.hpp"
#include "lutcomp/automaton.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/prompts.hpp"
#include "lutcomp/rng.hpp"

namespace lutcomp {

Responder network_responder(const NetParams& params) {
  return [&params](const std::string& prompt, std::size_t max_outputs) {
    return generate(params, prompt, max_outputs);
  };
}

Responder oracle_responder(const TaskSet& set) {
  return [&set](const std::string& prompt, std::size_t max_outputs) {
    std::string out = oracle_answer(prompt, set);
    if (out.size() > max_outputs) out.resize(max_outputs);
    return out;
  };
}

std::vector<TestItem> zero_shot_items(const TaskSuite& suite) {
  std::vector<TestItem> items;
  for (const auto& [task, inputs] : suite.split.held_out) {
    for (const auto& x : inputs) items.push_back(TestItem{task, x, {}});
  }
  return items;
}

std::vector<TestItem> atomic_items(const TaskSet& set) {
  std::vector<TestItem> items;
  for (const auto& task : set.atomic_tasks()) {
    for (std::uint32_t v = 0; v < set.domain_size(); ++v) {
      items.push_back(TestItem{task, BitString(v, set.length()), {}});
    }
  }
  return items;
}

std::vector<TestItem> exhaustive_items(const TaskSet& set) {
  std::vector<TestItem> items = atomic_items(set);
  for (const auto& task : set.composed_tasks()) {
    for (std::uint32_t v = 0; v < set.domain_size(); ++v) {
      items.push_back(TestItem{task, BitString(v, set.length()), {}});
    }
  }
  return items;
}

std::vector<TestItem> seen_composed_items(const TaskSuite& suite) {
  std::vector<TestItem> items;
  const TaskSet& set = suite.tasks;
  for (const auto& task : set.composed_tasks()) {
    for (const auto& x :
         suite.split.trainable_inputs(task, set.domain_size(), set.length())) {
      items.push_back(TestItem{task, x, {}});
    }
  }
  return items;
}

EvalReport score(const std::vector<TestItem>& items, const TaskSet& set,
                 const Responder& responder, bool final_output_only) {
  EvalReport report;
  report.items.reserve(items.size());
  for (const auto& item : items) {
    EvalItem e;
    const TaskRef shown =
        item.shown_codes.empty() ? item.task : TaskRef{item.shown_codes};
    e.prompt = render_prompt(shown, item.input);
    e.target = expected_output(item.task, set, item.input, final_output_only);
    e.emitted = responder(e.prompt, output_cap(e.target.size()));
    e.correct = e.emitted == e.target;
    e.task = item.task.codes;
    auto& tally = report.by_task[e.task];
    tally.second += 1;
    if (e.correct) {
      tally.first += 1;
      report.correct += 1;
    }
    report.items.push_back(std::move(e));
  }
  report.performance =
      items.empty() ? 0.0 : 100.0 * static_cast<double>(report.correct) /
                                static_cast<double>(items.size());
  return report;
}

EvalReport evaluate_zero_shot(const NetParams& params, const TaskSuite& suite) {
  return score(zero_shot_items(suite), suite.tasks, network_responder(params));
}

EvalReport evaluate_exhaustive(const NetParams& params, const TaskSet& set) {
  return score(exhaustive_items(set), set, network_responder(params));
}

std::string report_to_json(const EvalReport& report, int indent) {
  using nlohmann::json;
  json items = json::array();
  for (const auto& e : report.items) {
    items.push_back({{"prompt", e.prompt},
                     {"target", e.target},
                     {"emitted", e.emitted},
                     {"correct", e.correct},
                     {"task", e.task}});
  }
  json by_task = json::object();
  for (const auto& [task, tally] : report.by_task) {
    by_task[task] = {{"correct", tally.first}, {"total", tally.second}};
  }
  json doc = {{"total", report.items.size()},
              {"correct", report.correct},
              {"performance", report.performance},
              {"by_task", std::move(by_task)},
              {"items", std::move(items)}};
  return doc.dump(indent);
}

namespace {

BaselineResult run_baseline(const TaskSuite& suite, std::uint64_t trials,
                            const Responder& responder, double analytic_p) {
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  const auto items = zero_shot_items(suite);
  if (items.empty()) fail(ErrorCode::kInvalidArgument, "split has no test items");
  BaselineResult r;
  r.trials = trials;
  r.items_per_trial = items.size();
  double sum = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    sum += score(items, suite.tasks, responder).performance;
  }
  r.mean = sum / static_cast<double>(trials);
  r.analytic = 100.0 * analytic_p;
  r.standard_error =
      100.0 * std::sqrt(analytic_p * (1.0 - analytic_p) /
                        (static_cast<double>(trials) * static_cast<double>(items.size())));
  return r;
}

// Mean over test items of the per-item success probability; all items share
// the same target length in the standard split, but the mean is general.
double mean_probability(const TaskSuite& suite, bool wellformed) {
  const auto items = zero_shot_items(suite);
  double acc = 0.0;
  for (const auto& item : items) {
    const auto len = expected_output(item.task, suite.tasks, item.input).size();
    if (wellformed) {
      acc += len == 7 ? std::pow(0.5, 6) : 0.0;
    } else {
      acc += std::pow(1.0 / 3.0, static_cast<double>(len));
    }
  }
  return items.empty() ? 0.0 : acc / static_cast<double>(items.size());
}

}  // namespace

BaselineResult baseline_random_output(const TaskSuite& suite,
                                      std::uint64_t trials,
                                      std::uint64_t seed) {
  Rng rng(derive_seed(seed, "baseline-random-output"));
  Responder responder = [&rng](const std::string&, std::size_t max_outputs) {
    std::string out;
    while (out.size() < max_outputs) {
      const char c = vocab::kOutputChars[static_cast<std::size_t>(rng.below(3))];
      out.push_back(c);
      if (c == '.') break;
    }
    return out;
  };
  return run_baseline(suite, trials, responder, mean_probability(suite, false));
}

BaselineResult baseline_random_wellformed(const TaskSuite& suite,
                                          std::uint64_t trials,
                                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, "baseline-random-wellformed"));
  Responder responder = [&rng](const std::string&, std::size_t) {
    std::string out;
    for (int i = 0; i < 6; ++i) out.push_back(rng.coin() ? '1' : '0');
    out.push_back('.');
    return out;
  };
  return run_baseline(suite, trials, responder, mean_probability(suite, true));
}

}  // namespace lutcomp
