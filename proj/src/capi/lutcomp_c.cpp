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

#include "lutcomp/lutcomp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "lutcomp/automaton.hpp"
#include "lutcomp/checkpoint.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/eval.hpp"
#include "lutcomp/prompts.hpp"
#include "lutcomp/rng.hpp"
#include "lutcomp/search.hpp"
#include "lutcomp/tables.hpp"
#include "lutcomp/trainer.hpp"

struct lutcomp_taskset {
  lutcomp::TaskSuite suite;
};

struct lutcomp_model {
  lutcomp::NetParams params;
  lutcomp::OptState opt;
  lutcomp::TrainConfig config;
  std::string meta;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

template <typename F>
lutcomp_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return LUTCOMP_OK;
  } catch (const lutcomp::Error& e) {
    g_last_error = e.what();
    return static_cast<lutcomp_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return LUTCOMP_INTERNAL_ERROR;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) {
    lutcomp::fail(lutcomp::ErrorCode::kInvalidArgument, std::string(what) + " is null");
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) lutcomp::fail(lutcomp::ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) lutcomp::fail(lutcomp::ErrorCode::kIo, "write failed for " + path);
}

std::string model_meta(const lutcomp::TrainConfig& config,
                       const lutcomp::RunRecord& record) {
  json doc = {{"config", json::parse(lutcomp::config_to_json(config))},
              {"record", json::parse(lutcomp::record_to_json(record))}};
  return doc.dump();
}

}  // namespace

extern "C" {

const char* lutcomp_version(void) { return "1.0.0"; }
const char* lutcomp_rng_version(void) { return lutcomp::kRngVersion.data(); }
const char* lutcomp_last_error(void) { return g_last_error.c_str(); }
void lutcomp_free_string(char* s) { std::free(s); }

uint64_t lutcomp_derive_seed(uint64_t master, const char* name, uint64_t index) {
  return lutcomp::derive_seed(master, name == nullptr ? "" : name, index);
}

lutcomp_status lutcomp_taskset_generate(uint64_t seed, lutcomp_taskset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lutcomp_taskset{lutcomp::generate_suite(seed)};
  });
}

lutcomp_status lutcomp_taskset_load(const char* path, lutcomp_taskset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lutcomp_taskset{lutcomp::load_suite(path)};
  });
}

lutcomp_status lutcomp_taskset_save(const lutcomp_taskset* set, const char* path) {
  return guarded([&] {
    require(set, "taskset");
    require(path, "path");
    lutcomp::save_suite(path, set->suite);
  });
}

lutcomp_status lutcomp_taskset_to_json(const lutcomp_taskset* set, char** json_out) {
  return guarded([&] {
    require(set, "taskset");
    require(json_out, "out");
    *json_out = dup(lutcomp::serialize_suite(set->suite));
  });
}

lutcomp_status lutcomp_taskset_hash(const lutcomp_taskset* set, char** hash) {
  return guarded([&] {
    require(set, "taskset");
    require(hash, "out");
    *hash = dup(lutcomp::suite_hash(set->suite));
  });
}

void lutcomp_taskset_free(lutcomp_taskset* set) { delete set; }

lutcomp_status lutcomp_oracle_answer(const lutcomp_taskset* set, const char* prompt,
                                     char** answer) {
  return guarded([&] {
    require(set, "taskset");
    require(prompt, "prompt");
    require(answer, "out");
    *answer = dup(lutcomp::oracle_answer(prompt, set->suite.tasks));
  });
}

lutcomp_status lutcomp_oracle_trace(const lutcomp_taskset* set, const char* prompt,
                                    char** trace) {
  return guarded([&] {
    require(set, "taskset");
    require(prompt, "prompt");
    require(trace, "out");
    const auto& tasks = set->suite.tasks;
    const auto parsed = lutcomp::parse_prompt(prompt, static_cast<int>(tasks.length()),
                                              static_cast<int>(tasks.tables().size()));
    const auto ep = lutcomp::build_episode(parsed.task, tasks, parsed.input);
    const auto st = lutcomp::trace_episode(parsed.task, tasks, parsed.input);
    *trace = dup(lutcomp::format_trace(ep, st));
  });
}

lutcomp_status lutcomp_train(const char* config_json, const lutcomp_taskset* set,
                             const char* log_path, lutcomp_model** model,
                             char** record_json) {
  return guarded([&] {
    require(config_json, "config");
    require(set, "taskset");
    require(model, "model out");
    const lutcomp::TrainConfig config = lutcomp::config_from_json(config_json);
    std::unique_ptr<std::ofstream> log;
    lutcomp::LogSink sink;
    if (log_path != nullptr) {
      log = std::make_unique<std::ofstream>(log_path, std::ios::binary | std::ios::trunc);
      if (!*log) lutcomp::fail(lutcomp::ErrorCode::kIo, std::string("cannot write ") + log_path);
      sink = [&log](const lutcomp::LogRecord& r) { *log << lutcomp::log_to_json(r) << '\n'; };
    }
    lutcomp::RunResult run = lutcomp::train_run(config, set->suite, 0, sink);
    auto m = std::make_unique<lutcomp_model>();
    m->meta = model_meta(config, run.record);
    m->params = std::move(run.params);
    m->opt = std::move(run.opt);
    m->config = config;
    if (record_json != nullptr) *record_json = dup(lutcomp::record_to_json(run.record));
    *model = m.release();
  });
}

lutcomp_status lutcomp_model_load(const char* path, lutcomp_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    lutcomp::Checkpoint ck = lutcomp::load_checkpoint(path);
    auto m = std::make_unique<lutcomp_model>();
    try {
      const json meta = json::parse(ck.meta);
      m->config = lutcomp::config_from_json(meta.at("config").dump());
    } catch (const json::exception& e) {
      lutcomp::fail(lutcomp::ErrorCode::kFormat,
                    std::string("checkpoint metadata lacks a config: ") + e.what());
    }
    m->params = std::move(ck.params);
    m->opt = std::move(ck.opt);
    m->meta = std::move(ck.meta);
    *out = m.release();
  });
}

lutcomp_status lutcomp_model_save(const lutcomp_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    lutcomp::save_checkpoint(path, lutcomp::Checkpoint{model->params, model->opt, model->meta});
  });
}

lutcomp_status lutcomp_model_meta(const lutcomp_model* model, char** json_out) {
  return guarded([&] {
    require(model, "model");
    require(json_out, "out");
    *json_out = dup(model->meta);
  });
}

void lutcomp_model_free(lutcomp_model* model) { delete model; }

lutcomp_status lutcomp_model_answer(const lutcomp_model* model, const char* prompt,
                                    char** answer) {
  return guarded([&] {
    require(model, "model");
    require(prompt, "prompt");
    require(answer, "out");
    // Bound free-running output by the longest well-formed target.
    const std::size_t cap = lutcomp::output_cap(7);
    *answer = dup(lutcomp::generate(model->params, prompt, cap));
  });
}

lutcomp_status lutcomp_evaluate(const lutcomp_model* model, const lutcomp_taskset* set,
                                lutcomp_eval_kind kind, char** report_json) {
  return guarded([&] {
    require(model, "model");
    require(set, "taskset");
    require(report_json, "out");
    lutcomp::EvalReport report;
    if (kind == LUTCOMP_EVAL_EXHAUSTIVE) {
      report = lutcomp::evaluate_exhaustive(model->params, set->suite.tasks);
    } else if (kind == LUTCOMP_EVAL_ZERO_SHOT) {
      const auto stream = lutcomp::apply_variant(model->config.variant, set->suite, model->config);
      report = lutcomp::score(lutcomp::variant_test_items(set->suite, model->config, stream),
                              set->suite.tasks, lutcomp::network_responder(model->params),
                              model->config.final_output_only);
    } else {
      lutcomp::fail(lutcomp::ErrorCode::kInvalidArgument, "unknown evaluation kind");
    }
    json doc = json::parse(lutcomp::report_to_json(report, -1));
    doc["kind"] = kind == LUTCOMP_EVAL_EXHAUSTIVE ? "exhaustive" : "zero_shot";
    doc["taskset_hash"] = lutcomp::suite_hash(set->suite);
    doc["model"] = json::parse(model->meta);
    *report_json = dup(doc.dump(2));
  });
}

lutcomp_status lutcomp_baseline(const lutcomp_taskset* set, const char* kind,
                                uint64_t trials, uint64_t seed, char** result_json) {
  return guarded([&] {
    require(set, "taskset");
    require(kind, "kind");
    require(result_json, "out");
    const std::string k = kind;
    lutcomp::BaselineResult r;
    if (k == "random_output") {
      r = lutcomp::baseline_random_output(set->suite, trials, seed);
    } else if (k == "random_wellformed") {
      r = lutcomp::baseline_random_wellformed(set->suite, trials, seed);
    } else {
      lutcomp::fail(lutcomp::ErrorCode::kInvalidArgument, "unknown baseline '" + k + "'");
    }
    json doc = {{"baseline", k},
                {"seed", seed},
                {"trials", r.trials},
                {"items_per_trial", r.items_per_trial},
                {"mean", r.mean},
                {"analytic", r.analytic},
                {"standard_error", r.standard_error},
                {"taskset_hash", lutcomp::suite_hash(set->suite)}};
    *result_json = dup(doc.dump(2));
  });
}

lutcomp_status lutcomp_search(const char* search_config_json, const lutcomp_taskset* set,
                              const char* results_path) {
  return guarded([&] {
    require(search_config_json, "search config");
    require(set, "taskset");
    require(results_path, "results path");
    const auto config = lutcomp::search_config_from_json(search_config_json);
    lutcomp::run_search(config, set->suite, results_path);
  });
}

lutcomp_status lutcomp_report(const char* results_path, double bin_width,
                              const char* out_prefix, char** summary_out) {
  return guarded([&] {
    require(results_path, "results path");
    const auto file = lutcomp::load_results(results_path);
    const auto summary = lutcomp::aggregate(file.records, bin_width);
    json doc = json::parse(lutcomp::summary_json(summary));
    doc["search_hash"] = file.search_hash;
    doc["header"] = json::parse(file.header_json);
    doc["bin_width"] = bin_width;
    const std::string text = doc.dump(2) + "\n";
    if (out_prefix != nullptr) {
      const std::string p = out_prefix;
      write_file(p + ".csv", lutcomp::histogram_csv(summary));
      write_file(p + ".svg", lutcomp::histogram_svg(
                                 summary, "Generalization over " +
                                              std::to_string(summary.ok) + " runs"));
      write_file(p + ".json", text);
    }
    if (summary_out != nullptr) *summary_out = dup(text);
  });
}

lutcomp_status lutcomp_compare(const char* results_a, const char* results_b,
                               double bin_width, const char* out_prefix,
                               char** comparison_out) {
  return guarded([&] {
    require(results_a, "results A");
    require(results_b, "results B");
    const auto a = lutcomp::load_results(results_a);
    const auto b = lutcomp::load_results(results_b);
    const auto c = lutcomp::compare_inits(a.records, b.records, bin_width);
    json doc = json::parse(lutcomp::comparison_json(c));
    doc["search_hash_a"] = a.search_hash;
    doc["search_hash_b"] = b.search_hash;
    const std::string text = doc.dump(2) + "\n";
    if (out_prefix != nullptr) {
      const std::string p = out_prefix;
      write_file(p + ".csv", lutcomp::comparison_csv(c));
      write_file(p + ".svg", lutcomp::comparison_svg(c));
      write_file(p + ".json", text);
    }
    if (comparison_out != nullptr) *comparison_out = dup(text);
  });
}

}  // extern "C"
