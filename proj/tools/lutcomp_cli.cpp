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

// lutcomp: task generation, oracle queries, training, search, evaluation,
// baselines and reporting.
//
// One --seed feeds every random choice through named streams: "tasks" for
// the task set, "init" and "train" for a single run. search passes the seed
// on as its master seed.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lutcomp/lutcomp.h"

namespace {

using nlohmann::json;

struct Failure {
  std::string message;
  int status;
};

void check(lutcomp_status s) {
  if (s != LUTCOMP_OK) throw Failure{lutcomp_last_error(), static_cast<int>(s)};
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  lutcomp_free_string(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read " + path, LUTCOMP_IO_ERROR};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{"cannot write " + path, LUTCOMP_IO_ERROR};
  out << text;
  if (!out) throw Failure{"write failed for " + path, LUTCOMP_IO_ERROR};
}

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(path, text);
  }
}

struct TasksetHandle {
  lutcomp_taskset* p = nullptr;
  ~TasksetHandle() { lutcomp_taskset_free(p); }
};

struct ModelHandle {
  lutcomp_model* p = nullptr;
  ~ModelHandle() { lutcomp_model_free(p); }
};

std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

// Training flags shared by train and search.
struct TrainFlags {
  std::string config_path;
  std::string variant;
  std::optional<std::uint64_t> episodes_p1;
  std::optional<std::uint64_t> episodes_p2;
  std::optional<double> lr;
  std::string optimizer;
  bool final_output_only = false;
  bool full_scale = false;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "training config JSON; flags override it");
    app->add_option("--variant", variant,
                    "exp1 | exp2 | composed_only | shuffled_prompts | "
                    "random_task_codes | held_out_compositions");
    app->add_option("--episodes-p1", episodes_p1, "phase 1 episodes");
    app->add_option("--episodes-p2", episodes_p2, "phase 2 episodes");
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--optimizer", optimizer, "adam | sgd");
    app->add_flag("--final-output-only", final_output_only,
                  "targets omit the intermediate stage");
    app->add_flag("--full-scale", full_scale, "1,000,000 episodes per phase");
  }

  json resolve() const {
    json c = config_path.empty() ? json::object() : json::parse(read_file(config_path));
    if (full_scale) {
      c["episodes_phase1"] = 1000000;
      c["episodes_phase2"] = 1000000;
    }
    if (!variant.empty()) c["variant"] = variant;
    if (episodes_p1) c["episodes_phase1"] = *episodes_p1;
    if (episodes_p2) c["episodes_phase2"] = *episodes_p2;
    if (lr) c["lr"] = *lr;
    if (!optimizer.empty()) c["optimizer"] = optimizer;
    if (final_output_only) c["final_output_only"] = true;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lookup-table composition with recurrent networks"};
  app.require_subcommand(1);

  std::string tasks_path;
  std::string out_path;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "generate a task set");
  gen->add_option("--seed", seed, "master seed")->required();
  gen->add_option("--out", out_path, "task-set JSON (default stdout)");

  std::string prompt;
  bool trace = false;
  auto* oracle = app.add_subcommand("oracle", "answer a prompt with the reference automaton");
  oracle->add_option("--tasks", tasks_path, "task-set JSON")->required();
  oracle->add_option("--prompt", prompt, "e.g. PCgc:001.")->required();
  oracle->add_flag("--trace", trace, "print the per-step state trace");

  TrainFlags train_flags;
  std::string checkpoint_path;
  std::string log_path;
  std::string record_path;
  auto* train = app.add_subcommand("train", "train one network");
  train->add_option("--tasks", tasks_path, "task-set JSON")->required();
  train->add_option("--seed", seed, "master seed")->required();
  train->add_option("--checkpoint,--out", checkpoint_path, "checkpoint to write")->required();
  train->add_option("--log", log_path, "progress log (newline-delimited JSON)");
  train->add_option("--record", record_path,
                    "run record as a one-run results file (default <checkpoint>.jsonl)");
  train_flags.add(train);

  TrainFlags search_flags;
  std::uint64_t runs = 10;
  int workers = 1;
  bool fixed_init = false;
  std::uint64_t init_seed = 0;
  auto* search = app.add_subcommand("search", "train many seeded networks");
  search->add_option("--tasks", tasks_path, "task-set JSON")->required();
  search->add_option("--seed", seed, "master seed")->required();
  search->add_option("--runs", runs, "number of runs");
  search->add_option("--workers", workers, "worker threads");
  search->add_option("--out", out_path, "results file")->required();
  search->add_flag("--fixed-init", fixed_init, "share one initialization across runs");
  search->add_option("--init-seed", init_seed, "initialization seed for --fixed-init");
  search_flags.add(search);

  std::string kind = "zero_shot";
  auto* eval = app.add_subcommand("eval", "score a checkpoint");
  eval->add_option("--tasks", tasks_path, "task-set JSON")->required();
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint")->required();
  eval->add_option("--kind", kind, "zero_shot | exhaustive");
  eval->add_option("--out", out_path, "report JSON (default stdout)");

  std::string baseline_kind = "random_output";
  std::uint64_t trials = 1000;
  auto* baseline = app.add_subcommand("baseline", "chance-level baselines");
  baseline->add_option("--tasks", tasks_path, "task-set JSON")->required();
  baseline->add_option("--kind", baseline_kind, "random_output | random_wellformed");
  baseline->add_option("--trials", trials, "Monte-Carlo trials");
  baseline->add_option("--seed", seed, "master seed");
  baseline->add_option("--out", out_path, "result JSON (default stdout)");

  std::string in_path;
  std::string compare_path;
  double bins = 5.0;
  auto* report = app.add_subcommand("report", "aggregate results into CSV, SVG and JSON");
  report->add_option("--in", in_path, "results file")->required();
  report->add_option("--compare", compare_path, "second results file to overlay");
  report->add_option("--bins", bins, "bin width in percent");
  report->add_option("--out", out_path, "output prefix (default: input without extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      TasksetHandle ts;
      check(lutcomp_taskset_generate(lutcomp_derive_seed(seed, "tasks", 0), &ts.p));
      char* text = nullptr;
      check(lutcomp_taskset_to_json(ts.p, &text));
      emit(out_path, take(text));
    } else if (*oracle) {
      TasksetHandle ts;
      check(lutcomp_taskset_load(tasks_path.c_str(), &ts.p));
      char* text = nullptr;
      if (trace) {
        check(lutcomp_oracle_trace(ts.p, prompt.c_str(), &text));
      } else {
        check(lutcomp_oracle_answer(ts.p, prompt.c_str(), &text));
      }
      emit("", take(text));
    } else if (*train) {
      TasksetHandle ts;
      check(lutcomp_taskset_load(tasks_path.c_str(), &ts.p));
      json config = train_flags.resolve();
      config["init_seed"] = lutcomp_derive_seed(seed, "init", 0);
      config["train_seed"] = lutcomp_derive_seed(seed, "train", 0);
      ModelHandle model;
      char* rec = nullptr;
      check(lutcomp_train(config.dump().c_str(), ts.p,
                          log_path.empty() ? nullptr : log_path.c_str(), &model.p, &rec));
      const std::string record = take(rec);
      check(lutcomp_model_save(model.p, checkpoint_path.c_str()));
      char* meta = nullptr;
      check(lutcomp_model_meta(model.p, &meta));
      const json resolved = json::parse(take(meta)).at("config");
      char* hash = nullptr;
      check(lutcomp_taskset_hash(ts.p, &hash));
      const json header = {{"format_version", 1},
                           {"kind", "train"},
                           {"search_hash", ""},
                           {"seed", seed},
                           {"taskset_hash", take(hash)},
                           {"config", resolved}};
      const std::string path =
          record_path.empty() ? strip_extension(checkpoint_path) + ".jsonl" : record_path;
      write_file(path, header.dump() + "\n" + record + "\n");
      std::cout << record << '\n';
    } else if (*search) {
      TasksetHandle ts;
      check(lutcomp_taskset_load(tasks_path.c_str(), &ts.p));
      const json sc = {{"n_runs", runs},
                       {"workers", workers},
                       {"master_seed", seed},
                       {"seed_policy", fixed_init ? "fixed_init" : "fresh"},
                       {"fixed_init_seed", init_seed},
                       {"train", search_flags.resolve()}};
      check(lutcomp_search(sc.dump().c_str(), ts.p, out_path.c_str()));
      char* summary = nullptr;
      check(lutcomp_report(out_path.c_str(), 5.0, nullptr, &summary));
      const json s = json::parse(take(summary));
      std::cout << "runs ok " << s.at("ok") << " failed " << s.at("failed") << " mean "
                << s.at("mean") << " max " << s.at("max") << '\n';
    } else if (*eval) {
      TasksetHandle ts;
      check(lutcomp_taskset_load(tasks_path.c_str(), &ts.p));
      ModelHandle model;
      check(lutcomp_model_load(checkpoint_path.c_str(), &model.p));
      lutcomp_eval_kind k;
      if (kind == "zero_shot") {
        k = LUTCOMP_EVAL_ZERO_SHOT;
      } else if (kind == "exhaustive") {
        k = LUTCOMP_EVAL_EXHAUSTIVE;
      } else {
        throw Failure{"unknown evaluation kind '" + kind + "'", LUTCOMP_INVALID_ARGUMENT};
      }
      char* text = nullptr;
      check(lutcomp_evaluate(model.p, ts.p, k, &text));
      const std::string doc = take(text);
      emit(out_path, doc);
      if (!out_path.empty()) {
        const json r = json::parse(doc);
        std::cout << kind << " " << r.at("correct") << "/" << r.at("total") << " ("
                  << r.at("performance") << "%)\n";
      }
    } else if (*baseline) {
      TasksetHandle ts;
      check(lutcomp_taskset_load(tasks_path.c_str(), &ts.p));
      char* text = nullptr;
      check(lutcomp_baseline(ts.p, baseline_kind.c_str(), trials,
                             lutcomp_derive_seed(seed, "baseline", 0), &text));
      emit(out_path, take(text));
    } else if (*report) {
      const std::string prefix = out_path.empty() ? strip_extension(in_path) : out_path;
      char* text = nullptr;
      if (compare_path.empty()) {
        check(lutcomp_report(in_path.c_str(), bins, prefix.c_str(), &text));
      } else {
        check(lutcomp_compare(in_path.c_str(), compare_path.c_str(), bins, prefix.c_str(), &text));
      }
      take(text);
      std::cout << "wrote " << prefix << ".csv " << prefix << ".svg " << prefix << ".json\n";
    }
  } catch (const Failure& f) {
    std::cerr << "lutcomp: " << f.message << '\n';
    return f.status == 0 ? 1 : f.status;
  } catch (const std::exception& e) {
    std::cerr << "lutcomp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
