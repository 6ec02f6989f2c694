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

// Many independent seeded training runs over a worker pool.
//
// Results are newline-delimited JSON: a header line, then one RunRecord per
// completed run. Lines are appended by a single writer as runs finish; when
// the search completes the file is rewritten sorted by run_id. A search
// re-run against an existing file skips run ids it already holds.

#ifndef LUTCOMP_SEARCH_HPP_
#define LUTCOMP_SEARCH_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lutcomp/tables.hpp"
#include "lutcomp/trainer.hpp"

namespace lutcomp {

inline constexpr int kResultsFormatVersion = 1;

enum class SeedPolicy { kFresh, kFixedInit };

struct SearchConfig {
  std::uint64_t n_runs = 10;
  int workers = 1;
  std::uint64_t master_seed = 0;
  SeedPolicy seed_policy = SeedPolicy::kFresh;
  // Used by kFixedInit; 0 means derive it from the master seed.
  std::uint64_t fixed_init_seed = 0;
  TrainConfig train;  // template; seeds are overwritten per run

  // Per-run seeds, a pure function of (config, run index).
  TrainConfig run_config(std::uint64_t run_id) const;
  // Identifies the search; excludes n_runs and workers so a search can be
  // extended or resumed with a different pool size.
  std::string hash() const;
};

std::string search_config_to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const std::string& text);

struct ResultsFile {
  std::string search_hash;
  std::string header_json;  // the header line as written
  std::vector<RunRecord> records;
};

// Tolerates a truncated final line.
ResultsFile load_results(const std::string& path);

using RunCallback = std::function<void(const RunRecord&)>;

// Runs every missing run id in [0, n_runs) and returns all records in the
// file, sorted by run_id.
std::vector<RunRecord> run_search(const SearchConfig& config,
                                  const TaskSuite& suite,
                                  const std::string& out_path,
                                  const RunCallback& on_done = {});

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

struct Summary {
  std::size_t ok = 0;
  std::size_t failed = 0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t above_80 = 0;
  std::size_t above_90 = 0;
  std::vector<HistogramBin> bins;
};

// Bins generalization performance over [0, 100]; 100 falls in the last bin.
Summary aggregate(const std::vector<RunRecord>& records, double bin_width = 5.0);

std::string histogram_csv(const Summary& summary);
std::string histogram_svg(const Summary& summary, const std::string& title);
std::string summary_json(const Summary& summary);

struct Comparison {
  Summary a;
  Summary b;
  std::string variant;
};

// Both sets must come from the same variant.
Comparison compare_inits(const std::vector<RunRecord>& a,
                         const std::vector<RunRecord>& b,
                         double bin_width = 5.0);
std::string comparison_csv(const Comparison& c);
std::string comparison_svg(const Comparison& c);
std::string comparison_json(const Comparison& c);

}  // namespace lutcomp

#endif  // LUTCOMP_SEARCH_HPP_
