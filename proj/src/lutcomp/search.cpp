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

#include "lutcomp/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/rng.hpp"

namespace lutcomp {

using nlohmann::json;

TrainConfig SearchConfig::run_config(std::uint64_t run_id) const {
  TrainConfig c = train;
  if (seed_policy == SeedPolicy::kFixedInit) {
    c.init_seed = fixed_init_seed != 0 ? fixed_init_seed : derive_seed(master_seed, "init", 0);
  } else {
    c.init_seed = derive_seed(master_seed, "init", run_id);
  }
  c.train_seed = derive_seed(master_seed, "train", run_id);
  return c;
}

namespace {

json search_json(const SearchConfig& c, bool with_pool) {
  json doc = {
      {"master_seed", c.master_seed},
      {"seed_policy", c.seed_policy == SeedPolicy::kFresh ? "fresh" : "fixed_init"},
      {"fixed_init_seed", c.fixed_init_seed},
      {"train", json::parse(config_to_json(c.train))},
  };
  if (with_pool) {
    doc["n_runs"] = c.n_runs;
    doc["workers"] = c.workers;
  }
  return doc;
}

}  // namespace

std::string SearchConfig::hash() const {
  return hex64(fnv1a64(search_json(*this, false).dump()));
}

std::string search_config_to_json(const SearchConfig& config) {
  return search_json(config, true).dump();
}

SearchConfig search_config_from_json(const std::string& text) {
  SearchConfig c;
  try {
    const json doc = json::parse(text);
    for (const auto& [key, value] : doc.items()) {
      if (key == "n_runs") c.n_runs = value.get<std::uint64_t>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "master_seed") c.master_seed = value.get<std::uint64_t>();
      else if (key == "fixed_init_seed") c.fixed_init_seed = value.get<std::uint64_t>();
      else if (key == "seed_policy") {
        const auto p = value.get<std::string>();
        if (p == "fresh") c.seed_policy = SeedPolicy::kFresh;
        else if (p == "fixed_init") c.seed_policy = SeedPolicy::kFixedInit;
        else fail(ErrorCode::kInvalidArgument, "unknown seed policy '" + p + "'");
      } else if (key == "train") {
        c.train = config_from_json(value.dump());
      } else {
        fail(ErrorCode::kInvalidArgument, "unknown search config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad search config: ") + e.what());
  }
  if (c.workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  return c;
}

ResultsFile load_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  ResultsFile file;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const bool complete = !in.eof();
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception&) {
      if (!complete) break;  // a writer is mid-line
      fail(ErrorCode::kFormat, "corrupt line in " + path);
    }
    if (first) {
      first = false;
      if (!doc.contains("format_version") || doc.contains("run_id")) {
        fail(ErrorCode::kFormat, path + " has no results header");
      }
      if (doc.at("format_version").get<int>() != kResultsFormatVersion) {
        fail(ErrorCode::kVersion, "unsupported results format_version in " + path);
      }
      file.search_hash = doc.value("search_hash", std::string());
      file.header_json = line;
      continue;
    }
    file.records.push_back(record_from_json(line));
  }
  if (first) fail(ErrorCode::kFormat, path + " is empty");
  return file;
}

namespace {

std::string header_line(const SearchConfig& config, const TaskSuite& suite) {
  json doc = {{"format_version", kResultsFormatVersion},
              {"search_hash", config.hash()},
              {"taskset_hash", suite_hash(suite)},
              {"search_config", search_json(config, true)}};
  return doc.dump();
}

void rewrite_sorted(const std::string& path, const std::string& header,
                    std::vector<RunRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp);
    out << header << '\n';
    for (const auto& r : records) out << record_to_json(r) << '\n';
    if (!out) fail(ErrorCode::kIo, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<RunRecord> run_search(const SearchConfig& config,
                                  const TaskSuite& suite,
                                  const std::string& out_path,
                                  const RunCallback& on_done) {
  if (config.workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  std::vector<RunRecord> records;
  std::string header = header_line(config, suite);
  std::set<std::uint64_t> done;
  if (std::filesystem::exists(out_path)) {
    ResultsFile existing = load_results(out_path);
    if (existing.search_hash != config.hash()) {
      fail(ErrorCode::kInvalidArgument,
           out_path + " belongs to a different search configuration");
    }
    header = existing.header_json;
    records = std::move(existing.records);
    for (const auto& r : records) done.insert(r.run_id);
    // Drop any partial trailing line before appending.
    rewrite_sorted(out_path, header, records);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write " + out_path);
    out << header << '\n';
  }

  std::vector<std::uint64_t> pending;
  for (std::uint64_t i = 0; i < config.n_runs; ++i) {
    if (!done.count(i)) pending.push_back(i);
  }
  if (!pending.empty()) {
    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) fail(ErrorCode::kIo, "cannot append to " + out_path);
    std::mutex writer;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= pending.size()) return;
        const std::uint64_t run_id = pending[k];
        const TrainConfig rc = config.run_config(run_id);
        RunRecord rec;
        try {
          rec = train_run(rc, suite, run_id).record;
        } catch (const std::exception& e) {
          rec = RunRecord{};
          rec.run_id = run_id;
          rec.variant = variant_name(rc.variant);
          rec.init_seed = rc.init_seed;
          rec.train_seed = rc.train_seed;
          rec.episodes_phase1 = rc.episodes_phase1;
          rec.episodes_phase2 = rc.episodes_phase2;
          rec.optimizer = optimizer_name(rc.optimizer);
          rec.lr = rc.lr;
          rec.taskset_hash = suite_hash(suite);
          rec.config_hash = rc.hash();
          rec.status = "failed";
          rec.error = e.what();
        }
        std::lock_guard<std::mutex> lock(writer);
        out << record_to_json(rec) << '\n' << std::flush;
        records.push_back(rec);
        if (on_done) on_done(rec);
      }
    };
    const int n = std::min<int>(config.workers, static_cast<int>(pending.size()));
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  rewrite_sorted(out_path, header, records);
  return records;
}

Summary aggregate(const std::vector<RunRecord>& records, double bin_width) {
  if (!(bin_width > 0.0) || bin_width > 100.0) {
    fail(ErrorCode::kInvalidArgument, "bin width must be in (0, 100]");
  }
  Summary s;
  std::vector<double> scores;
  for (const auto& r : records) {
    if (r.status == "ok") {
      scores.push_back(r.generalization_performance);
    } else {
      ++s.failed;
    }
  }
  if (scores.empty()) fail(ErrorCode::kInvalidArgument, "no successful runs to aggregate");
  s.ok = scores.size();
  const auto nbins = static_cast<std::size_t>(std::ceil(100.0 / bin_width - 1e-9));
  for (std::size_t i = 0; i < nbins; ++i) {
    s.bins.push_back({bin_width * static_cast<double>(i),
                      std::min(100.0, bin_width * static_cast<double>(i + 1)), 0});
  }
  double sum = 0.0;
  for (double x : scores) {
    sum += x;
    s.max = std::max(s.max, x);
    if (x > 80.0) ++s.above_80;
    if (x > 90.0) ++s.above_90;
    auto idx = static_cast<std::size_t>(std::floor(x / bin_width));
    s.bins[std::min(idx, nbins - 1)].count += 1;
  }
  s.mean = sum / static_cast<double>(scores.size());
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  s.median = n % 2 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
  return s;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

// Minimal bar chart; one series per entry of `series`.
std::string bar_svg(const std::vector<HistogramBin>& bins,
                    const std::vector<std::vector<std::size_t>>& series,
                    const std::vector<std::string>& colors,
                    const std::string& title) {
  constexpr double kW = 640, kH = 360, kLeft = 50, kBottom = 40, kTop = 30, kRight = 10;
  std::size_t peak = 1;
  for (const auto& s : series) {
    for (auto c : s) peak = std::max(peak, c);
  }
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  const double slot = plot_w / static_cast<double>(bins.size());
  const double bar = slot / static_cast<double>(series.size()) * 0.9;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double h = plot_h * static_cast<double>(series[s][i]) / static_cast<double>(peak);
      const double x = kLeft + slot * static_cast<double>(i) + bar * static_cast<double>(s) + slot * 0.05;
      out << "<rect x=\"" << num(x) << "\" y=\"" << num(kH - kBottom - h) << "\" width=\""
          << num(bar) << "\" height=\"" << num(h) << "\" fill=\"" << colors[s] << "\"/>\n";
    }
    if (i % 2 == 0) {
      out << "<text x=\"" << num(kLeft + slot * static_cast<double>(i)) << "\" y=\""
          << kH - kBottom + 15 << "\" font-family=\"sans-serif\" font-size=\"10\">"
          << num(bins[i].low) << "</text>\n";
    }
  }
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 5
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "generalization performance (%)</text>\n";
  out << "<text x=\"12\" y=\"" << kTop + plot_h / 2 << "\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 12 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\">runs (max " << peak << ")</text>\n";
  out << "</svg>\n";
  return out.str();
}

json summary_doc(const Summary& s) {
  json bins = json::array();
  for (const auto& b : s.bins) bins.push_back({{"low", b.low}, {"high", b.high}, {"count", b.count}});
  return {{"ok", s.ok},         {"failed", s.failed},     {"mean", s.mean},
          {"median", s.median}, {"max", s.max},           {"above_80", s.above_80},
          {"above_90", s.above_90}, {"bins", std::move(bins)}};
}

}  // namespace

std::string histogram_csv(const Summary& s) {
  std::string out = "bin_low,bin_high,count\n";
  for (const auto& b : s.bins) {
    out += num(b.low) + "," + num(b.high) + "," + std::to_string(b.count) + "\n";
  }
  return out;
}

std::string histogram_svg(const Summary& s, const std::string& title) {
  std::vector<std::size_t> counts;
  for (const auto& b : s.bins) counts.push_back(b.count);
  return bar_svg(s.bins, {counts}, {"#4c72b0"}, title);
}

std::string summary_json(const Summary& s) { return summary_doc(s).dump(2); }

Comparison compare_inits(const std::vector<RunRecord>& a,
                         const std::vector<RunRecord>& b, double bin_width) {
  auto variant_of = [](const std::vector<RunRecord>& rs, const char* which) {
    if (rs.empty()) fail(ErrorCode::kInvalidArgument, std::string("result set ") + which + " is empty");
    for (const auto& r : rs) {
      if (r.variant != rs.front().variant) {
        fail(ErrorCode::kInvalidArgument, std::string("result set ") + which + " mixes variants");
      }
    }
    return rs.front().variant;
  };
  const std::string va = variant_of(a, "A");
  const std::string vb = variant_of(b, "B");
  if (va != vb) {
    fail(ErrorCode::kInvalidArgument, "mismatched variants: " + va + " vs " + vb);
  }
  return Comparison{aggregate(a, bin_width), aggregate(b, bin_width), va};
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "bin_low,bin_high,count_a,count_b\n";
  for (std::size_t i = 0; i < c.a.bins.size(); ++i) {
    out += num(c.a.bins[i].low) + "," + num(c.a.bins[i].high) + "," +
           std::to_string(c.a.bins[i].count) + "," + std::to_string(c.b.bins[i].count) + "\n";
  }
  return out;
}

std::string comparison_svg(const Comparison& c) {
  std::vector<std::size_t> ca, cb;
  for (const auto& x : c.a.bins) ca.push_back(x.count);
  for (const auto& x : c.b.bins) cb.push_back(x.count);
  return bar_svg(c.a.bins, {ca, cb}, {"#4c72b0", "#dd8452"}, "A (blue) vs B (orange): " + c.variant);
}

std::string comparison_json(const Comparison& c) {
  json doc = {{"variant", c.variant}, {"a", summary_doc(c.a)}, {"b", summary_doc(c.b)}};
  return doc.dump(2);
}

}  // namespace lutcomp
