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

#include "lutcomp/tables.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/rng.hpp"

namespace lutcomp {
namespace {

constexpr int kMaxLength = 16;
constexpr int kMaxTables = 8;  // codes 'a'..'h'

// (2^length)! saturated at `cap`.
std::uint64_t permutation_count(int length, std::uint64_t cap) {
  std::uint64_t n = 1ULL << length;
  std::uint64_t acc = 1;
  for (std::uint64_t k = 2; k <= n; ++k) {
    acc *= k;
    if (acc >= cap) return cap;
  }
  return acc;
}

void check_length(int length) {
  if (length < 1 || length > kMaxLength) {
    fail(ErrorCode::kInvalidArgument,
         "bit-string length must be in [1, 16], got " + std::to_string(length));
  }
}

void append_tuples(const std::vector<char>& codes, int depth,
                   std::string& prefix, std::vector<TaskRef>& out) {
  if (static_cast<int>(prefix.size()) == depth) {
    out.push_back(TaskRef{prefix});
    return;
  }
  for (char c : codes) {
    prefix.push_back(c);
    append_tuples(codes, depth, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

BitString::BitString(std::uint32_t value, int length)
    : value_(value), length_(length) {
  check_length(length);
  if (value >= (1U << length)) {
    fail(ErrorCode::kInvalidArgument, "bit-string value out of range");
  }
}

BitString BitString::parse(std::string_view text) {
  if (text.empty() || static_cast<int>(text.size()) > kMaxLength) {
    fail(ErrorCode::kParse, "bad bit-string length: '" + std::string(text) + "'");
  }
  std::uint32_t v = 0;
  for (char c : text) {
    if (c != '0' && c != '1') {
      fail(ErrorCode::kParse, "not a bit string: '" + std::string(text) + "'");
    }
    v = (v << 1) | static_cast<std::uint32_t>(c - '0');
  }
  return BitString(v, static_cast<int>(text.size()));
}

std::string BitString::str() const {
  std::string s(static_cast<std::size_t>(length_), '0');
  for (int i = 0; i < length_; ++i) s[i] = bit(i) ? '1' : '0';
  return s;
}

LookupTable::LookupTable(char code, int length,
                         std::vector<std::uint32_t> outputs)
    : code_(code), length_(length), outputs_(std::move(outputs)) {
  check_length(length);
  if (outputs_.size() != (1U << length)) {
    fail(ErrorCode::kInvalidArgument, "table must list every input once");
  }
  std::vector<bool> seen(outputs_.size(), false);
  for (std::uint32_t o : outputs_) {
    if (o >= outputs_.size() || seen[o]) {
      fail(ErrorCode::kInvalidArgument,
           std::string("table '") + code + "' is not a bijection");
    }
    seen[o] = true;
  }
}

BitString LookupTable::apply(const BitString& input) const {
  if (input.length() != length_) {
    fail(ErrorCode::kInvalidArgument,
         "input length " + std::to_string(input.length()) +
             " does not match table length " + std::to_string(length_));
  }
  return BitString(outputs_[input.value()], length_);
}

TaskSet::TaskSet(std::uint64_t seed, int length,
                 std::vector<LookupTable> tables, int depth)
    : seed_(seed), length_(length), depth_(depth), tables_(std::move(tables)) {
  check_length(length);
  if (depth < 1) fail(ErrorCode::kInvalidArgument, "depth must be >= 1");
  if (tables_.empty() || tables_.size() > kMaxTables) {
    fail(ErrorCode::kInvalidArgument, "task set needs 1..8 tables");
  }
  std::vector<char> codes;
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    if (tables_[i].code() != static_cast<char>('a' + i) ||
        tables_[i].length() != length) {
      fail(ErrorCode::kInvalidArgument,
           "tables must be coded a, b, ... in order with a common length");
    }
    codes.push_back(tables_[i].code());
  }
  if (depth >= 2) {
    std::string prefix;
    append_tuples(codes, depth, prefix, composed_);
  }
}

bool TaskSet::has_code(char code) const {
  return code >= 'a' && code < static_cast<char>('a' + tables_.size());
}

const LookupTable& TaskSet::table(char code) const {
  if (!has_code(code)) {
    fail(ErrorCode::kInvalidArgument, std::string("unknown table code '") +
                                          code + "'");
  }
  return tables_[static_cast<std::size_t>(code - 'a')];
}

std::vector<TaskRef> TaskSet::atomic_tasks() const {
  std::vector<TaskRef> out;
  for (const auto& t : tables_) out.push_back(TaskRef::atomic(t.code()));
  return out;
}

bool Split::is_held_out(const TaskRef& task, const BitString& input) const {
  auto it = held_out.find(task);
  if (it == held_out.end()) return false;
  return std::find(it->second.begin(), it->second.end(), input) !=
         it->second.end();
}

std::size_t Split::item_count() const {
  std::size_t n = 0;
  for (const auto& [task, inputs] : held_out) n += inputs.size();
  return n;
}

std::vector<BitString> Split::trainable_inputs(const TaskRef& task,
                                               std::uint32_t domain_size,
                                               int length) const {
  std::vector<BitString> out;
  for (std::uint32_t v = 0; v < domain_size; ++v) {
    BitString x(v, length);
    if (!is_held_out(task, x)) out.push_back(x);
  }
  return out;
}

TaskSet generate_task_set(std::uint64_t seed, int num_tables, int length,
                          int depth) {
  check_length(length);
  if (num_tables < 1 || num_tables > kMaxTables) {
    fail(ErrorCode::kInvalidArgument, "num_tables must be in [1, 8]");
  }
  if (permutation_count(length, kMaxTables + 1) <
      static_cast<std::uint64_t>(num_tables)) {
    fail(ErrorCode::kInvalidArgument,
         "num_tables exceeds the number of distinct permutations");
  }
  Rng rng(derive_seed(seed, "tables"));
  const std::uint32_t n = 1U << length;
  std::vector<LookupTable> tables;
  while (static_cast<int>(tables.size()) < num_tables) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0U);
    rng.shuffle(std::span<std::uint32_t>(perm));
    const bool duplicate =
        std::any_of(tables.begin(), tables.end(),
                    [&](const LookupTable& t) { return t.outputs() == perm; });
    if (duplicate) continue;
    tables.emplace_back(static_cast<char>('a' + tables.size()), length,
                        std::move(perm));
  }
  return TaskSet(seed, length, std::move(tables), depth);
}

BitString apply_table(const LookupTable& table, const BitString& input) {
  return table.apply(input);
}

std::vector<BitString> apply_composition(const TaskRef& task,
                                         const TaskSet& set,
                                         const BitString& input) {
  if (task.codes.empty()) fail(ErrorCode::kInvalidArgument, "empty task");
  std::vector<BitString> stages;
  BitString x = input;
  for (char code : task.codes) {
    x = set.table(code).apply(x);
    stages.push_back(x);
  }
  return stages;
}

std::string concat_stages(const std::vector<BitString>& stages) {
  std::string out;
  for (const auto& s : stages) out += s.str();
  return out;
}

Split holdout_split(const TaskSet& set, int per_task, std::uint64_t seed) {
  if (per_task < 0 || static_cast<std::uint32_t>(per_task) >= set.domain_size()) {
    fail(ErrorCode::kInvalidArgument,
         "per_task must be smaller than the input domain");
  }
  Rng rng(derive_seed(seed, "holdout"));
  Split split;
  split.seed = seed;
  std::vector<std::uint32_t> inputs(set.domain_size());
  for (const auto& task : set.composed_tasks()) {
    std::iota(inputs.begin(), inputs.end(), 0U);
    rng.shuffle(std::span<std::uint32_t>(inputs));
    std::vector<BitString> chosen;
    for (int i = 0; i < per_task; ++i) {
      chosen.emplace_back(inputs[static_cast<std::size_t>(i)], set.length());
    }
    std::sort(chosen.begin(), chosen.end());
    split.held_out.emplace(task, std::move(chosen));
  }
  return split;
}

TaskSuite generate_suite(std::uint64_t seed, int per_task) {
  TaskSet set = generate_task_set(seed);
  Split split = holdout_split(set, per_task, seed);
  return TaskSuite{std::move(set), std::move(split)};
}

std::string serialize_suite(const TaskSuite& suite) {
  using nlohmann::json;
  const TaskSet& set = suite.tasks;
  json tables = json::object();
  for (const auto& t : set.tables()) {
    json outs = json::array();
    for (std::uint32_t o : t.outputs()) outs.push_back(BitString(o, t.length()).str());
    tables[std::string(1, t.code())] = std::move(outs);
  }
  json holdout = json::object();
  for (const auto& [task, inputs] : suite.split.held_out) {
    json xs = json::array();
    for (const auto& x : inputs) xs.push_back(x.str());
    holdout[task.codes] = std::move(xs);
  }
  json doc = {
      {"format_version", kTaskFileFormatVersion},
      {"seed", set.seed()},
      {"length", set.length()},
      {"tables", std::move(tables)},
      {"holdout", std::move(holdout)},
  };
  return doc.dump(2) + "\n";
}

TaskSuite parse_suite(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("task-set file is not JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kTaskFileFormatVersion) {
      fail(ErrorCode::kVersion,
           "unsupported task-set format_version " + std::to_string(version));
    }
    const auto seed = doc.at("seed").get<std::uint64_t>();
    const int length = doc.at("length").get<int>();
    std::vector<LookupTable> tables;
    for (const auto& [code, outs] : doc.at("tables").items()) {
      if (code.size() != 1) fail(ErrorCode::kFormat, "bad table code '" + code + "'");
      std::vector<std::uint32_t> mapping;
      for (const auto& o : outs) {
        BitString b = BitString::parse(o.get<std::string>());
        if (b.length() != length) fail(ErrorCode::kFormat, "table entry length mismatch");
        mapping.push_back(b.value());
      }
      tables.emplace_back(code[0], length, std::move(mapping));
    }
    const auto& holdout = doc.at("holdout");
    int depth = kDefaultDepth;
    if (!holdout.empty()) depth = static_cast<int>(holdout.begin().key().size());
    TaskSet set(seed, length, std::move(tables), depth);
    Split split;
    split.seed = seed;
    for (const auto& [codes, xs] : holdout.items()) {
      TaskRef task{codes};
      for (char c : codes) {
        if (!set.has_code(c)) fail(ErrorCode::kFormat, "holdout names unknown code");
      }
      std::vector<BitString> inputs;
      for (const auto& x : xs) inputs.push_back(BitString::parse(x.get<std::string>()));
      std::sort(inputs.begin(), inputs.end());
      split.held_out.emplace(std::move(task), std::move(inputs));
    }
    return TaskSuite{std::move(set), std::move(split)};
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed task-set file: ") + e.what());
  }
}

void save_suite(const std::string& path, const TaskSuite& suite) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << serialize_suite(suite);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

TaskSuite load_suite(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_suite(ss.str());
}

}  // namespace lutcomp
