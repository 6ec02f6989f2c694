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

// Bit strings, bijective lookup tables and their compositions.
//
// A task set holds up to eight tables coded 'a'..'h' over all bit strings of
// one fixed length, plus every ordered tuple of those codes as a composed
// task. Codes in a composed task are listed in application order: "gc" means
// apply g, then c. The holdout split withholds a fixed number of inputs per
// composed task for zero-shot evaluation.

#ifndef LUTCOMP_TABLES_HPP_
#define LUTCOMP_TABLES_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lutcomp {

inline constexpr int kDefaultLength = 3;
inline constexpr int kDefaultNumTables = 8;
inline constexpr int kDefaultDepth = 2;
inline constexpr int kTaskFileFormatVersion = 1;

// A fixed-length string of bits, most significant (leftmost) bit first.
class BitString {
 public:
  BitString() = default;
  BitString(std::uint32_t value, int length);

  static BitString parse(std::string_view text);

  std::uint32_t value() const { return value_; }
  int length() const { return length_; }
  // Bit at position i, counted from the left.
  int bit(int i) const { return (value_ >> (length_ - 1 - i)) & 1U; }
  std::string str() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

 private:
  std::uint32_t value_ = 0;
  int length_ = 0;
};

class LookupTable {
 public:
  // outputs[v] is the image of the bit string with numeric value v.
  LookupTable(char code, int length, std::vector<std::uint32_t> outputs);

  char code() const { return code_; }
  int length() const { return length_; }
  std::size_t domain_size() const { return outputs_.size(); }
  const std::vector<std::uint32_t>& outputs() const { return outputs_; }

  BitString apply(const BitString& input) const;

  friend bool operator==(const LookupTable&, const LookupTable&) = default;

 private:
  char code_;
  int length_;
  std::vector<std::uint32_t> outputs_;
};

struct TaskRef {
  std::string codes;  // application order

  bool composed() const { return codes.size() > 1; }
  std::size_t depth() const { return codes.size(); }

  static TaskRef atomic(char code) { return TaskRef{std::string(1, code)}; }

  friend bool operator==(const TaskRef&, const TaskRef&) = default;
  friend auto operator<=>(const TaskRef&, const TaskRef&) = default;
};

class TaskSet {
 public:
  TaskSet(std::uint64_t seed, int length, std::vector<LookupTable> tables,
          int depth = kDefaultDepth);

  std::uint64_t seed() const { return seed_; }
  int length() const { return length_; }
  int depth() const { return depth_; }
  std::uint32_t domain_size() const { return 1U << length_; }

  const std::vector<LookupTable>& tables() const { return tables_; }
  const LookupTable& table(char code) const;
  bool has_code(char code) const;

  std::vector<TaskRef> atomic_tasks() const;
  // All ordered depth-tuples of codes, lexicographic.
  const std::vector<TaskRef>& composed_tasks() const { return composed_; }

  friend bool operator==(const TaskSet& a, const TaskSet& b) {
    return a.seed_ == b.seed_ && a.length_ == b.length_ &&
           a.depth_ == b.depth_ && a.tables_ == b.tables_;
  }

 private:
  std::uint64_t seed_;
  int length_;
  int depth_;
  std::vector<LookupTable> tables_;
  std::vector<TaskRef> composed_;
};

struct Split {
  std::uint64_t seed = 0;
  // Held-out inputs per composed task, sorted ascending.
  std::map<TaskRef, std::vector<BitString>> held_out;

  bool is_held_out(const TaskRef& task, const BitString& input) const;
  std::size_t item_count() const;
  // Inputs of `task` that may appear in training.
  std::vector<BitString> trainable_inputs(const TaskRef& task,
                                          std::uint32_t domain_size,
                                          int length) const;

  friend bool operator==(const Split&, const Split&) = default;
};

// A task set together with its evaluation split, as stored on disk.
struct TaskSuite {
  TaskSet tasks;
  Split split;
};

TaskSet generate_task_set(std::uint64_t seed,
                          int num_tables = kDefaultNumTables,
                          int length = kDefaultLength,
                          int depth = kDefaultDepth);

BitString apply_table(const LookupTable& table, const BitString& input);

// Output of each stage in application order; the last element is the answer.
std::vector<BitString> apply_composition(const TaskRef& task,
                                         const TaskSet& set,
                                         const BitString& input);

std::string concat_stages(const std::vector<BitString>& stages);

Split holdout_split(const TaskSet& set, int per_task, std::uint64_t seed);

// Generates the task set and its split from one seed.
TaskSuite generate_suite(std::uint64_t seed, int per_task = 2);

std::string serialize_suite(const TaskSuite& suite);
TaskSuite parse_suite(std::string_view json_text);
void save_suite(const std::string& path, const TaskSuite& suite);
TaskSuite load_suite(const std::string& path);

}  // namespace lutcomp

#endif  // LUTCOMP_TABLES_HPP_
