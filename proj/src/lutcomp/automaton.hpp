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

// Finite-state solution of depth-2 composition over 3-bit tables.
//
// The state is a 29-unit binary vector split into five blocks:
//
//   A [0, 8)    current table, one-hot over a..h
//   B [8, 16)   next table (the second slot of a two-entry call stack)
//   C [16, 22)  input of the current table, three 2-unit one-hot bits
//   D [22, 25)  which output bit to produce next; all zeros means none
//   E [25, 29)  bits already emitted for the current table, two 2-unit slots
//
// Emitted bits reach the state one step later, through the previous-output
// input slot, so the automaton sees exactly what a recurrent network sees.
// The output at each step is a function of A, C and D only.

#ifndef LUTCOMP_AUTOMATON_HPP_
#define LUTCOMP_AUTOMATON_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lutcomp/prompts.hpp"
#include "lutcomp/tables.hpp"

namespace lutcomp {

inline constexpr int kStateUnits = 29;

namespace segment {
inline constexpr int kA = 0;
inline constexpr int kB = 8;
inline constexpr int kC = 16;
inline constexpr int kD = 22;
inline constexpr int kE = 25;
}  // namespace segment

using StateVector = std::array<double, kStateUnits>;

// Which units the emission layer reads: A, C and D (17 of 29).
std::array<bool, kStateUnits> emission_units();

enum class Phase { kHeader, kInput, kOutput, kDone };

struct AutomatonState {
  int a = -1;  // table index, -1 empty
  int b = -1;
  std::array<int, 3> c{-1, -1, -1};
  int d = 0;  // 0 none, else 1-based output position
  std::array<int, 2> e{-1, -1};
  // Grammar position; not part of the unit vector.
  Phase phase = Phase::kHeader;

  StateVector units() const;
  void check_invariants() const;

  friend bool operator==(const AutomatonState&, const AutomatonState&) = default;
};

AutomatonState step(const AutomatonState& state, char input_char,
                    std::optional<char> prev_output);

char emit(const AutomatonState& state, const TaskSet& set);

struct StateTrace {
  std::vector<StateVector> targets;  // one per episode step
  std::vector<char> emitted;         // per step; '\0' on reading steps
  std::string output;                // emitted output string
};

// Follows the episode with gold feedback; `output` stays empty because no
// tables are consulted.
StateTrace trace_states(const Episode& episode);

// Full oracle run; the emitted string is checked against the tables.
StateTrace trace_episode(const TaskRef& task, const TaskSet& set,
                         const BitString& input);

// Free-running answer to a prompt, feeding back the automaton's own output.
std::string oracle_answer(const std::string& prompt, const TaskSet& set);

// One line per step: input, previous output, 29 target bits, emitted char.
// Space renders as '_', a null previous output and silent steps as '-'.
std::string format_trace(const Episode& episode, const StateTrace& trace);

}  // namespace lutcomp

#endif  // LUTCOMP_AUTOMATON_HPP_
