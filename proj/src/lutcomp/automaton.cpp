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

#include "lutcomp/automaton.hpp"

#include "lutcomp/error.hpp"

namespace lutcomp {
namespace {

constexpr int kTableSlots = 8;
constexpr int kBits = 3;

[[noreturn]] void grammar_error(const std::string& what) {
  fail(ErrorCode::kInvalidArgument, "automaton: " + what);
}

int bit_of(char c) { return c == '0' ? 0 : c == '1' ? 1 : -1; }

void require_supported(const TaskSet& set) {
  if (set.length() != kBits || set.tables().size() > kTableSlots) {
    fail(ErrorCode::kInvalidArgument,
         "automaton supports 3-bit strings and at most 8 tables");
  }
}

}  // namespace

std::array<bool, kStateUnits> emission_units() {
  std::array<bool, kStateUnits> m{};
  for (int i = segment::kA; i < segment::kB; ++i) m[i] = true;
  for (int i = segment::kC; i < segment::kE; ++i) m[i] = true;
  return m;
}

StateVector AutomatonState::units() const {
  StateVector v{};
  if (a >= 0) v[segment::kA + a] = 1.0;
  if (b >= 0) v[segment::kB + b] = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (c[i] >= 0) v[segment::kC + 2 * i + c[i]] = 1.0;
  }
  if (d > 0) v[segment::kD + d - 1] = 1.0;
  for (int i = 0; i < 2; ++i) {
    if (e[i] >= 0) v[segment::kE + 2 * i + e[i]] = 1.0;
  }
  return v;
}

void AutomatonState::check_invariants() const {
  auto bad = [](const char* what) {
    fail(ErrorCode::kInternal, std::string("automaton invariant: ") + what);
  };
  if (a < -1 || a >= kTableSlots || b < -1 || b >= kTableSlots) bad("A/B range");
  if (d < 0 || d > 3) bad("D range");
  if (d > 0) {
    if (a < 0) bad("D set without A");
    for (int x : c) {
      if (x < 0) bad("D set with partial C");
    }
    int filled = (e[0] >= 0) + (e[1] >= 0);
    if (filled != d - 1 || (e[1] >= 0 && e[0] < 0)) bad("E must hold D-1 bits");
  } else if (e[0] >= 0 || e[1] >= 0) {
    bad("E populated while D is none");
  }
}

AutomatonState step(const AutomatonState& state, char input_char,
                    std::optional<char> prev_output) {
  AutomatonState s = state;
  switch (s.phase) {
    case Phase::kHeader:
      if (input_char == 'P' || input_char == 'N' || input_char == 'C') return s;
      if (input_char >= 'a' && input_char < 'a' + kTableSlots) {
        const int code = input_char - 'a';
        if (s.a < 0) {
          s.a = code;
        } else if (s.b < 0) {
          s.b = code;
        } else {
          grammar_error("more than two table codes (stack depth is 2)");
        }
        return s;
      }
      if (input_char == ':') {
        if (s.a < 0) grammar_error("':' before any table code");
        s.phase = Phase::kInput;
        return s;
      }
      grammar_error(std::string("unexpected '") + input_char + "' in prompt header");
    case Phase::kInput: {
      const int bit = bit_of(input_char);
      if (bit >= 0) {
        for (int& slot : s.c) {
          if (slot < 0) {
            slot = bit;
            return s;
          }
        }
        grammar_error("more than three input bits");
      }
      if (input_char == '.') {
        if (s.c[2] < 0) grammar_error("'.' before three input bits");
        s.d = 1;
        s.phase = Phase::kOutput;
        return s;
      }
      grammar_error(std::string("unexpected '") + input_char + "' in input bits");
    }
    case Phase::kOutput: {
      if (input_char != ' ') grammar_error("non-space input during output");
      if (!prev_output) return s;  // first output step
      if (s.d == 0) {
        if (*prev_output != '.') grammar_error("expected the terminating '.'");
        return AutomatonState{.phase = Phase::kDone};
      }
      const int bit = bit_of(*prev_output);
      if (bit < 0) grammar_error("expected an output bit as feedback");
      if (s.d < 3) {
        s.e[static_cast<std::size_t>(s.d - 1)] = bit;
        ++s.d;
      } else if (s.b >= 0) {
        s.a = s.b;
        s.b = -1;
        s.c = {s.e[0], s.e[1], bit};
        s.e = {-1, -1};
        s.d = 1;
      } else {
        s.e = {-1, -1};
        s.d = 0;
      }
      return s;
    }
    case Phase::kDone:
      if (input_char != ' ') grammar_error("input after the episode ended");
      return s;
  }
  grammar_error("unreachable phase");
}

char emit(const AutomatonState& state, const TaskSet& set) {
  if (state.phase != Phase::kOutput) {
    fail(ErrorCode::kInvalidArgument, "automaton emits only during output");
  }
  if (state.d == 0) return '.';
  const int value = (state.c[0] << 2) | (state.c[1] << 1) | state.c[2];
  const char code = static_cast<char>('a' + state.a);
  const BitString out =
      set.table(code).apply(BitString(static_cast<std::uint32_t>(value), kBits));
  return out.bit(state.d - 1) ? '1' : '0';
}

StateTrace trace_states(const Episode& episode) {
  StateTrace trace;
  trace.targets.reserve(episode.steps());
  trace.emitted.assign(episode.steps(), '\0');
  AutomatonState s;
  for (std::size_t t = 0; t < episode.steps(); ++t) {
    std::optional<char> prev;
    if (episode.gold_prev[t] >= 0) {
      prev = vocab::kOutputChars[static_cast<std::size_t>(episode.gold_prev[t])];
    }
    s = step(s, vocab::kInputChars[static_cast<std::size_t>(episode.input_ids[t])], prev);
    trace.targets.push_back(s.units());
  }
  return trace;
}

StateTrace trace_episode(const TaskRef& task, const TaskSet& set,
                         const BitString& input) {
  require_supported(set);
  if (task.depth() > 2) {
    fail(ErrorCode::kInvalidArgument, "automaton supports depth <= 2");
  }
  const Episode episode = build_episode(task, set, input);
  StateTrace trace;
  trace.targets.reserve(episode.steps());
  trace.emitted.assign(episode.steps(), '\0');
  AutomatonState s;
  for (std::size_t t = 0; t < episode.steps(); ++t) {
    std::optional<char> prev;
    if (episode.gold_prev[t] >= 0) {
      prev = vocab::kOutputChars[static_cast<std::size_t>(episode.gold_prev[t])];
    }
    s = step(s, vocab::kInputChars[static_cast<std::size_t>(episode.input_ids[t])], prev);
    s.check_invariants();
    trace.targets.push_back(s.units());
    if (episode.target_ids[t] >= 0) {
      const char out = emit(s, set);
      trace.emitted[t] = out;
      trace.output.push_back(out);
    }
  }
  if (trace.output != episode.target) {
    fail(ErrorCode::kInternal, "automaton output '" + trace.output +
                                   "' disagrees with tables '" +
                                   episode.target + "'");
  }
  return trace;
}

std::string oracle_answer(const std::string& prompt, const TaskSet& set) {
  require_supported(set);
  ParsedPrompt parsed = parse_prompt(prompt, set.length(),
                                     static_cast<int>(set.tables().size()));
  if (parsed.task.depth() > 2) {
    fail(ErrorCode::kInvalidArgument, "automaton supports depth <= 2");
  }
  AutomatonState s;
  for (char c : prompt) s = step(s, c, std::nullopt);
  std::string out;
  std::optional<char> prev;
  // Depth-2 answers are 7 characters; the bound only guards the loop.
  for (int i = 0; i < 16; ++i) {
    s = step(s, ' ', prev);
    const char c = emit(s, set);
    out.push_back(c);
    if (c == '.') break;
    prev = c;
  }
  return out;
}

std::string format_trace(const Episode& episode, const StateTrace& trace) {
  std::string out;
  for (std::size_t t = 0; t < episode.steps(); ++t) {
    const char in = vocab::kInputChars[static_cast<std::size_t>(episode.input_ids[t])];
    out.push_back(in == ' ' ? '_' : in);
    out.push_back('\t');
    const int prev = episode.gold_prev[t];
    out.push_back(prev < 0 ? '-' : vocab::kOutputChars[static_cast<std::size_t>(prev)]);
    out.push_back('\t');
    for (double u : trace.targets[t]) out.push_back(u > 0.5 ? '1' : '0');
    out.push_back('\t');
    out.push_back(trace.emitted[t] ? trace.emitted[t] : '-');
    out.push_back('\n');
  }
  return out;
}

}  // namespace lutcomp
