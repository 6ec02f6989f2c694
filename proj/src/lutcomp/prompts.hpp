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

// Prompt rendering/parsing and the per-step input encoding.
//
// An episode is read one character per step. The prompt ("NCg:001." or
// "PCgc:001.") is fed first with no loss; then one step per target character
// is fed with the space symbol as input. Each step's input vector is the
// one-hot input character (16 slots) followed by the previous output
// character (4 slots). The previous-output block is all zeros while nothing
// has been emitted yet.

#ifndef LUTCOMP_PROMPTS_HPP_
#define LUTCOMP_PROMPTS_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lutcomp/tables.hpp"

namespace lutcomp {

namespace vocab {

inline constexpr std::string_view kInputChars = "PNCabcdefgh01:. ";
inline constexpr std::string_view kOutputChars = "01.";
inline constexpr int kInputSize = 16;
inline constexpr int kOutputSize = 3;
inline constexpr int kPrevSlots = 4;  // output chars + null slot
inline constexpr int kStepDim = kInputSize + kPrevSlots;
inline constexpr int kSpace = 15;
inline constexpr int kDot = 2;  // output index

// -1 when the character is not in the vocabulary.
int input_index(char c);
int output_index(char c);

}  // namespace vocab

using StepVector = std::array<double, vocab::kStepDim>;

// prev_output is an output index, or nullopt for "nothing emitted yet".
StepVector encode_step(char input_char, std::optional<char> prev_output);

struct Episode {
  std::string prompt;
  std::string target;
  TaskRef task;  // the task actually computed
  BitString input;

  // Per step: input-vocabulary index, gold previous-output index (-1 when
  // null), and target output index (-1 on reading steps).
  std::vector<int> input_ids;
  std::vector<int> gold_prev;
  std::vector<int> target_ids;

  std::size_t reading_steps() const { return prompt.size(); }
  std::size_t steps() const { return input_ids.size(); }
  std::vector<bool> loss_mask() const;
  std::vector<StepVector> step_vectors() const;
};

std::string render_prompt(const TaskRef& task, const BitString& input);

struct ParsedPrompt {
  TaskRef task;
  BitString input;
};

// num_codes limits the accepted table codes to 'a' .. 'a'+num_codes-1.
ParsedPrompt parse_prompt(std::string_view text, int length = kDefaultLength,
                          int num_codes = kDefaultNumTables);

std::string expected_output(const TaskRef& task, const TaskSet& set,
                            const BitString& input,
                            bool final_output_only = false);

struct EpisodeOptions {
  bool final_output_only = false;
  // Codes shown in the prompt in place of the task's own codes (prompt
  // obfuscation variants). Empty means the task's codes.
  std::string shown_codes;
};

Episode build_episode(const TaskRef& task, const TaskSet& set,
                      const BitString& input, const EpisodeOptions& opts = {});

// Episode for an explicit prompt/target pair; the target need not come from
// any table.
Episode episode_from_strings(std::string_view prompt, std::string_view target,
                             int length = kDefaultLength);

// One "prompt\ttarget" line per episode.
std::string dump_episodes(const std::vector<Episode>& episodes);

}  // namespace lutcomp

#endif  // LUTCOMP_PROMPTS_HPP_
