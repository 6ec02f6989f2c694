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

#include "lutcomp/prompts.hpp"

#include "lutcomp/error.hpp"

namespace lutcomp {

namespace vocab {

int input_index(char c) {
  auto pos = kInputChars.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

int output_index(char c) {
  auto pos = kOutputChars.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

}  // namespace vocab

StepVector encode_step(char input_char, std::optional<char> prev_output) {
  StepVector v{};
  const int in = vocab::input_index(input_char);
  if (in < 0) {
    fail(ErrorCode::kInvalidArgument,
         std::string("input symbol not in vocabulary: '") + input_char + "'");
  }
  v[static_cast<std::size_t>(in)] = 1.0;
  if (prev_output) {
    const int out = vocab::output_index(*prev_output);
    if (out < 0) {
      fail(ErrorCode::kInvalidArgument,
           std::string("output symbol not in vocabulary: '") + *prev_output + "'");
    }
    v[static_cast<std::size_t>(vocab::kInputSize + out)] = 1.0;
  }
  return v;
}

std::vector<bool> Episode::loss_mask() const {
  std::vector<bool> mask(steps());
  for (std::size_t t = 0; t < steps(); ++t) mask[t] = target_ids[t] >= 0;
  return mask;
}

std::vector<StepVector> Episode::step_vectors() const {
  std::vector<StepVector> out;
  out.reserve(steps());
  for (std::size_t t = 0; t < steps(); ++t) {
    std::optional<char> prev;
    if (gold_prev[t] >= 0) prev = vocab::kOutputChars[static_cast<std::size_t>(gold_prev[t])];
    out.push_back(encode_step(vocab::kInputChars[static_cast<std::size_t>(input_ids[t])], prev));
  }
  return out;
}

std::string render_prompt(const TaskRef& task, const BitString& input) {
  return std::string(task.composed() ? "PC" : "NC") + task.codes + ":" +
         input.str() + ".";
}

ParsedPrompt parse_prompt(std::string_view text, int length, int num_codes) {
  auto is_code = [](char c) { return c >= 'a' && c <= 'z'; };
  if (text.size() < 2 || text[1] != 'C' || (text[0] != 'N' && text[0] != 'P')) {
    throw ParseError(ParseErrorKind::kMalformedPrefix,
                     "prompt must start with NC or PC: '" + std::string(text) + "'");
  }
  const bool composed = text[0] == 'P';
  std::size_t pos = 2;
  std::string codes;
  while (pos < text.size() && is_code(text[pos])) {
    const char c = text[pos];
    if (c - 'a' >= num_codes) {
      throw ParseError(ParseErrorKind::kUnknownCode,
                       std::string("unknown table code '") + c + "'");
    }
    codes.push_back(c);
    ++pos;
  }
  if (codes.empty() || (composed ? codes.size() < 2 : codes.size() != 1)) {
    throw ParseError(ParseErrorKind::kMalformedPrefix,
                     "wrong number of table codes in '" + std::string(text) + "'");
  }
  if (pos >= text.size() || text[pos] != ':') {
    throw ParseError(ParseErrorKind::kMalformedPrefix,
                     "expected ':' after table codes in '" + std::string(text) + "'");
  }
  ++pos;
  const std::size_t bits_begin = pos;
  while (pos < text.size() && (text[pos] == '0' || text[pos] == '1')) ++pos;
  const std::size_t nbits = pos - bits_begin;
  if (static_cast<int>(nbits) != length) {
    throw ParseError(ParseErrorKind::kWrongBitCount,
                     "expected " + std::to_string(length) + " bits, got " +
                         std::to_string(nbits));
  }
  if (pos >= text.size() || text[pos] != '.') {
    throw ParseError(ParseErrorKind::kMissingDot,
                     "prompt must end with '.': '" + std::string(text) + "'");
  }
  if (pos + 1 != text.size()) {
    throw ParseError(ParseErrorKind::kTrailingInput,
                     "characters after the final '.'");
  }
  return ParsedPrompt{TaskRef{codes},
                      BitString::parse(text.substr(bits_begin, nbits))};
}

std::string expected_output(const TaskRef& task, const TaskSet& set,
                            const BitString& input, bool final_output_only) {
  auto stages = apply_composition(task, set, input);
  if (final_output_only) return stages.back().str() + ".";
  return concat_stages(stages) + ".";
}

namespace {

Episode assemble(std::string prompt, std::string target, TaskRef task,
                 BitString input) {
  Episode ep;
  ep.prompt = std::move(prompt);
  ep.target = std::move(target);
  ep.task = std::move(task);
  ep.input = input;
  const std::size_t n = ep.prompt.size() + ep.target.size();
  ep.input_ids.reserve(n);
  ep.gold_prev.reserve(n);
  ep.target_ids.reserve(n);
  for (char c : ep.prompt) {
    const int id = vocab::input_index(c);
    if (id < 0 || id == vocab::kSpace) {
      fail(ErrorCode::kInvalidArgument,
           std::string("prompt symbol not allowed: '") + c + "'");
    }
    ep.input_ids.push_back(id);
    ep.gold_prev.push_back(-1);
    ep.target_ids.push_back(-1);
  }
  int prev = -1;
  for (char c : ep.target) {
    const int id = vocab::output_index(c);
    if (id < 0) {
      fail(ErrorCode::kInvalidArgument,
           std::string("target symbol not allowed: '") + c + "'");
    }
    ep.input_ids.push_back(vocab::kSpace);
    ep.gold_prev.push_back(prev);
    ep.target_ids.push_back(id);
    prev = id;
  }
  return ep;
}

}  // namespace

Episode build_episode(const TaskRef& task, const TaskSet& set,
                      const BitString& input, const EpisodeOptions& opts) {
  const TaskRef shown =
      opts.shown_codes.empty() ? task : TaskRef{opts.shown_codes};
  return assemble(render_prompt(shown, input),
                  expected_output(task, set, input, opts.final_output_only),
                  task, input);
}

Episode episode_from_strings(std::string_view prompt, std::string_view target,
                             int length) {
  ParsedPrompt parsed = parse_prompt(prompt, length);
  if (target.empty() || target.back() != '.') {
    fail(ErrorCode::kInvalidArgument, "target must end with '.'");
  }
  return assemble(std::string(prompt), std::string(target),
                  std::move(parsed.task), parsed.input);
}

std::string dump_episodes(const std::vector<Episode>& episodes) {
  std::string out;
  for (const auto& ep : episodes) out += ep.prompt + "\t" + ep.target + "\n";
  return out;
}

}  // namespace lutcomp
