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

// Binary checkpoint layout (all integers and floats little-endian):
//
//   char[8]  magic "LUTCKPT\0"
//   u32      format_version
//   u32 x4   input_dim, lstm_units, sigmoid_units, output_dim
//   u32      mask length (0 or sigmoid_units * lstm_units), then mask bytes
//   u32      tensor count (7), then per tensor in TensorId order:
//              u16 name length, name bytes, u32 rows, u32 cols,
//              rows*cols f64 row-major
//   u8       optimizer kind (0 adam, 1 sgd)
//   u64      optimizer step
//   f64 x4   lr, beta1, beta2, eps
//   u8       has moments; if 1, first then second moments per tensor
//   u32      metadata length, then UTF-8 JSON metadata
//   u32      CRC-32 of every preceding byte

#ifndef LUTCOMP_CHECKPOINT_HPP_
#define LUTCOMP_CHECKPOINT_HPP_

#include <string>

#include "lutcomp/net.hpp"

namespace lutcomp {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct Checkpoint {
  NetParams params;
  OptState opt;
  std::string meta;  // JSON text
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lutcomp

#endif  // LUTCOMP_CHECKPOINT_HPP_
