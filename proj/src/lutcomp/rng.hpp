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

#ifndef LUTCOMP_RNG_HPP_
#define LUTCOMP_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace lutcomp {

// Identifies the generator algorithm and the derivation scheme below. Any
// change to either must bump this string, since task-set files and run
// records are only reproducible under the same version.
inline constexpr std::string_view kRngVersion = "mt19937_64+splitmix64/v1";

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for the named sub-stream `name` (e.g. "tasks", "init", "train") of a
// master seed. `index` separates per-run streams within a search.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                          std::uint64_t index = 0) noexcept;

// std::mt19937_64 is bit-specified by the standard, but the standard
// distributions are not, so the bounded draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, bound); unbiased by rejection. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform on [0, 1) with 53 random bits.
  double unit();

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool coin() { return (engine_() >> 63) != 0; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lutcomp

#endif  // LUTCOMP_RNG_HPP_
