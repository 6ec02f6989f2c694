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

// LSTM -> sigmoid -> softmax network with exact backpropagation through time.
//
//   z_t  = W_in x_t + W_rec h_{t-1} + b        (gate rows: input, forget,
//   c_t  = f * c_{t-1} + i * g                  cell, output; H rows each)
//   h_t  = o * tanh(c_t)
//   s_t  = sigmoid(W_hid h_t + b_hid)
//   p_t  = softmax(W_out s_t + b_out)
//
// x_t has at most two active entries (input char, previous output) so the
// input multiply is a column gather. All arithmetic is double precision and
// single-threaded, which makes results bit-reproducible for a given build.

#ifndef LUTCOMP_NET_HPP_
#define LUTCOMP_NET_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lutcomp/automaton.hpp"
#include "lutcomp/prompts.hpp"

namespace lutcomp {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct NetConfig {
  int input_dim = vocab::kStepDim;
  int lstm_units = 60;
  int sigmoid_units = 10;
  int output_dim = vocab::kOutputSize;
  // Empty, or sigmoid_units x lstm_units row-major 0/1 pattern over the
  // lstm -> sigmoid weights.
  std::vector<std::uint8_t> mask;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Mask letting every sigmoid unit read only segments A, C and D.
std::vector<std::uint8_t> emission_mask(int sigmoid_units);

enum TensorId : int {
  kLstmInput = 0,
  kLstmRecurrent,
  kLstmBias,
  kHiddenWeight,
  kHiddenBias,
  kOutputWeight,
  kOutputBias,
  kNumTensors,
};

const char* tensor_name(TensorId id);

// Tensors in checkpoint order. Also used for gradients and optimizer moments.
struct ParamSet {
  std::array<Mat, kNumTensors> t;

  static ParamSet zeros_like(const NetConfig& config);
  void set_zero();
  std::size_t size() const;
  bool all_finite() const;
  friend bool operator==(const ParamSet& a, const ParamSet& b);
};

struct NetParams {
  NetConfig config;
  ParamSet p;

  Mat& operator[](TensorId id) { return p.t[id]; }
  const Mat& operator[](TensorId id) const { return p.t[id]; }
  void apply_mask();
  friend bool operator==(const NetParams&, const NetParams&) = default;
};

NetParams init_params(std::uint64_t seed, const NetConfig& config);

// Which tensors receive gradients / updates.
using TrainableSet = std::array<bool, kNumTensors>;
inline constexpr TrainableSet kAllTrainable = {true, true, true, true,
                                               true, true, true};
inline constexpr TrainableSet kLstmOnly = {true, true, true, false,
                                           false, false, false};
inline constexpr TrainableSet kHeadOnly = {false, false, false, true,
                                           true, true, true};

enum class Feedback { kGold, kModel };

// Per-step activations, kept for the backward pass.
struct ForwardCache {
  int steps = 0;
  Mat gates;   // steps x 4H, post-activation
  Mat cell;    // steps x H
  Mat tanh_c;  // steps x H
  Mat hidden;  // steps x H
  Mat sig;     // steps x S
  Mat probs;   // steps x O
  std::vector<int> prev;  // previous-output index actually fed
  std::vector<int> argmax;

  void resize(int steps, const NetConfig& config);
};

struct ForwardResult {
  Mat hidden;  // steps x H
  Mat probs;   // steps x O
  std::string emitted;  // argmax symbols on output steps
};

void forward_into(const NetParams& params, const Episode& episode,
                  Feedback feedback, ForwardCache& cache);
ForwardResult forward(const NetParams& params, const Episode& episode,
                      Feedback feedback);

// Free-running answer: reads the prompt, then emits until '.' or until
// `max_outputs` characters.
std::string generate(const NetParams& params, const std::string& prompt,
                     std::size_t max_outputs);
inline std::size_t output_cap(std::size_t target_length) {
  return 2 * target_length + 4;
}

struct LossSpec {
  enum class Kind { kCrossEntropy, kHiddenMse };
  Kind kind = Kind::kCrossEntropy;
  // Required for kHiddenMse; must match lstm_units and the episode length.
  const StateTrace* trace = nullptr;

  static LossSpec cross_entropy() { return {}; }
  static LossSpec hidden_mse(const StateTrace& t) {
    return LossSpec{Kind::kHiddenMse, &t};
  }
};

struct StepOutcome {
  double loss = 0.0;
  // All output-step argmaxes matched the target under gold feedback, which
  // is equivalent to a correct free-running answer.
  bool correct = false;
};

// Loss of one episode under gold feedback. Cross-entropy is the mean over
// output steps; hidden MSE is the mean over all steps and units.
double episode_loss(const NetParams& params, const Episode& episode,
                    const LossSpec& loss);

// Forward + BPTT. Gradients are accumulated into `grads` (not cleared).
StepOutcome bptt(const NetParams& params, const Episode& episode,
                 const LossSpec& loss, const TrainableSet& trainable,
                 ParamSet& grads, ForwardCache& cache);

enum class OptimizerKind { kAdam, kSgd };

struct OptState {
  OptimizerKind kind = OptimizerKind::kAdam;
  std::uint64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  ParamSet m;
  ParamSet v;

  static OptState make(const NetConfig& config, OptimizerKind kind, double lr);
  friend bool operator==(const OptState&, const OptState&) = default;
};

const char* optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

// One optimizer step on the trainable tensors, then re-applies the mask.
// Throws Error(kNumeric) on a non-finite gradient, leaving params untouched.
void update(NetParams& params, const ParamSet& grads, OptState& opt,
            const TrainableSet& trainable);

}  // namespace lutcomp

#endif  // LUTCOMP_NET_HPP_
