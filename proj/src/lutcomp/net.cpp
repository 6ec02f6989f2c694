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

#include "lutcomp/net.hpp"

#include <cmath>

#include "lutcomp/error.hpp"
#include "lutcomp/rng.hpp"

namespace lutcomp {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool is_bias(int id) {
  return id == kLstmBias || id == kHiddenBias || id == kOutputBias;
}

std::array<std::pair<int, int>, kNumTensors> shapes(const NetConfig& c) {
  const int h = c.lstm_units;
  return {{{4 * h, c.input_dim},
           {4 * h, h},
           {4 * h, 1},
           {c.sigmoid_units, h},
           {c.sigmoid_units, 1},
           {c.output_dim, c.sigmoid_units},
           {c.output_dim, 1}}};
}

int argmax_of(const double* p, int n) {
  int best = 0;
  for (int k = 1; k < n; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

// One recurrent step plus the output head. Buffers are owned by the caller so
// the hot loop does not allocate.
struct StepBuffers {
  Vec z, c, h, tc, s, logits;

  explicit StepBuffers(const NetConfig& cfg)
      : z(4 * cfg.lstm_units),
        c(cfg.lstm_units),
        h(cfg.lstm_units),
        tc(cfg.lstm_units),
        s(cfg.sigmoid_units),
        logits(cfg.output_dim) {}
};

void lstm_step(const NetParams& net, int input_id, int prev_id,
               const Vec& h_prev, const Vec& c_prev, StepBuffers& b) {
  const int hu = net.config.lstm_units;
  b.z.noalias() = net[kLstmRecurrent] * h_prev;
  b.z += net[kLstmBias].col(0);
  b.z += net[kLstmInput].col(input_id);
  if (prev_id >= 0) b.z += net[kLstmInput].col(vocab::kInputSize + prev_id);
  for (int k = 0; k < hu; ++k) {
    const double i = sigmoid(b.z[k]);
    const double f = sigmoid(b.z[hu + k]);
    const double g = std::tanh(b.z[2 * hu + k]);
    const double o = sigmoid(b.z[3 * hu + k]);
    b.z[k] = i;
    b.z[hu + k] = f;
    b.z[2 * hu + k] = g;
    b.z[3 * hu + k] = o;
    b.c[k] = f * c_prev[k] + i * g;
    b.tc[k] = std::tanh(b.c[k]);
    b.h[k] = o * b.tc[k];
  }
}

// Writes softmax probabilities into `probs` (length output_dim).
void head_step(const NetParams& net, StepBuffers& b, double* probs) {
  b.s.noalias() = net[kHiddenWeight] * b.h;
  b.s += net[kHiddenBias].col(0);
  for (Eigen::Index k = 0; k < b.s.size(); ++k) b.s[k] = sigmoid(b.s[k]);
  b.logits.noalias() = net[kOutputWeight] * b.s;
  b.logits += net[kOutputBias].col(0);
  const double mx = b.logits.maxCoeff();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < b.logits.size(); ++k) {
    probs[k] = std::exp(b.logits[k] - mx);
    sum += probs[k];
  }
  for (Eigen::Index k = 0; k < b.logits.size(); ++k) probs[k] /= sum;
}

}  // namespace

void NetConfig::validate() const {
  if (input_dim != vocab::kStepDim || lstm_units <= 0 || sigmoid_units <= 0 ||
      output_dim != vocab::kOutputSize) {
    fail(ErrorCode::kInvalidArgument, "invalid network dimensions");
  }
  if (!mask.empty() &&
      mask.size() != static_cast<std::size_t>(sigmoid_units * lstm_units)) {
    fail(ErrorCode::kInvalidArgument, "mask shape must be sigmoid x lstm units");
  }
}

std::vector<std::uint8_t> emission_mask(int sigmoid_units) {
  const auto units = emission_units();
  std::vector<std::uint8_t> mask;
  mask.reserve(static_cast<std::size_t>(sigmoid_units * kStateUnits));
  for (int r = 0; r < sigmoid_units; ++r) {
    for (bool u : units) mask.push_back(u ? 1 : 0);
  }
  return mask;
}

const char* tensor_name(TensorId id) {
  static constexpr const char* kNames[kNumTensors] = {
      "lstm.w_input",  "lstm.w_recurrent", "lstm.bias",   "hidden.weight",
      "hidden.bias",   "output.weight",    "output.bias",
  };
  return kNames[id];
}

ParamSet ParamSet::zeros_like(const NetConfig& config) {
  ParamSet ps;
  const auto sh = shapes(config);
  for (int i = 0; i < kNumTensors; ++i) {
    ps.t[i] = Mat::Zero(sh[i].first, sh[i].second);
  }
  return ps;
}

void ParamSet::set_zero() {
  for (auto& m : t) m.setZero();
}

std::size_t ParamSet::size() const {
  std::size_t n = 0;
  for (const auto& m : t) n += static_cast<std::size_t>(m.size());
  return n;
}

bool ParamSet::all_finite() const {
  for (const auto& m : t) {
    if (!m.allFinite()) return false;
  }
  return true;
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  for (int i = 0; i < kNumTensors; ++i) {
    if (a.t[i].rows() != b.t[i].rows() || a.t[i].cols() != b.t[i].cols()) {
      return false;
    }
    if (!std::equal(a.t[i].data(), a.t[i].data() + a.t[i].size(), b.t[i].data())) {
      return false;
    }
  }
  return true;
}

void NetParams::apply_mask() {
  if (config.mask.empty()) return;
  Mat& w = p.t[kHiddenWeight];
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!config.mask[static_cast<std::size_t>(i)]) w.data()[i] = 0.0;
  }
}

NetParams init_params(std::uint64_t seed, const NetConfig& config) {
  config.validate();
  NetParams net{config, ParamSet::zeros_like(config)};
  Rng rng(seed);
  for (int i = 0; i < kNumTensors; ++i) {
    if (is_bias(i)) continue;
    Mat& m = net.p.t[i];
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-0.1, 0.1);
  }
  net.apply_mask();
  return net;
}

void ForwardCache::resize(int n, const NetConfig& cfg) {
  steps = n;
  const int h = cfg.lstm_units;
  gates.resize(n, 4 * h);
  cell.resize(n, h);
  tanh_c.resize(n, h);
  hidden.resize(n, h);
  sig.resize(n, cfg.sigmoid_units);
  probs.resize(n, cfg.output_dim);
  prev.assign(static_cast<std::size_t>(n), -1);
  argmax.assign(static_cast<std::size_t>(n), -1);
}

void forward_into(const NetParams& params, const Episode& episode,
                  Feedback feedback, ForwardCache& cache) {
  const NetConfig& cfg = params.config;
  const int n = static_cast<int>(episode.steps());
  cache.resize(n, cfg);
  StepBuffers b(cfg);
  Vec h_prev = Vec::Zero(cfg.lstm_units);
  Vec c_prev = Vec::Zero(cfg.lstm_units);
  for (int t = 0; t < n; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    int prev = episode.gold_prev[ts];
    if (feedback == Feedback::kModel && prev >= 0) prev = cache.argmax[ts - 1];
    cache.prev[ts] = prev;
    lstm_step(params, episode.input_ids[ts], prev, h_prev, c_prev, b);
    double* probs = cache.probs.row(t).data();
    head_step(params, b, probs);
    cache.gates.row(t) = b.z.transpose();
    cache.cell.row(t) = b.c.transpose();
    cache.tanh_c.row(t) = b.tc.transpose();
    cache.hidden.row(t) = b.h.transpose();
    cache.sig.row(t) = b.s.transpose();
    cache.argmax[ts] = argmax_of(probs, cfg.output_dim);
    h_prev = b.h;
    c_prev = b.c;
  }
}

ForwardResult forward(const NetParams& params, const Episode& episode,
                      Feedback feedback) {
  if (episode.steps() == 0) fail(ErrorCode::kInvalidArgument, "empty episode");
  ForwardCache cache;
  forward_into(params, episode, feedback, cache);
  ForwardResult r{cache.hidden, cache.probs, {}};
  for (std::size_t t = 0; t < episode.steps(); ++t) {
    if (episode.target_ids[t] >= 0) {
      r.emitted.push_back(vocab::kOutputChars[static_cast<std::size_t>(cache.argmax[t])]);
    }
  }
  return r;
}

std::string generate(const NetParams& params, const std::string& prompt,
                     std::size_t max_outputs) {
  const NetConfig& cfg = params.config;
  StepBuffers b(cfg);
  Vec h_prev = Vec::Zero(cfg.lstm_units);
  Vec c_prev = Vec::Zero(cfg.lstm_units);
  std::array<double, vocab::kOutputSize> probs{};
  for (char ch : prompt) {
    const int id = vocab::input_index(ch);
    if (id < 0) fail(ErrorCode::kInvalidArgument, "prompt symbol outside vocabulary");
    lstm_step(params, id, -1, h_prev, c_prev, b);
    h_prev.swap(b.h);
    c_prev.swap(b.c);
  }
  std::string out;
  int prev = -1;
  while (out.size() < max_outputs) {
    lstm_step(params, vocab::kSpace, prev, h_prev, c_prev, b);
    head_step(params, b, probs.data());
    prev = argmax_of(probs.data(), cfg.output_dim);
    out.push_back(vocab::kOutputChars[static_cast<std::size_t>(prev)]);
    if (prev == vocab::kDot) break;
    h_prev.swap(b.h);
    c_prev.swap(b.c);
  }
  return out;
}

namespace {

void check_loss_inputs(const NetParams& params, const Episode& episode,
                       const LossSpec& loss) {
  if (episode.steps() == 0) fail(ErrorCode::kInvalidArgument, "empty episode");
  if (loss.kind == LossSpec::Kind::kHiddenMse) {
    if (loss.trace == nullptr || loss.trace->targets.size() != episode.steps()) {
      fail(ErrorCode::kInvalidArgument, "state trace does not match episode length");
    }
    if (params.config.lstm_units != kStateUnits) {
      fail(ErrorCode::kInvalidArgument, "hidden supervision needs 29 LSTM units");
    }
  }
}

double loss_from_cache(const Episode& episode, const LossSpec& loss,
                       const ForwardCache& cache, bool* correct) {
  const int n = cache.steps;
  double total = 0.0;
  bool ok = true;
  int outputs = 0;
  for (int t = 0; t < n; ++t) {
    const int y = episode.target_ids[static_cast<std::size_t>(t)];
    if (y < 0) continue;
    ++outputs;
    if (cache.argmax[static_cast<std::size_t>(t)] != y) ok = false;
    if (loss.kind == LossSpec::Kind::kCrossEntropy) total -= std::log(cache.probs(t, y));
  }
  if (correct) *correct = ok && outputs > 0;
  if (loss.kind == LossSpec::Kind::kCrossEntropy) return outputs ? total / outputs : 0.0;
  double sq = 0.0;
  for (int t = 0; t < n; ++t) {
    const auto& y = loss.trace->targets[static_cast<std::size_t>(t)];
    for (int k = 0; k < kStateUnits; ++k) {
      const double d = cache.hidden(t, k) - y[static_cast<std::size_t>(k)];
      sq += d * d;
    }
  }
  return sq / (static_cast<double>(n) * kStateUnits);
}

}  // namespace

double episode_loss(const NetParams& params, const Episode& episode,
                    const LossSpec& loss) {
  check_loss_inputs(params, episode, loss);
  ForwardCache cache;
  forward_into(params, episode, Feedback::kGold, cache);
  return loss_from_cache(episode, loss, cache, nullptr);
}

StepOutcome bptt(const NetParams& params, const Episode& episode,
                 const LossSpec& loss, const TrainableSet& trainable,
                 ParamSet& grads, ForwardCache& cache) {
  check_loss_inputs(params, episode, loss);
  const NetConfig& cfg = params.config;
  const int n = static_cast<int>(episode.steps());
  const int hu = cfg.lstm_units;
  forward_into(params, episode, Feedback::kGold, cache);
  StepOutcome outcome;
  outcome.loss = loss_from_cache(episode, loss, cache, &outcome.correct);

  const bool lstm_trainable =
      trainable[kLstmInput] || trainable[kLstmRecurrent] || trainable[kLstmBias];
  Mat dh_out = Mat::Zero(n, hu);

  if (loss.kind == LossSpec::Kind::kCrossEntropy) {
    int outputs = 0;
    for (int t = 0; t < n; ++t) outputs += episode.target_ids[static_cast<std::size_t>(t)] >= 0;
    const double scale = 1.0 / outputs;
    Vec dlogits(cfg.output_dim), ds(cfg.sigmoid_units);
    for (int t = 0; t < n; ++t) {
      const int y = episode.target_ids[static_cast<std::size_t>(t)];
      if (y < 0) continue;
      dlogits = cache.probs.row(t).transpose();
      dlogits[y] -= 1.0;
      dlogits *= scale;
      const auto s = cache.sig.row(t).transpose();
      if (trainable[kOutputWeight]) grads.t[kOutputWeight].noalias() += dlogits * s.transpose();
      if (trainable[kOutputBias]) grads.t[kOutputBias].col(0) += dlogits;
      ds.noalias() = params[kOutputWeight].transpose() * dlogits;
      ds.array() *= s.array() * (1.0 - s.array());
      if (trainable[kHiddenWeight]) {
        grads.t[kHiddenWeight].noalias() += ds * cache.hidden.row(t);
      }
      if (trainable[kHiddenBias]) grads.t[kHiddenBias].col(0) += ds;
      if (lstm_trainable) {
        dh_out.row(t).noalias() += (params[kHiddenWeight].transpose() * ds).transpose();
      }
    }
  } else {
    const double scale = 2.0 / (static_cast<double>(n) * kStateUnits);
    for (int t = 0; t < n; ++t) {
      const auto& y = loss.trace->targets[static_cast<std::size_t>(t)];
      for (int k = 0; k < hu; ++k) {
        dh_out(t, k) = scale * (cache.hidden(t, k) - y[static_cast<std::size_t>(k)]);
      }
    }
  }

  if (!lstm_trainable) return outcome;

  Vec dh_next = Vec::Zero(hu), dc_next = Vec::Zero(hu), dz(4 * hu);
  for (int t = n - 1; t >= 0; --t) {
    const auto g = cache.gates.row(t);
    const auto tc = cache.tanh_c.row(t);
    for (int k = 0; k < hu; ++k) {
      const double dh = dh_out(t, k) + dh_next[k];
      const double i = g[k], f = g[hu + k], gg = g[2 * hu + k], o = g[3 * hu + k];
      const double c_prev = t > 0 ? cache.cell(t - 1, k) : 0.0;
      const double dc = dh * o * (1.0 - tc[k] * tc[k]) + dc_next[k];
      dz[k] = dc * gg * i * (1.0 - i);
      dz[hu + k] = dc * c_prev * f * (1.0 - f);
      dz[2 * hu + k] = dc * i * (1.0 - gg * gg);
      dz[3 * hu + k] = dh * tc[k] * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    if (trainable[kLstmInput]) {
      Mat& w = grads.t[kLstmInput];
      w.col(episode.input_ids[static_cast<std::size_t>(t)]) += dz;
      const int prev = cache.prev[static_cast<std::size_t>(t)];
      if (prev >= 0) w.col(vocab::kInputSize + prev) += dz;
    }
    if (trainable[kLstmBias]) grads.t[kLstmBias].col(0) += dz;
    if (t > 0) {
      if (trainable[kLstmRecurrent]) {
        grads.t[kLstmRecurrent].noalias() += dz * cache.hidden.row(t - 1);
      }
      dh_next.noalias() = params[kLstmRecurrent].transpose() * dz;
    }
  }
  return outcome;
}

OptState OptState::make(const NetConfig& config, OptimizerKind kind, double lr) {
  OptState s;
  s.kind = kind;
  s.lr = lr;
  if (kind == OptimizerKind::kAdam) {
    s.m = ParamSet::zeros_like(config);
    s.v = ParamSet::zeros_like(config);
  }
  return s;
}

const char* optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

void update(NetParams& params, const ParamSet& grads, OptState& opt,
            const TrainableSet& trainable) {
  for (int i = 0; i < kNumTensors; ++i) {
    if (trainable[i] && !grads.t[i].allFinite()) {
      fail(ErrorCode::kNumeric,
           std::string("non-finite gradient in ") + tensor_name(static_cast<TensorId>(i)));
    }
  }
  ++opt.step;
  if (opt.kind == OptimizerKind::kSgd) {
    for (int i = 0; i < kNumTensors; ++i) {
      if (trainable[i]) params.p.t[i] -= opt.lr * grads.t[i];
    }
  } else {
    const double t = static_cast<double>(opt.step);
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (int i = 0; i < kNumTensors; ++i) {
      if (!trainable[i]) continue;
      auto m = opt.m.t[i].array();
      auto v = opt.v.t[i].array();
      const auto g = grads.t[i].array();
      m = opt.beta1 * m + (1.0 - opt.beta1) * g;
      v = opt.beta2 * v + (1.0 - opt.beta2) * g.square();
      params.p.t[i].array() -= opt.lr * (m / c1) / ((v / c2).sqrt() + opt.eps);
    }
  }
  params.apply_mask();
}

}  // namespace lutcomp
