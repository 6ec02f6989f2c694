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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lutcomp/automaton.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/rng.hpp"
#include "test_support.hpp"

namespace {

using ::lutcomp::BitString;
using ::lutcomp::Episode;
using ::lutcomp::LossSpec;
using ::lutcomp::NetConfig;
using ::lutcomp::NetParams;
using ::lutcomp::ParamSet;
using ::lutcomp::TaskRef;

NetConfig small_config(int h, int s) {
  NetConfig c;
  c.lstm_units = h;
  c.sigmoid_units = s;
  return c;
}

// Spreads weights wider than the init range so that gradients are not tiny.
NetParams random_params(std::uint64_t seed, const NetConfig& cfg, double scale) {
  NetParams p = lutcomp::init_params(seed, cfg);
  lutcomp::Rng rng(seed ^ 0x5eed);
  for (auto& m : p.p.t) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  }
  p.apply_mask();
  return p;
}

Episode random_episode(lutcomp::Rng& rng, const lutcomp::TaskSet& set) {
  const bool composed = rng.coin();
  TaskRef task;
  task.codes.push_back(static_cast<char>('a' + rng.below(8)));
  if (composed) task.codes.push_back(static_cast<char>('a' + rng.below(8)));
  return build_episode(task, set, BitString(static_cast<std::uint32_t>(rng.below(8)), 3));
}

// Central differences on every entry; returns the worst relative error.
double gradient_error(NetParams params, const Episode& ep, const LossSpec& loss) {
  ParamSet grads = ParamSet::zeros_like(params.config);
  lutcomp::ForwardCache cache;
  lutcomp::bptt(params, ep, loss, lutcomp::kAllTrainable, grads, cache);
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < lutcomp::kNumTensors; ++t) {
    auto& m = params.p.t[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double keep = m.data()[i];
      m.data()[i] = keep + h;
      const double up = episode_loss(params, ep, loss);
      m.data()[i] = keep - h;
      const double down = episode_loss(params, ep, loss);
      m.data()[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads.t[static_cast<std::size_t>(t)].data()[i];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

TEST(InitTest, RangeAndDeterminism) {
  const NetConfig cfg;
  const NetParams a = lutcomp::init_params(1, cfg);
  EXPECT_EQ(a, lutcomp::init_params(1, cfg));
  EXPECT_FALSE(a == lutcomp::init_params(2, cfg));
  for (auto id : {lutcomp::kLstmInput, lutcomp::kLstmRecurrent, lutcomp::kHiddenWeight,
                  lutcomp::kOutputWeight}) {
    EXPECT_LE(a[id].cwiseAbs().maxCoeff(), 0.1);
    EXPECT_GT(a[id].cwiseAbs().maxCoeff(), 0.05);
  }
  for (auto id : {lutcomp::kLstmBias, lutcomp::kHiddenBias, lutcomp::kOutputBias}) {
    EXPECT_EQ(a[id].cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(a[lutcomp::kLstmInput].rows(), 240);
  EXPECT_EQ(a[lutcomp::kLstmInput].cols(), 20);
  EXPECT_EQ(a[lutcomp::kLstmRecurrent].cols(), 60);
  EXPECT_EQ(a[lutcomp::kHiddenWeight].rows(), 10);
  EXPECT_EQ(a[lutcomp::kOutputWeight].rows(), 3);
}

TEST(ConfigTest, Validation) {
  NetConfig c;
  c.lstm_units = 0;
  EXPECT_THROW(c.validate(), lutcomp::Error);
  c = NetConfig{};
  c.mask = {1, 0, 1};
  EXPECT_THROW(c.validate(), lutcomp::Error);
  c.lstm_units = 29;
  c.mask = lutcomp::emission_mask(10);
  EXPECT_NO_THROW(c.validate());
}

TEST(ForwardTest, DistributionsNormalized) {
  const auto set = lutcomp::generate_task_set(1);
  lutcomp::Rng rng(3);
  const NetParams p = random_params(4, NetConfig{}, 0.5);
  for (int i = 0; i < 20; ++i) {
    const auto r = forward(p, random_episode(rng, set), lutcomp::Feedback::kGold);
    for (Eigen::Index t = 0; t < r.probs.rows(); ++t) {
      EXPECT_NEAR(r.probs.row(t).sum(), 1.0, 1e-12);
    }
  }
}

TEST(ForwardTest, ZeroWeightsGiveUniformOutputs) {
  const auto set = lutcomp::generate_task_set(1);
  NetParams p = lutcomp::init_params(1, NetConfig{});
  p.p.set_zero();
  const auto ep = build_episode(TaskRef{"ab"}, set, BitString(3, 3));
  const auto r = forward(p, ep, lutcomp::Feedback::kModel);
  for (Eigen::Index t = 0; t < r.probs.rows(); ++t) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.probs(t, k), 1.0 / 3.0, 1e-15);
  }
}

TEST(ForwardTest, ModelFeedbackMatchesGenerate) {
  const auto set = lutcomp::generate_task_set(1);
  lutcomp::Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const NetParams p = random_params(30 + static_cast<std::uint64_t>(i), NetConfig{}, 0.8);
    const auto ep = random_episode(rng, set);
    const auto model = forward(p, ep, lutcomp::Feedback::kModel);
    ASSERT_EQ(model.emitted.size(), ep.target.size());
    const std::string gen = lutcomp::generate(p, ep.prompt, ep.target.size());
    // generate stops early at '.', forward runs the full target length.
    EXPECT_EQ(model.emitted.substr(0, gen.size()), gen);
  }
}

TEST(GenerateTest, RespectsCap) {
  const NetParams p = lutcomp::init_params(2, NetConfig{});
  const std::string out = lutcomp::generate(p, "PCab:011.", lutcomp::output_cap(7));
  EXPECT_LE(out.size(), 18u);
  EXPECT_EQ(lutcomp::output_cap(4), 12u);
}

TEST(GradientTest, CrossEntropyMatchesFiniteDifferences) {
  const auto set = lutcomp::generate_task_set(7);
  lutcomp::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 2 + static_cast<int>(rng.below(7));
    const int s = 2 + static_cast<int>(rng.below(5));
    NetConfig cfg = small_config(h, s);
    if (trial % 5 == 4) {
      // Masked variant on a random 0/1 pattern.
      cfg.mask.resize(static_cast<std::size_t>(h * s));
      for (auto& m : cfg.mask) m = static_cast<std::uint8_t>(rng.coin());
    }
    const NetParams p = random_params(100 + static_cast<std::uint64_t>(trial), cfg, 0.6);
    const Episode ep = random_episode(rng, set);
    const double err = gradient_error(p, ep, LossSpec::cross_entropy());
    EXPECT_LT(err, 1e-4) << "trial " << trial << " H=" << h << " S=" << s;
  }
}

TEST(GradientTest, HiddenMseMatchesFiniteDifferences) {
  const auto set = lutcomp::generate_task_set(7);
  lutcomp::Rng rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    const NetConfig cfg = small_config(lutcomp::kStateUnits, 4);
    const NetParams p = random_params(200 + static_cast<std::uint64_t>(trial), cfg, 0.3);
    const Episode ep = random_episode(rng, set);
    const auto trace = lutcomp::trace_states(ep);
    EXPECT_LT(gradient_error(p, ep, LossSpec::hidden_mse(trace)), 1e-4) << trial;
  }
}

TEST(GradientTest, TrainableSubsetsOnlyTouchTheirTensors) {
  const auto set = lutcomp::generate_task_set(7);
  const NetParams p = random_params(5, small_config(6, 3), 0.5);
  const auto ep = build_episode(TaskRef{"cd"}, set, BitString(1, 3));
  ParamSet all = ParamSet::zeros_like(p.config);
  ParamSet head = ParamSet::zeros_like(p.config);
  lutcomp::ForwardCache cache;
  lutcomp::bptt(p, ep, LossSpec::cross_entropy(), lutcomp::kAllTrainable, all, cache);
  lutcomp::bptt(p, ep, LossSpec::cross_entropy(), lutcomp::kHeadOnly, head, cache);
  for (int t = 0; t < lutcomp::kNumTensors; ++t) {
    const auto i = static_cast<std::size_t>(t);
    if (lutcomp::kHeadOnly[i]) {
      EXPECT_EQ(head.t[i], all.t[i]);
    } else {
      EXPECT_EQ(head.t[i].cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(GradientTest, MseAtTargetsHasZeroGradient) {
  // All-zero weights keep the cell input tanh(0) = 0, so every hidden state
  // is exactly zero and matches an all-zero trace.
  const auto set = lutcomp::generate_task_set(7);
  NetParams p = lutcomp::init_params(1, small_config(lutcomp::kStateUnits, 4));
  p.p.set_zero();
  const auto ep = build_episode(TaskRef::atomic('a'), set, BitString(0, 3));
  lutcomp::StateTrace zero;
  zero.targets.assign(ep.steps(), lutcomp::StateVector{});
  ParamSet grads = ParamSet::zeros_like(p.config);
  lutcomp::ForwardCache cache;
  const auto out = lutcomp::bptt(p, ep, LossSpec::hidden_mse(zero), lutcomp::kLstmOnly, grads, cache);
  EXPECT_EQ(out.loss, 0.0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(grads.t[static_cast<std::size_t>(t)].cwiseAbs().maxCoeff(), 0.0);
}

TEST(OptimizerTest, AdamFirstStepIsLearningRate) {
  const NetConfig cfg = small_config(3, 2);
  NetParams p = lutcomp::init_params(1, cfg);
  const NetParams before = p;
  ParamSet g = ParamSet::zeros_like(cfg);
  for (auto& m : g.t) m.setConstant(1.0);
  auto opt = lutcomp::OptState::make(cfg, lutcomp::OptimizerKind::kAdam, 1e-3);
  lutcomp::update(p, g, opt, lutcomp::kAllTrainable);
  // m_hat = g, v_hat = g^2, so the step is lr * 1 / (1 + eps).
  const double expected = 1e-3 / (1.0 + 1e-8);
  for (int t = 0; t < lutcomp::kNumTensors; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Eigen::ArrayXXd d = (before.p.t[i] - p.p.t[i]).array();
    EXPECT_NEAR(d.maxCoeff(), expected, 1e-15);
    EXPECT_NEAR(d.minCoeff(), expected, 1e-15);
  }
  EXPECT_EQ(opt.step, 1u);
}

TEST(OptimizerTest, SgdWithZeroLearningRateIsIdentity) {
  const NetConfig cfg = small_config(4, 3);
  NetParams p = lutcomp::init_params(1, cfg);
  const NetParams before = p;
  ParamSet g = ParamSet::zeros_like(cfg);
  for (auto& m : g.t) m.setConstant(0.7);
  auto opt = lutcomp::OptState::make(cfg, lutcomp::OptimizerKind::kSgd, 0.0);
  lutcomp::update(p, g, opt, lutcomp::kAllTrainable);
  EXPECT_EQ(p, before);
}

TEST(OptimizerTest, SgdStep) {
  const NetConfig cfg = small_config(4, 3);
  NetParams p = lutcomp::init_params(1, cfg);
  const NetParams before = p;
  ParamSet g = ParamSet::zeros_like(cfg);
  for (auto& m : g.t) m.setConstant(2.0);
  auto opt = lutcomp::OptState::make(cfg, lutcomp::OptimizerKind::kSgd, 0.25);
  lutcomp::update(p, g, opt, lutcomp::kHeadOnly);
  EXPECT_EQ(p[lutcomp::kLstmInput], before[lutcomp::kLstmInput]);
  const auto& b = before[lutcomp::kOutputBias];
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    EXPECT_DOUBLE_EQ(p[lutcomp::kOutputBias].data()[i], b.data()[i] - 0.5);
  }
  EXPECT_DOUBLE_EQ(p[lutcomp::kOutputWeight](0, 0), before[lutcomp::kOutputWeight](0, 0) - 0.5);
}

TEST(OptimizerTest, MaskedEntriesStayZero) {
  NetConfig cfg = small_config(lutcomp::kStateUnits, 10);
  cfg.mask = lutcomp::emission_mask(10);
  for (auto kind : {lutcomp::OptimizerKind::kAdam, lutcomp::OptimizerKind::kSgd}) {
    NetParams p = lutcomp::init_params(3, cfg);
    ParamSet g = ParamSet::zeros_like(cfg);
    for (auto& m : g.t) m.setConstant(1.0);
    auto opt = lutcomp::OptState::make(cfg, kind, 0.1);
    for (int i = 0; i < 3; ++i) lutcomp::update(p, g, opt, lutcomp::kAllTrainable);
    const auto units = lutcomp::emission_units();
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < lutcomp::kStateUnits; ++c) {
        if (!units[static_cast<std::size_t>(c)]) {
          EXPECT_EQ(p[lutcomp::kHiddenWeight](r, c), 0.0);
        } else {
          EXPECT_NE(p[lutcomp::kHiddenWeight](r, c), 0.0);
        }
      }
    }
  }
}

TEST(OptimizerTest, NonFiniteGradientIsRejected) {
  const NetConfig cfg = small_config(3, 2);
  NetParams p = lutcomp::init_params(1, cfg);
  const NetParams before = p;
  ParamSet g = ParamSet::zeros_like(cfg);
  g.t[lutcomp::kOutputBias](0, 0) = std::numeric_limits<double>::quiet_NaN();
  auto opt = lutcomp::OptState::make(cfg, lutcomp::OptimizerKind::kAdam, 1e-3);
  try {
    lutcomp::update(p, g, opt, lutcomp::kAllTrainable);
    FAIL() << "expected a numeric error";
  } catch (const lutcomp::Error& e) {
    EXPECT_EQ(e.code(), lutcomp::ErrorCode::kNumeric);
  }
  EXPECT_EQ(p, before);
}

TEST(TrainingTest, MemorizedEpisodeLossDecreases) {
  const auto set = lutcomp::generate_task_set(2);
  const auto ep = build_episode(TaskRef{"fb"}, set, BitString(6, 3));
  NetParams p = lutcomp::init_params(8, small_config(12, 6));
  auto opt = lutcomp::OptState::make(p.config, lutcomp::OptimizerKind::kSgd, 0.05);
  lutcomp::ForwardCache cache;
  double last = episode_loss(p, ep, LossSpec::cross_entropy());
  for (int i = 0; i < 30; ++i) {
    ParamSet g = ParamSet::zeros_like(p.config);
    lutcomp::bptt(p, ep, LossSpec::cross_entropy(), lutcomp::kAllTrainable, g, cache);
    lutcomp::update(p, g, opt, lutcomp::kAllTrainable);
    const double now = episode_loss(p, ep, LossSpec::cross_entropy());
    EXPECT_LT(now, last) << "update " << i;
    last = now;
  }
}

TEST(OptimizerTest, NamesRoundTrip) {
  EXPECT_EQ(lutcomp::parse_optimizer("adam"), lutcomp::OptimizerKind::kAdam);
  EXPECT_EQ(lutcomp::parse_optimizer("sgd"), lutcomp::OptimizerKind::kSgd);
  EXPECT_STREQ(lutcomp::optimizer_name(lutcomp::OptimizerKind::kSgd), "sgd");
  EXPECT_THROW(lutcomp::parse_optimizer("rmsprop"), lutcomp::Error);
}

}  // namespace
