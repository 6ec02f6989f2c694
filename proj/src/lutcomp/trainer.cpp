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

#include "lutcomp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "lutcomp/automaton.hpp"
#include "lutcomp/error.hpp"
#include "lutcomp/prompts.hpp"

namespace lutcomp {

using nlohmann::json;

namespace {

constexpr std::pair<Variant, const char*> kVariantNames[] = {
    {Variant::kExp1, "exp1"},
    {Variant::kExp2, "exp2"},
    {Variant::kComposedOnly, "composed_only"},
    {Variant::kShuffledPrompts, "shuffled_prompts"},
    {Variant::kRandomTaskCodes, "random_task_codes"},
    {Variant::kHeldOutCompositions, "held_out_compositions"},
};

constexpr int kProbeEpisodes = 500;

}  // namespace

const char* variant_name(Variant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (const auto& [variant, n] : kVariantNames) {
    if (name == n) return variant;
  }
  fail(ErrorCode::kInvalidArgument, "unknown variant '" + name + "'");
}

NetConfig TrainConfig::net_config() const {
  NetConfig cfg;
  cfg.sigmoid_units = sigmoid_units;
  if (variant == Variant::kExp1) {
    cfg.lstm_units = lstm_units == 0 ? kStateUnits : lstm_units;
    if (cfg.lstm_units == kStateUnits) cfg.mask = emission_mask(sigmoid_units);
  } else {
    cfg.lstm_units = lstm_units == 0 ? 60 : lstm_units;
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const TrainConfig& c) {
  json doc = {
      {"variant", variant_name(c.variant)},
      {"episodes_phase1", c.episodes_phase1},
      {"episodes_phase2", c.episodes_phase2},
      {"init_seed", c.init_seed},
      {"train_seed", c.train_seed},
      {"lstm_units", c.lstm_units},
      {"sigmoid_units", c.sigmoid_units},
      {"optimizer", optimizer_name(c.optimizer)},
      {"lr", c.lr},
      {"exp1_lr_phase1", c.exp1_lr_phase1},
      {"exp1_lr_phase2", c.exp1_lr_phase2},
      {"final_output_only", c.final_output_only},
      {"held_out_tasks", c.held_out_tasks},
      {"hidden_mse_threshold", c.hidden_mse_threshold},
      {"log_every", c.log_every},
  };
  return doc.dump();
}

TrainConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("training config is not JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kParse, "training config must be an object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "variant") c.variant = parse_variant(value.get<std::string>());
      else if (key == "episodes_phase1") c.episodes_phase1 = value.get<std::uint64_t>();
      else if (key == "episodes_phase2") c.episodes_phase2 = value.get<std::uint64_t>();
      else if (key == "init_seed") c.init_seed = value.get<std::uint64_t>();
      else if (key == "train_seed") c.train_seed = value.get<std::uint64_t>();
      else if (key == "lstm_units") c.lstm_units = value.get<int>();
      else if (key == "sigmoid_units") c.sigmoid_units = value.get<int>();
      else if (key == "optimizer") c.optimizer = parse_optimizer(value.get<std::string>());
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "exp1_lr_phase1") c.exp1_lr_phase1 = value.get<double>();
      else if (key == "exp1_lr_phase2") c.exp1_lr_phase2 = value.get<double>();
      else if (key == "final_output_only") c.final_output_only = value.get<bool>();
      else if (key == "held_out_tasks") c.held_out_tasks = value.get<int>();
      else if (key == "hidden_mse_threshold") c.hidden_mse_threshold = value.get<double>();
      else if (key == "log_every") c.log_every = value.get<std::uint64_t>();
      else fail(ErrorCode::kInvalidArgument, "unknown training config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad training config value: ") + e.what());
  }
  return c;
}

std::string TrainConfig::hash() const {
  TrainConfig unseeded = *this;
  unseeded.init_seed = 0;
  unseeded.train_seed = 0;
  return hex64(fnv1a64(config_to_json(unseeded)));
}

void RollingSuccess::push(bool correct) {
  if (count_ == kWindow) {
    hits_ -= ring_[next_] ? 1 : 0;
  } else {
    ++count_;
  }
  ring_[next_] = correct;
  hits_ += correct ? 1 : 0;
  next_ = (next_ + 1) % kWindow;
}

double RollingSuccess::rate() const {
  return count_ == 0 ? 0.0 : 100.0 * static_cast<double>(hits_) / static_cast<double>(count_);
}

std::vector<bool> RollingSuccess::window() const {
  std::vector<bool> out;
  const std::size_t start = count_ == kWindow ? next_ : 0;
  for (std::size_t i = 0; i < count_; ++i) out.push_back(ring_[(start + i) % kWindow]);
  return out;
}

CodePolicy CodePolicy::shuffled(const TaskSet& set, std::uint64_t train_seed) {
  CodePolicy p;
  p.kind_ = Kind::kShuffled;
  for (const auto& t : set.composed_tasks()) p.codes_.push_back(t.codes);
  std::vector<std::string> image = p.codes_;
  Rng rng(derive_seed(train_seed, "shuffled-prompts"));
  rng.shuffle(std::span<std::string>(image));
  for (std::size_t i = 0; i < image.size(); ++i) {
    p.bijection_.emplace(set.composed_tasks()[i], image[i]);
  }
  return p;
}

CodePolicy CodePolicy::random_codes(const TaskSet& set) {
  CodePolicy p;
  p.kind_ = Kind::kRandom;
  for (const auto& t : set.composed_tasks()) p.codes_.push_back(t.codes);
  return p;
}

std::string CodePolicy::show(const TaskRef& task, Rng& rng) const {
  if (!task.composed() || kind_ == Kind::kIdentity) return task.codes;
  if (kind_ == Kind::kShuffled) return bijection_.at(task);
  return codes_[static_cast<std::size_t>(rng.below(codes_.size()))];
}

EpisodeStream::EpisodeStream(const TaskSuite& suite, const TrainConfig& config)
    : suite_(suite),
      variant_(config.variant),
      rng_(derive_seed(config.train_seed, "episodes")) {
  const TaskSet& set = suite.tasks;
  atomic_ = set.atomic_tasks();
  if (variant_ == Variant::kShuffledPrompts) {
    policy_ = CodePolicy::shuffled(set, config.train_seed);
  } else if (variant_ == Variant::kRandomTaskCodes) {
    policy_ = CodePolicy::random_codes(set);
  }
  if (variant_ == Variant::kHeldOutCompositions) {
    const auto& all = set.composed_tasks();
    if (config.held_out_tasks < 1 ||
        static_cast<std::size_t>(config.held_out_tasks) >= all.size()) {
      fail(ErrorCode::kInvalidArgument, "held_out_tasks must be in [1, composed count)");
    }
    std::vector<TaskRef> order = all;
    Rng pick(derive_seed(set.seed(), "withheld-compositions"));
    pick.shuffle(std::span<TaskRef>(order));
    withheld_.assign(order.begin(), order.begin() + config.held_out_tasks);
    std::sort(withheld_.begin(), withheld_.end());
  }
  for (const auto& task : set.composed_tasks()) {
    if (std::binary_search(withheld_.begin(), withheld_.end(), task)) continue;
    composed_.push_back(task);
    composed_inputs_.push_back(
        suite.split.trainable_inputs(task, set.domain_size(), set.length()));
  }
}

SampledEpisode EpisodeStream::draw(bool atomic) {
  const TaskSet& set = suite_.tasks;
  SampledEpisode s;
  if (atomic) {
    s.task = atomic_[static_cast<std::size_t>(rng_.below(atomic_.size()))];
    s.input = BitString(static_cast<std::uint32_t>(rng_.below(set.domain_size())),
                        set.length());
    s.shown_codes = s.task.codes;
  } else {
    const auto k = static_cast<std::size_t>(rng_.below(composed_.size()));
    s.task = composed_[k];
    const auto& inputs = composed_inputs_[k];
    s.input = inputs[static_cast<std::size_t>(rng_.below(inputs.size()))];
    s.shown_codes = policy_.show(s.task, rng_);
  }
  return s;
}

SampledEpisode EpisodeStream::next(int phase) {
  switch (variant_) {
    case Variant::kExp1:
      return draw(true);
    case Variant::kComposedOnly:
      return draw(false);
    default:
      break;
  }
  if (phase == 1) return draw(true);
  const std::size_t total = atomic_.size() + composed_.size();
  return draw(rng_.below(total) < atomic_.size());
}

EpisodeStream apply_variant(Variant variant, const TaskSuite& suite,
                            TrainConfig config) {
  config.variant = variant;
  return EpisodeStream(suite, config);
}

std::string log_to_json(const LogRecord& rec) {
  json doc = {{"phase", rec.phase},
              {"episode", rec.episode},
              {"rolling_success", rec.rolling_success},
              {"mean_loss", rec.mean_loss}};
  return doc.dump();
}

namespace {

struct Learner {
  NetParams params;
  OptState opt;
  ParamSet grads;
  ForwardCache cache;

  Learner(NetParams p, OptState o)
      : params(std::move(p)), opt(std::move(o)),
        grads(ParamSet::zeros_like(params.config)) {}

  StepOutcome step(const Episode& ep, const LossSpec& loss,
                   const TrainableSet& trainable) {
    for (int i = 0; i < kNumTensors; ++i) {
      if (trainable[i]) grads.t[i].setZero();
    }
    StepOutcome out = bptt(params, ep, loss, trainable, grads, cache);
    if (!std::isfinite(out.loss)) fail(ErrorCode::kNumeric, "non-finite loss");
    update(params, grads, opt, trainable);
    return out;
  }
};

// Accumulates loss between log points.
class PhaseLogger {
 public:
  PhaseLogger(int phase, std::uint64_t every, const LogSink& sink,
              std::vector<LogRecord>* curve)
      : phase_(phase), every_(every), sink_(sink), curve_(curve) {}

  void record(std::uint64_t episode, double loss, const RollingSuccess& rolling) {
    loss_sum_ += loss;
    ++n_;
    if (every_ == 0 || episode % every_ != 0) return;
    LogRecord rec{phase_, episode, rolling.rate(), loss_sum_ / static_cast<double>(n_)};
    if (sink_) sink_(rec);
    if (curve_) curve_->push_back(rec);
    loss_sum_ = 0.0;
    n_ = 0;
  }

 private:
  int phase_;
  std::uint64_t every_;
  const LogSink& sink_;
  std::vector<LogRecord>* curve_;
  double loss_sum_ = 0.0;
  std::uint64_t n_ = 0;
};

// A well-formed episode whose stage outputs are uniformly random bits.
Episode random_io_episode(Rng& rng) {
  const int depth = rng.coin() ? 2 : 1;
  std::string codes;
  for (int i = 0; i < depth; ++i) codes.push_back(static_cast<char>('a' + rng.below(8)));
  BitString input(static_cast<std::uint32_t>(rng.below(8)), 3);
  std::string target;
  for (int i = 0; i < depth; ++i) {
    target += BitString(static_cast<std::uint32_t>(rng.below(8)), 3).str();
  }
  target.push_back('.');
  return episode_from_strings(render_prompt(TaskRef{codes}, input), target);
}

std::vector<TestItem> with_codes(std::vector<TestItem> items,
                                 const CodePolicy& policy, Rng& rng) {
  for (auto& item : items) item.shown_codes = policy.show(item.task, rng);
  return items;
}

}  // namespace

Exp1Result train_exp1(const TrainConfig& config, const TaskSuite& suite,
                      const LogSink& log) {
  if (config.variant != Variant::kExp1) {
    fail(ErrorCode::kInvalidArgument, "train_exp1 needs variant exp1");
  }
  const NetConfig cfg = config.net_config();
  if (cfg.lstm_units != kStateUnits || cfg.mask.empty()) {
    fail(ErrorCode::kInvalidArgument,
         "exp1 needs 29 LSTM units and the A/C/D connectivity mask");
  }
  Exp1Result result;
  const double lr1 = config.exp1_lr_phase1 > 0 ? config.exp1_lr_phase1 : config.lr;
  const double lr2 = config.exp1_lr_phase2 > 0 ? config.exp1_lr_phase2 : config.lr;

  Learner learner(init_params(config.init_seed, cfg),
                  OptState::make(cfg, config.optimizer, lr1));
  Rng rng(derive_seed(config.train_seed, "exp1-phase1"));
  RollingSuccess rolling;
  {
    PhaseLogger logger(1, config.log_every, log, &result.metrics.curve);
    for (std::uint64_t e = 1; e <= config.episodes_phase1; ++e) {
      const Episode ep = random_io_episode(rng);
      const StateTrace trace = trace_states(ep);
      const StepOutcome out = learner.step(ep, LossSpec::hidden_mse(trace), kLstmOnly);
      logger.record(e, out.loss, rolling);
    }
  }

  // Probe how closely the recurrent layer tracks the automaton.
  {
    Rng probe(derive_seed(config.train_seed, "exp1-probe"));
    std::array<double, kStateUnits> unit_sq{};
    double steps = 0.0;
    ForwardCache cache;
    for (int i = 0; i < kProbeEpisodes; ++i) {
      const Episode ep = random_io_episode(probe);
      const StateTrace trace = trace_states(ep);
      forward_into(learner.params, ep, Feedback::kGold, cache);
      for (int t = 0; t < cache.steps; ++t) {
        for (int k = 0; k < kStateUnits; ++k) {
          const double d = cache.hidden(t, k) - trace.targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
          unit_sq[static_cast<std::size_t>(k)] += d * d;
        }
        steps += 1.0;
      }
    }
    double total = 0.0, worst = 0.0;
    for (double s : unit_sq) {
      total += s / steps;
      worst = std::max(worst, s / steps);
    }
    result.metrics.phase1_hidden_mse = total / kStateUnits;
    result.metrics.phase1_max_unit_mse = worst;
    result.metrics.tracking_ok = worst < config.hidden_mse_threshold;
  }

  learner.opt = OptState::make(cfg, config.optimizer, lr2);
  EpisodeStream stream(suite, config);
  {
    PhaseLogger logger(2, config.log_every, log, &result.metrics.curve);
    for (std::uint64_t e = 1; e <= config.episodes_phase2; ++e) {
      const SampledEpisode s = stream.next(2);
      const Episode ep = build_episode(s.task, suite.tasks, s.input);
      const StepOutcome out = learner.step(ep, LossSpec::cross_entropy(), kHeadOnly);
      rolling.push(out.correct);
      logger.record(e, out.loss, rolling);
    }
  }
  result.metrics.phase2_final_rolling = rolling.rate();
  result.metrics.exhaustive_accuracy =
      evaluate_exhaustive(learner.params, suite.tasks).performance;
  result.params = std::move(learner.params);
  result.opt = std::move(learner.opt);
  return result;
}

std::vector<TestItem> variant_test_items(const TaskSuite& suite,
                                         const TrainConfig& config,
                                         const EpisodeStream& stream) {
  if (config.variant == Variant::kHeldOutCompositions) {
    std::vector<TestItem> items;
    for (const auto& task : stream.withheld_tasks()) {
      for (std::uint32_t v = 0; v < suite.tasks.domain_size(); ++v) {
        items.push_back(TestItem{task, BitString(v, suite.tasks.length()), {}});
      }
    }
    return items;
  }
  Rng rng(derive_seed(config.train_seed, "test-codes"));
  return with_codes(zero_shot_items(suite), stream.policy(), rng);
}

RunResult train_exp2(const TrainConfig& config, const TaskSuite& suite,
                     const LogSink& log, const EpisodeAudit& audit) {
  if (config.variant == Variant::kExp1) {
    fail(ErrorCode::kInvalidArgument, "use train_exp1 for variant exp1");
  }
  const auto started = std::chrono::steady_clock::now();
  const NetConfig cfg = config.net_config();
  const TaskSet& set = suite.tasks;
  EpisodeOptions opts;
  opts.final_output_only = config.final_output_only;

  Learner learner(init_params(config.init_seed, cfg),
                  OptState::make(cfg, config.optimizer, config.lr));
  EpisodeStream stream(suite, config);
  RollingSuccess rolling;
  RunResult result;
  RunRecord& rec = result.record;
  rec.variant = variant_name(config.variant);
  rec.init_seed = config.init_seed;
  rec.train_seed = config.train_seed;
  rec.episodes_phase1 = config.episodes_phase1;
  rec.episodes_phase2 = config.episodes_phase2;
  rec.optimizer = optimizer_name(config.optimizer);
  rec.lr = config.lr;
  rec.config_hash = config.hash();

  try {
    for (int phase = 1; phase <= 2; ++phase) {
      const std::uint64_t n = phase == 1 ? config.episodes_phase1 : config.episodes_phase2;
      PhaseLogger logger(phase, config.log_every, log, nullptr);
      for (std::uint64_t e = 1; e <= n; ++e) {
        const SampledEpisode s = stream.next(phase);
        if (audit) audit(phase, s);
        opts.shown_codes = s.shown_codes;
        const Episode ep = build_episode(s.task, set, s.input, opts);
        const StepOutcome out = learner.step(ep, LossSpec::cross_entropy(), kAllTrainable);
        rolling.push(out.correct);
        logger.record(e, out.loss, rolling);
      }
      (phase == 1 ? rec.phase1_final_rolling : rec.phase2_final_rolling) = rolling.rate();
    }
    const Responder net = network_responder(learner.params);
    const bool fo = config.final_output_only;
    Rng code_rng(derive_seed(config.train_seed, "seen-codes"));
    rec.atomic_accuracy = score(atomic_items(set), set, net, fo).performance;
    std::vector<TestItem> seen;
    for (auto& item : with_codes(seen_composed_items(suite), stream.policy(), code_rng)) {
      if (!std::binary_search(stream.withheld_tasks().begin(),
                              stream.withheld_tasks().end(), item.task)) {
        seen.push_back(std::move(item));
      }
    }
    rec.seen_composed_accuracy = score(seen, set, net, fo).performance;
    rec.generalization_performance =
        score(variant_test_items(suite, config, stream), set, net, fo).performance;
    rec.exhaustive_accuracy = score(exhaustive_items(set), set, net, fo).performance;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumeric) throw;
    rec.status = "failed";
    rec.error = e.what();
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.params = std::move(learner.params);
  result.opt = std::move(learner.opt);
  return result;
}

RunResult train_run(const TrainConfig& config, const TaskSuite& suite,
                    std::uint64_t run_id, const LogSink& log) {
  RunResult result;
  if (config.variant == Variant::kExp1) {
    const auto started = std::chrono::steady_clock::now();
    RunRecord& rec = result.record;
    rec.variant = variant_name(config.variant);
    rec.init_seed = config.init_seed;
    rec.train_seed = config.train_seed;
    rec.episodes_phase1 = config.episodes_phase1;
    rec.episodes_phase2 = config.episodes_phase2;
    rec.optimizer = optimizer_name(config.optimizer);
    rec.lr = config.lr;
    rec.config_hash = config.hash();
    try {
      Exp1Result r = train_exp1(config, suite, log);
      const Responder net = network_responder(r.params);
      rec.atomic_accuracy = score(atomic_items(suite.tasks), suite.tasks, net).performance;
      rec.seen_composed_accuracy = 0.0;  // no composed task is trained in exp1
      rec.generalization_performance = evaluate_zero_shot(r.params, suite).performance;
      rec.exhaustive_accuracy = r.metrics.exhaustive_accuracy;
      rec.phase2_final_rolling = r.metrics.phase2_final_rolling;
      result.params = std::move(r.params);
      result.opt = std::move(r.opt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNumeric) throw;
      rec.status = "failed";
      rec.error = e.what();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  } else {
    result = train_exp2(config, suite, log);
  }
  result.record.run_id = run_id;
  result.record.taskset_hash = suite_hash(suite);
  return result;
}

bool RunRecord::same_result(const RunRecord& o) const {
  return run_id == o.run_id && variant == o.variant && init_seed == o.init_seed &&
         train_seed == o.train_seed && episodes_phase1 == o.episodes_phase1 &&
         episodes_phase2 == o.episodes_phase2 && optimizer == o.optimizer &&
         lr == o.lr && taskset_hash == o.taskset_hash &&
         config_hash == o.config_hash && atomic_accuracy == o.atomic_accuracy &&
         seen_composed_accuracy == o.seen_composed_accuracy &&
         generalization_performance == o.generalization_performance &&
         exhaustive_accuracy == o.exhaustive_accuracy &&
         phase1_final_rolling == o.phase1_final_rolling &&
         phase2_final_rolling == o.phase2_final_rolling && status == o.status &&
         error == o.error;
}

std::string record_to_json(const RunRecord& r) {
  json doc = {
      {"run_id", r.run_id},
      {"variant", r.variant},
      {"init_seed", r.init_seed},
      {"train_seed", r.train_seed},
      {"episodes_phase1", r.episodes_phase1},
      {"episodes_phase2", r.episodes_phase2},
      {"optimizer", r.optimizer},
      {"lr", r.lr},
      {"taskset_hash", r.taskset_hash},
      {"config_hash", r.config_hash},
      {"atomic_accuracy", r.atomic_accuracy},
      {"seen_composed_accuracy", r.seen_composed_accuracy},
      {"generalization_performance", r.generalization_performance},
      {"exhaustive_accuracy", r.exhaustive_accuracy},
      {"phase1_final_rolling", r.phase1_final_rolling},
      {"phase2_final_rolling", r.phase2_final_rolling},
      {"wall_time", r.wall_time},
      {"status", r.status},
  };
  if (!r.error.empty()) doc["error"] = r.error;
  return doc.dump();
}

RunRecord record_from_json(const std::string& line) {
  RunRecord r;
  try {
    const json doc = json::parse(line);
    r.run_id = doc.at("run_id").get<std::uint64_t>();
    r.variant = doc.at("variant").get<std::string>();
    r.init_seed = doc.at("init_seed").get<std::uint64_t>();
    r.train_seed = doc.at("train_seed").get<std::uint64_t>();
    r.episodes_phase1 = doc.at("episodes_phase1").get<std::uint64_t>();
    r.episodes_phase2 = doc.at("episodes_phase2").get<std::uint64_t>();
    r.optimizer = doc.at("optimizer").get<std::string>();
    r.lr = doc.at("lr").get<double>();
    r.taskset_hash = doc.at("taskset_hash").get<std::string>();
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.atomic_accuracy = doc.at("atomic_accuracy").get<double>();
    r.seen_composed_accuracy = doc.at("seen_composed_accuracy").get<double>();
    r.generalization_performance = doc.at("generalization_performance").get<double>();
    r.exhaustive_accuracy = doc.value("exhaustive_accuracy", 0.0);
    r.phase1_final_rolling = doc.at("phase1_final_rolling").get<double>();
    r.phase2_final_rolling = doc.at("phase2_final_rolling").get<double>();
    r.wall_time = doc.at("wall_time").get<double>();
    r.status = doc.at("status").get<std::string>();
    r.error = doc.value("error", std::string());
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("malformed run record: ") + e.what());
  }
  return r;
}

std::string suite_hash(const TaskSuite& suite) {
  return hex64(fnv1a64(serialize_suite(suite)));
}

}  // namespace lutcomp
