#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "peerlab/checkpoint.hpp"
#include "peerlab/error.hpp"
#include "peerlab/losses.hpp"
#include "peerlab/net.hpp"
#include "peerlab/params.hpp"
#include "peerlab/rng.hpp"
#include "peerlab/synthdata.hpp"
#include "peerlab/tensor.hpp"

namespace peerlab {

enum class Method { ERM, RANDAUG, ALIGN, PEER, PEER_NOAVG, PEER_NOREG, PEER_NOAUG, PENS };

inline Method parse_method(const std::string& name) {
  if (name == "ERM") return Method::ERM;
  if (name == "RANDAUG") return Method::RANDAUG;
  if (name == "ALIGN") return Method::ALIGN;
  if (name == "PEER") return Method::PEER;
  if (name == "PEER_NOAVG") return Method::PEER_NOAVG;
  if (name == "PEER_NOREG") return Method::PEER_NOREG;
  if (name == "PEER_NOAUG") return Method::PEER_NOAUG;
  if (name == "PENS") return Method::PENS;
  throw ConfigError("unknown method '" + name + "'");
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::ERM: return "ERM";
    case Method::RANDAUG: return "RANDAUG";
    case Method::ALIGN: return "ALIGN";
    case Method::PEER: return "PEER";
    case Method::PEER_NOAVG: return "PEER_NOAVG";
    case Method::PEER_NOREG: return "PEER_NOREG";
    case Method::PEER_NOAUG: return "PEER_NOAUG";
    case Method::PENS: return "PENS";
  }
  return "?";
}

// True for methods whose reported model is the parameter-averaged task model.
inline bool reports_task_model(Method m) {
  return m == Method::PEER || m == Method::PEER_NOREG || m == Method::PEER_NOAUG ||
         m == Method::PENS;
}

struct TrainConfig {
  Method method = Method::PEER;
  std::size_t epochs = 100;
  std::size_t k = 10;  // task-model update / augmentation reinit period
  double w = 2.0;
  double lambda = 0.005;
  double tau = 0.1;
  RegObjective objective = RegObjective::BarlowTwins;
  double lr = 1e-4;
  std::size_t batch_size = 128;
  std::int64_t seed = 1;
  std::size_t pretrain_epochs = 30;
  std::size_t eval_every = 0;         // 0 means "default to k"
  bool record_snapshots = false;      // keep per-fold proxy copies in the result

  std::size_t effective_eval_every() const { return eval_every == 0 ? k : eval_every; }

  void validate() const {
    if (k < 1) throw ConfigError("config: k >= 1 violated (k=" + std::to_string(k) + ")");
    if (epochs < k)
      throw ConfigError("config: epochs >= k violated (epochs=" + std::to_string(epochs) +
                        ", k=" + std::to_string(k) + ")");
    if (batch_size < 1) throw ConfigError("config: batch_size >= 1 violated");
    if (!(lr > 0.0)) throw ConfigError("config: lr must be positive");
    if (w < 0.0) throw ConfigError("config: w must be >= 0");
    if (lambda < 0.0) throw ConfigError("config: lambda must be >= 0");
    if (!(tau > 0.0)) throw ConfigError("config: tau must be positive");
  }
};

struct DomainScore {
  std::string domain;
  double accuracy = 0.0;
};

struct EvalPoint {
  std::size_t epoch = 0;
  std::vector<DomainScore> task;
  std::vector<DomainScore> proxy;
  double proxy_ce = 0.0;   // mean CE component over the epoch's batches
  double proxy_reg = 0.0;  // mean (unweighted) regularizer value
};

struct MetricsRecord {
  std::vector<std::string> domains;
  std::vector<EvalPoint> points;
};

// Fraction of argmax(logits) == label; ties break toward the lowest class.
inline double evaluate(const MlpSpec& spec, const ParameterVector& params,
                       const GlyphDataset& ds) {
  const ForwardResult r = forward(spec, params, ds.x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.logits.cols; ++j)
      if (r.logits(i, j) > r.logits(i, best)) best = j;
    if (static_cast<int>(best) == ds.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct AdamState {
  Layout layout;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  static AdamState init(const ParameterVector& p) {
    return AdamState{p.layout, std::vector<double>(p.values.size(), 0.0),
                     std::vector<double>(p.values.size(), 0.0), 0};
  }
};

struct AdamResult {
  ParameterVector params;
  AdamState state;
};

// Standard bias-corrected Adam update.
inline AdamResult adam_step(ParameterVector params, const ParameterVector& grads,
                            AdamState state, double lr) {
  require_same_layout(params, grads, "adam_step");
  if (state.layout != params.layout) throw LayoutError("adam_step: state layout mismatch");
  state.step += 1;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const double g = grads.values[i];
    state.m[i] = AdamState::kBeta1 * state.m[i] + (1.0 - AdamState::kBeta1) * g;
    state.v[i] = AdamState::kBeta2 * state.v[i] + (1.0 - AdamState::kBeta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params.values[i] -= lr * mhat / (std::sqrt(vhat) + AdamState::kEps);
  }
  return AdamResult{std::move(params), std::move(state)};
}

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i-- > 1;) std::swap(idx[i], idx[rng.below(i + 1)]);
  return idx;
}

inline void gather_batch(const GlyphDataset& ds, const std::vector<std::size_t>& idx,
                         std::size_t begin, std::size_t end, Tensor& x, std::vector<int>& y) {
  const std::size_t n = end - begin;
  x = Tensor(n, ds.x.cols);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = idx[begin + i];
    std::copy(ds.x.data.begin() + static_cast<std::ptrdiff_t>(s * ds.x.cols),
              ds.x.data.begin() + static_cast<std::ptrdiff_t>((s + 1) * ds.x.cols),
              x.data.begin() + static_cast<std::ptrdiff_t>(i * ds.x.cols));
    y[i] = ds.y[s];
  }
}

// Seed-stream tags; one per kind of training-loop event.
inline constexpr std::uint64_t kTagPretrainShuffle = 0x01;
inline constexpr std::uint64_t kTagShuffle = 0x02;
inline constexpr std::uint64_t kTagPolicy = 0x03;
inline constexpr std::uint64_t kTagAug = 0x04;

}  // namespace detail

// Plain CE minimization on the un-augmented source, starting from a fresh
// Glorot init; returns the starting task parameters.
inline ParameterVector pretrain(const MlpSpec& spec, const GlyphDataset& source,
                                const TrainConfig& cfg) {
  ParameterVector params = init_model(spec, cfg.seed);
  if (cfg.pretrain_epochs == 0) return params;
  AdamState adam = AdamState::init(params);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.seed);
  for (std::size_t epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    const auto idx = detail::shuffled_indices(
        source.size(), mix_seed(seed, detail::kTagPretrainShuffle, epoch));
    for (std::size_t b = 0; b * cfg.batch_size < source.size(); ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, source.size());
      Tensor x;
      std::vector<int> y;
      detail::gather_batch(source, idx, lo, hi, x, y);
      const ForwardResult f = forward(spec, params, x);
      LossValue ce = cross_entropy(f.logits, y);
      const ParameterVector grad =
          backward(spec, params, f.cache, ce.grads["logits"], Tensor(), Tensor());
      AdamResult r = adam_step(std::move(params), grad, std::move(adam), cfg.lr);
      params = std::move(r.params);
      adam = std::move(r.state);
    }
  }
  return params;
}

// Evaluation callback: maps parameters to per-domain accuracy. The training
// loop never sees evaluation datasets directly.
using EvalFn = std::function<std::vector<DomainScore>(const ParameterVector&)>;

struct RunResult {
  Checkpoint task;
  Checkpoint proxy;
  MetricsRecord metrics;
  std::vector<ParameterVector> snapshots;  // per-fold proxy copies, when kept
  ParameterVector initial;                 // the pretrained starting point
};

// One training run. All methods share the loop skeleton:
//   - every epoch: minibatch passes over the (possibly augmented) source
//   - every k epochs: task-model update (method-specific), then augmentation
//     policy reinitialization, in that order
//   - every eval_every epochs plus the final epoch: metrics row
//
// The task model is only ever written by parameter averaging (or snapshot
// freezing), never by gradients.
inline RunResult run(const TrainConfig& cfg, const MlpSpec& spec, const GlyphDataset& source,
                     const EvalFn& eval_fn) {
  cfg.validate();
  spec.validate();
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.seed);
  const Method method = cfg.method;
  const bool peer_family = method == Method::PEER || method == Method::PEER_NOAVG ||
                           method == Method::PEER_NOREG || method == Method::PEER_NOAUG;
  const bool uses_aug = method != Method::ERM && method != Method::PEER_NOAUG;
  const double w_eff = (method == Method::PEER_NOREG) ? 0.0 : cfg.w;
  const double reg_param =
      cfg.objective == RegObjective::BarlowTwins ? cfg.lambda : cfg.tau;

  RunResult result;
  ParameterVector proxy = pretrain(spec, source, cfg);
  result.initial = proxy;

  // Regulator: the running mean for PEER variants with averaging, a frozen
  // snapshot for PEER_NOAVG. Before the first fold it is the pretrained model.
  ParameterVector regulator = proxy;
  RunningMean task_mean{proxy, 0};  // count 0: no snapshots folded yet
  std::vector<ParameterVector> pens_snapshots;

  AdamState adam = AdamState::init(proxy);
  std::size_t period = 0;
  AugPolicy policy = reinit_policy(mix_seed(seed, detail::kTagPolicy, period));
  const std::size_t eval_every = cfg.effective_eval_every();

  auto current_task_params = [&]() -> ParameterVector {
    switch (method) {
      case Method::PEER:
      case Method::PEER_NOREG:
      case Method::PEER_NOAUG:
      case Method::PEER_NOAVG:
        return task_mean.count > 0 ? task_mean.mean : regulator;
      case Method::PENS:
        return pens_snapshots.empty() ? result.initial : average_params(pens_snapshots);
      default:
        return proxy;  // single-model methods: task == the model
    }
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto idx =
        detail::shuffled_indices(source.size(), mix_seed(seed, detail::kTagShuffle, epoch));
    double epoch_ce = 0.0, epoch_reg = 0.0;
    std::size_t batches = 0;

    for (std::size_t b = 0; b * cfg.batch_size < source.size(); ++b, ++batches) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, source.size());
      Tensor x;
      std::vector<int> y;
      detail::gather_batch(source, idx, lo, hi, x, y);
      const std::uint64_t call_seed = mix_seed(seed, detail::kTagAug, epoch * 100000 + b);

      ParameterVector grad = zeros_like(proxy);
      switch (method) {
        case Method::ERM: {
          const ForwardResult f = forward(spec, proxy, x);
          LossValue ce = cross_entropy(f.logits, y);
          epoch_ce += ce.scalar;
          grad = backward(spec, proxy, f.cache, ce.grads["logits"], Tensor(), Tensor());
          break;
        }
        case Method::RANDAUG:
        case Method::PENS: {
          const Tensor xbar = apply_policy(policy, x, call_seed);
          const ForwardResult fx = forward(spec, proxy, x);
          const ForwardResult fb = forward(spec, proxy, xbar);
          LossValue ce_x = cross_entropy(fx.logits, y);
          LossValue ce_b = cross_entropy(fb.logits, y);
          epoch_ce += ce_x.scalar + ce_b.scalar;
          grad = backward(spec, proxy, fx.cache, ce_x.grads["logits"], Tensor(), Tensor());
          add_in_place(grad,
                       backward(spec, proxy, fb.cache, ce_b.grads["logits"], Tensor(), Tensor()));
          break;
        }
        case Method::ALIGN: {
          // Augment-and-align baseline: CE on x plus InfoNCE between the
          // encoder features of x and its augmented view.
          const Tensor xbar = apply_policy(policy, x, call_seed);
          const ForwardResult fx = forward(spec, proxy, x);
          const ForwardResult fb = forward(spec, proxy, xbar);
          LossValue ce = cross_entropy(fx.logits, y);
          LossValue align = info_nce(fx.features, fb.features, cfg.tau);
          epoch_ce += ce.scalar;
          epoch_reg += align.scalar;
          grad = backward(spec, proxy, fx.cache, ce.grads["logits"], Tensor(),
                          align.grads["z_a"]);
          add_in_place(grad,
                       backward(spec, proxy, fb.cache, Tensor(), Tensor(), align.grads["z_b"]));
          break;
        }
        default: {  // PEER family
          const Tensor xbar = uses_aug ? apply_policy(policy, x, call_seed) : x;
          const ForwardResult fx = forward(spec, proxy, x);
          const ForwardResult fb = forward(spec, proxy, xbar);
          LossValue reg;  // zero contribution when w_eff == 0
          if (w_eff > 0.0) {
            const ForwardResult ft = forward(spec, regulator, x);
            reg = peer_regularizer(spec, proxy, ft.features, fb.features, cfg.objective,
                                   reg_param);
          }
          LossValue lv = proxy_objective(fx.logits, fb.logits, y, reg, w_eff);
          epoch_ce += lv.scalar - w_eff * reg.scalar;
          epoch_reg += reg.scalar;
          grad = backward(spec, proxy, fx.cache, lv.grads["logits_x"], Tensor(), Tensor());
          add_in_place(grad,
                       backward(spec, proxy, fb.cache, lv.grads["logits_xbar"], Tensor(),
                                w_eff > 0.0 ? lv.grads["h_proxy"] : Tensor()));
          if (w_eff > 0.0) {
            const Tensor& gp = lv.grads["proj_params"];
            const std::size_t off = proj_section_offset(spec);
            for (std::size_t i = 0; i < gp.cols; ++i) grad.values[off + i] += gp.data[i];
          }
          break;
        }
      }
      AdamResult r = adam_step(std::move(proxy), grad, std::move(adam), cfg.lr);
      proxy = std::move(r.params);
      adam = std::move(r.state);
    }

    if (epoch % cfg.k == 0) {
      // Fold first, then reinitialize: the snapshot reflects a full k epochs
      // under one policy.
      if (peer_family) {
        if (method == Method::PEER_NOAVG) {
          regulator = proxy;
        } else {
          task_mean = task_mean.count == 0 ? RunningMean{proxy, 1}
                                           : running_mean_update(task_mean.mean,
                                                                 task_mean.count, proxy);
        }
        if (cfg.record_snapshots) result.snapshots.push_back(proxy);
      } else if (method == Method::PENS) {
        pens_snapshots.push_back(proxy);
        if (cfg.record_snapshots) result.snapshots.push_back(proxy);
      } else if (cfg.record_snapshots) {
        result.snapshots.push_back(proxy);
      }
      ++period;
      policy = reinit_policy(mix_seed(seed, detail::kTagPolicy, period));
    }

    if (epoch % eval_every == 0 || epoch == cfg.epochs) {
      EvalPoint pt;
      pt.epoch = epoch;
      pt.task = eval_fn(current_task_params());
      pt.proxy = eval_fn(proxy);
      pt.proxy_ce = epoch_ce / static_cast<double>(batches);
      pt.proxy_reg = epoch_reg / static_cast<double>(batches);
      if (result.metrics.domains.empty())
        for (const auto& s : pt.task) result.metrics.domains.push_back(s.domain);
      result.metrics.points.push_back(std::move(pt));
    }
  }

  const ParameterVector final_task = current_task_params();
  result.task = Checkpoint{spec, final_task, cfg.epochs, method_name(method), cfg.seed};
  result.proxy = Checkpoint{spec, proxy, cfg.epochs, method_name(method), cfg.seed};
  return result;
}

// Convenience wrapper building the evaluation callback over source + targets.
// Targets enter training only through that callback.
inline RunResult run_experiment(const TrainConfig& cfg, const MlpSpec& spec,
                                const GlyphDataset& source,
                                const std::vector<GlyphDataset>& targets) {
  if (targets.empty()) throw ConfigError("run_experiment: need at least one target domain");
  std::vector<const GlyphDataset*> sets;
  sets.push_back(&source);
  for (const auto& t : targets) sets.push_back(&t);
  EvalFn eval_fn = [&spec, sets](const ParameterVector& params) {
    std::vector<DomainScore> scores;
    scores.reserve(sets.size());
    for (const GlyphDataset* ds : sets)
      scores.push_back({ds->domain.name, evaluate(spec, params, *ds)});
    return scores;
  };
  return run(cfg, spec, source, eval_fn);
}

}  // namespace peerlab
