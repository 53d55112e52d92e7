#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/net.hpp"
#include "peerlab/tensor.hpp"

namespace peerlab {

// Scalar objective value plus analytic gradients w.r.t. each named input.
struct LossValue {
  double scalar = 0.0;
  std::map<std::string, Tensor> grads;
};

enum class RegObjective { BarlowTwins, InfoNce };

inline RegObjective parse_objective(const std::string& name) {
  if (name == "BT") return RegObjective::BarlowTwins;
  if (name == "InfoNCE") return RegObjective::InfoNce;
  throw ConfigError("unknown regularization objective '" + name + "' (expected BT or InfoNCE)");
}

inline std::string objective_name(RegObjective o) {
  return o == RegObjective::BarlowTwins ? "BT" : "InfoNCE";
}

// Mean over the batch of -log softmax(logits)[label].
// Gradient w.r.t. logits: (softmax - onehot) / N.
inline LossValue cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows)
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     logits.shape_str() + " logits");
  const std::size_t n = logits.rows, c = logits.cols;
  LossValue lv;
  Tensor grad(n, c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw DataError("cross_entropy: label " + std::to_string(y) + " out of range [0," +
                      std::to_string(c) + ")");
    double rowmax = logits(i, 0);
    for (std::size_t j = 1; j < c; ++j) rowmax = std::max(rowmax, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(logits(i, j) - rowmax);
    total += -(logits(i, static_cast<std::size_t>(y)) - rowmax) + std::log(z);
    for (std::size_t j = 0; j < c; ++j)
      grad(i, j) = std::exp(logits(i, j) - rowmax) / z / static_cast<double>(n);
    grad(i, static_cast<std::size_t>(y)) -= 1.0 / static_cast<double>(n);
  }
  lv.scalar = total / static_cast<double>(n);
  lv.grads["logits"] = std::move(grad);
  return lv;
}

namespace detail {

// Vector-Jacobian product of standardize_columns. mean and std are treated
// as functions of the batch (full chain rule), matching finite differences.
// For column x with mean mu, population std s and upstream g:
//   dx_k = (g_k - mean(g))/(s+eps) - [sum_i g_i (x_i-mu)] (x_k-mu) / (N s (s+eps)^2)
inline Tensor standardize_columns_vjp(const Tensor& x, const Tensor& g, double eps) {
  const auto mu = column_means(x);
  const auto sd = column_stds(x, mu);
  const std::size_t n = x.rows;
  Tensor dx(x.rows, x.cols);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double gbar = 0.0, t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gbar += g(i, j);
      t += g(i, j) * (x(i, j) - mu[j]);
    }
    gbar /= static_cast<double>(n);
    const double denom = sd[j] + eps;
    for (std::size_t i = 0; i < n; ++i) {
      double v = (g(i, j) - gbar) / denom;
      if (sd[j] > 0.0)
        v -= t * (x(i, j) - mu[j]) / (static_cast<double>(n) * sd[j] * denom * denom);
      dx(i, j) = v;
    }
  }
  return dx;
}

inline void require_paired_batches(const Tensor& z_a, const Tensor& z_b, const char* op) {
  if (z_a.rows != z_b.rows || z_a.cols != z_b.cols)
    throw ShapeError(std::string(op) + ": shape mismatch " + z_a.shape_str() + " vs " +
                     z_b.shape_str());
}

}  // namespace detail

// M = (1/N) Za_hat^T Zb_hat on column-standardized batches.
inline Tensor cross_correlation(const Tensor& z_a, const Tensor& z_b,
                                double eps = kStandardizeEps) {
  detail::require_paired_batches(z_a, z_b, "cross_correlation");
  const Tensor a = standardize_columns(z_a, eps);
  const Tensor b = standardize_columns(z_b, eps);
  return scaled(matmul(transpose(a), b), 1.0 / static_cast<double>(z_a.rows));
}

// BT(Z,Z+) = sum_i (1 - M_ii)^2 + lambda * sum_{i != j} M_ij^2.
inline LossValue barlow_twins(const Tensor& z_a, const Tensor& z_b, double lambda,
                              double eps = kStandardizeEps) {
  detail::require_paired_batches(z_a, z_b, "barlow_twins");
  if (lambda < 0.0) throw RangeError("barlow_twins: lambda must be >= 0");
  const std::size_t n = z_a.rows, d = z_a.cols;
  const Tensor a = standardize_columns(z_a, eps);
  const Tensor b = standardize_columns(z_b, eps);
  const Tensor m = scaled(matmul(transpose(a), b), 1.0 / static_cast<double>(n));

  LossValue lv;
  Tensor dm(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        lv.scalar += (1.0 - m(i, j)) * (1.0 - m(i, j));
        dm(i, j) = -2.0 * (1.0 - m(i, j));
      } else {
        lv.scalar += lambda * m(i, j) * m(i, j);
        dm(i, j) = 2.0 * lambda * m(i, j);
      }
    }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Tensor da = scaled(matmul(b, transpose(dm)), inv_n);
  const Tensor db = scaled(matmul(a, dm), inv_n);
  lv.grads["z_a"] = detail::standardize_columns_vjp(z_a, da, eps);
  lv.grads["z_b"] = detail::standardize_columns_vjp(z_b, db, eps);
  return lv;
}

// Mean over i of -log( exp(cos(a_i,b_i)/tau) / sum_k exp(cos(a_i,b_k)/tau) ).
// Negatives are all rows of z_b; the positive pair is kept in the denominator.
inline LossValue info_nce(const Tensor& z_a, const Tensor& z_b, double tau) {
  detail::require_paired_batches(z_a, z_b, "info_nce");
  if (!(tau > 0.0)) throw RangeError("info_nce: tau must be positive");
  const std::size_t n = z_a.rows, d = z_a.cols;
  if (n < 1) throw DataError("info_nce: empty batch");

  std::vector<double> na(n), nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      sa += z_a(i, j) * z_a(i, j);
      sb += z_b(i, j) * z_b(i, j);
    }
    na[i] = std::sqrt(sa);
    nb[i] = std::sqrt(sb);
    if (na[i] == 0.0 || nb[i] == 0.0)
      throw NumericError("info_nce: zero-norm row " + std::to_string(i));
  }

  Tensor cosm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += z_a(i, j) * z_b(k, j);
      cosm(i, k) = dot / (na[i] * nb[k]);
    }

  LossValue lv;
  Tensor dcos(n, n);  // dL/dcos_ik = (P_ik - delta_ik) / (N tau)
  for (std::size_t i = 0; i < n; ++i) {
    double rowmax = cosm(i, 0);
    for (std::size_t k = 1; k < n; ++k) rowmax = std::max(rowmax, cosm(i, k));
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) z += std::exp((cosm(i, k) - rowmax) / tau);
    lv.scalar += -(cosm(i, i) - rowmax) / tau + std::log(z);
    for (std::size_t k = 0; k < n; ++k)
      dcos(i, k) = std::exp((cosm(i, k) - rowmax) / tau) / z / (static_cast<double>(n) * tau);
    dcos(i, i) -= 1.0 / (static_cast<double>(n) * tau);
  }
  lv.scalar /= static_cast<double>(n);

  // d cos(a,b)/da = b/(|a||b|) - cos * a/|a|^2, symmetrically for b
  Tensor da(n, d), db(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double gd = dcos(i, k);
      if (gd == 0.0) continue;
      const double inv_ab = 1.0 / (na[i] * nb[k]);
      const double ca = cosm(i, k) / (na[i] * na[i]);
      const double cb = cosm(i, k) / (nb[k] * nb[k]);
      for (std::size_t j = 0; j < d; ++j) {
        da(i, j) += gd * (z_b(k, j) * inv_ab - ca * z_a(i, j));
        db(k, j) += gd * (z_a(i, j) * inv_ab - cb * z_b(k, j));
      }
    }
  lv.grads["z_a"] = std::move(da);
  lv.grads["z_b"] = std::move(db);
  return lv;
}

// Entropy regularizer between task and proxy features: both batches are
// mapped through the shared projection head R (owned by proxy_params), then
// BT or InfoNCE pulls the projected pairs together. The task model is frozen,
// so the gradient w.r.t. h_task is identically zero; R receives gradients
// from both branches.
//
// grads: "h_task" (zeros), "h_proxy", and "proj_params" as a 1 x P tensor
// aligned with the projection section of proxy_params.
inline LossValue peer_regularizer(const MlpSpec& spec, const ParameterVector& proxy_params,
                                  const Tensor& h_task, const Tensor& h_proxy,
                                  RegObjective objective, double lambda_or_tau) {
  detail::require_paired_batches(h_task, h_proxy, "peer_regularizer");
  const ProjResult pt = proj_forward(spec, proxy_params, h_task);
  const ProjResult pp = proj_forward(spec, proxy_params, h_proxy);

  LossValue inner = (objective == RegObjective::BarlowTwins)
                        ? barlow_twins(pt.projections, pp.projections, lambda_or_tau)
                        : info_nce(pt.projections, pp.projections, lambda_or_tau);

  const ProjBackwardResult bt = proj_backward(spec, proxy_params, pt.cache, inner.grads["z_a"]);
  const ProjBackwardResult bp = proj_backward(spec, proxy_params, pp.cache, inner.grads["z_b"]);

  LossValue lv;
  lv.scalar = inner.scalar;
  lv.grads["h_task"] = Tensor(h_task.rows, h_task.cols);
  lv.grads["h_proxy"] = bp.grad_features;
  Tensor gp(1, bt.grad_proj_params.size());
  for (std::size_t i = 0; i < gp.cols; ++i)
    gp.data[i] = bt.grad_proj_params[i] + bp.grad_proj_params[i];
  lv.grads["proj_params"] = std::move(gp);
  return lv;
}

// L_P = CE(logits_x) + CE(logits_xbar) + w * reg. The regularizer's gradients
// are carried through scaled by w.
inline LossValue proxy_objective(const Tensor& logits_x, const Tensor& logits_xbar,
                                 const std::vector<int>& labels, const LossValue& reg, double w) {
  if (w < 0.0) throw RangeError("proxy_objective: w must be >= 0");
  LossValue ce_x = cross_entropy(logits_x, labels);
  LossValue ce_xbar = cross_entropy(logits_xbar, labels);
  LossValue lv;
  lv.scalar = ce_x.scalar + ce_xbar.scalar + w * reg.scalar;
  lv.grads["logits_x"] = std::move(ce_x.grads["logits"]);
  lv.grads["logits_xbar"] = std::move(ce_xbar.grads["logits"]);
  if (w > 0.0)
    for (const auto& [name, g] : reg.grads) lv.grads[name] = scaled(g, w);
  return lv;
}

}  // namespace peerlab
