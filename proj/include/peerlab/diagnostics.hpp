#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/losses.hpp"
#include "peerlab/net.hpp"
#include "peerlab/params.hpp"
#include "peerlab/synthdata.hpp"
#include "peerlab/tensor.hpp"
#include "peerlab/trainer.hpp"

namespace peerlab {

namespace detail {

inline Tensor center_columns(const Tensor& t) {
  const auto mu = column_means(t);
  Tensor out = t;
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) out(i, j) -= mu[j];
  return out;
}

inline double frobenius_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

// Linear CKA between two activation batches on a shared probe:
//   ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F ||Yc^T Yc||_F)
// Invariant to orthogonal transforms and nonzero isotropic scaling.
inline double linear_cka(const Tensor& x, const Tensor& y) {
  if (x.rows != y.rows)
    throw ShapeError("linear_cka: row counts differ, " + x.shape_str() + " vs " + y.shape_str());
  if (x.rows < 3) throw DataError("linear_cka: need at least 3 rows");
  const Tensor xc = detail::center_columns(x);
  const Tensor yc = detail::center_columns(y);
  const double cross = detail::frobenius_norm(matmul(transpose(yc), xc));
  const double nx = detail::frobenius_norm(matmul(transpose(xc), xc));
  const double ny = detail::frobenius_norm(matmul(transpose(yc), yc));
  if (nx == 0.0 || ny == 0.0) throw NumericError("linear_cka: degenerate (constant) features");
  return cross * cross / (nx * ny);
}

// Pairwise layer similarity between two models on a probe batch. Degenerate
// entries (constant activations) are flagged and reported as -1 rather than
// failing the whole matrix.
struct CkaMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> degenerate;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  bool flagged(std::size_t i, std::size_t j) const { return degenerate[i * cols + j] != 0; }

  double mean_diagonal() const {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(rows, cols); ++i)
      if (!flagged(i, i)) {
        s += (*this)(i, i);
        ++n;
      }
    return n ? s / static_cast<double>(n) : 0.0;
  }
};

inline CkaMatrix layerwise_cka(const MlpSpec& spec, const ParameterVector& params_a,
                               const ParameterVector& params_b, const GlyphDataset& probe) {
  if (probe.size() == 0) throw DataError("layerwise_cka: empty probe");
  const auto acts_a = encoder_activations(spec, params_a, probe.x);
  const auto acts_b = encoder_activations(spec, params_b, probe.x);
  CkaMatrix m;
  m.rows = acts_a.size();
  m.cols = acts_b.size();
  m.values.assign(m.rows * m.cols, 0.0);
  m.degenerate.assign(m.rows * m.cols, 0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) {
      try {
        m.values[i * m.cols + j] = linear_cka(acts_a[i], acts_b[j]);
      } catch (const NumericError&) {
        m.values[i * m.cols + j] = -1.0;
        m.degenerate[i * m.cols + j] = 1;
      }
    }
  return m;
}

// CE loss and accuracy along the line alpha*theta_a + (1-alpha)*theta_b.
struct BarrierCurve {
  std::vector<double> alphas;
  std::vector<std::string> domains;
  std::vector<std::vector<double>> loss;      // [alpha][domain]
  std::vector<std::vector<double>> accuracy;  // [alpha][domain]
};

inline BarrierCurve barrier_scan(const MlpSpec& spec, const ParameterVector& theta_a,
                                 const ParameterVector& theta_b, std::size_t grid_size,
                                 const std::vector<GlyphDataset>& datasets) {
  require_same_layout(theta_a, theta_b, "barrier_scan");
  if (grid_size < 3) throw RangeError("barrier_scan: grid_size must be >= 3");
  BarrierCurve curve;
  for (const auto& ds : datasets) curve.domains.push_back(ds.domain.name);
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double alpha = static_cast<double>(g) / static_cast<double>(grid_size - 1);
    const ParameterVector p = interpolate_params(theta_a, theta_b, alpha);
    std::vector<double> losses, accs;
    for (const auto& ds : datasets) {
      const ForwardResult f = forward(spec, p, ds.x);
      losses.push_back(cross_entropy(f.logits, ds.y).scalar);
      double correct = 0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < f.logits.cols; ++j)
          if (f.logits(i, j) > f.logits(i, best)) best = j;
        if (static_cast<int>(best) == ds.y[i]) ++correct;
      }
      accs.push_back(correct / static_cast<double>(ds.size()));
    }
    curve.alphas.push_back(alpha);
    curve.loss.push_back(std::move(losses));
    curve.accuracy.push_back(std::move(accs));
  }
  return curve;
}

// max over the grid of loss minus the worse endpoint loss.
inline double barrier_height(const BarrierCurve& curve, std::size_t domain_idx) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& row : curve.loss) peak = std::max(peak, row[domain_idx]);
  const double ends = std::max(curve.loss.front()[domain_idx], curve.loss.back()[domain_idx]);
  return peak - ends;
}

enum class ModelKind { Task, Proxy };

// Population variance of the recorded accuracy sequence, in percentage
// points (the scale the fluctuation tables use).
inline double fluctuation(const MetricsRecord& metrics, const std::string& domain,
                          ModelKind model = ModelKind::Task) {
  std::vector<double> acc;
  for (const auto& pt : metrics.points) {
    const auto& scores = model == ModelKind::Task ? pt.task : pt.proxy;
    for (const auto& s : scores)
      if (s.domain == domain) acc.push_back(s.accuracy * 100.0);
  }
  if (acc.size() < 2)
    throw DataError("fluctuation: need at least 2 evaluation points for domain '" + domain + "'");
  double mean = 0.0;
  for (double a : acc) mean += a;
  mean /= static_cast<double>(acc.size());
  double var = 0.0;
  for (double a : acc) var += (a - mean) * (a - mean);
  return var / static_cast<double>(acc.size());
}

// Entropic optimal transport via log-domain Sinkhorn iterations.
struct SinkhornResult {
  Tensor plan;
  double transport_cost = 0.0;  // sum_ij P_ij C_ij; entropy term excluded
  bool converged = false;
  std::size_t iterations = 0;
};

namespace detail {

// One Gauss-Seidel log-domain Sinkhorn solve. The g-update reads the fresh f,
// so column marginals are exact after every iteration and row marginals
// converge; the marginal check runs every few iterations.
inline SinkhornResult sinkhorn_one_sided(const Tensor& cost, const std::vector<double>& a,
                                         const std::vector<double>& b, double reg,
                                         std::size_t max_iter, double tol) {
  const std::size_t n = cost.rows, m = cost.cols;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> loga(n), logb(m), f(n, 0.0), g(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) loga[i] = a[i] > 0.0 ? std::log(a[i]) : neg_inf;
  for (std::size_t j = 0; j < m; ++j) logb[j] = b[j] > 0.0 ? std::log(b[j]) : neg_inf;

  SinkhornResult res;
  res.plan = Tensor(n, m);
  std::vector<double> row(m), col(n);
  constexpr std::size_t kCheckEvery = 5;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      if (loga[i] == neg_inf) {
        f[i] = neg_inf;
        continue;
      }
      double mx = neg_inf;
      for (std::size_t j = 0; j < m; ++j) {
        row[j] = (g[j] - cost(i, j)) / reg;
        mx = std::max(mx, row[j]);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp(row[j] - mx);
      f[i] = reg * (loga[i] - (mx + std::log(s)));
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (logb[j] == neg_inf) {
        g[j] = neg_inf;
        continue;
      }
      double mx = neg_inf;
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = (f[i] - cost(i, j)) / reg;
        mx = std::max(mx, col[i]);
      }
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::exp(col[i] - mx);
      g[j] = reg * (logb[j] - (mx + std::log(s)));
    }
    res.iterations = it;

    if (it % kCheckEvery != 0 && it != max_iter) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        res.plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / reg);
    double viol = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += res.plan(i, j);
      viol = std::max(viol, std::fabs(s - a[i]));
    }
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += res.plan(i, j);
      viol = std::max(viol, std::fabs(s - b[j]));
    }
    if (viol < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace detail

// Solves both transposed orientations and averages the plans. Alternating
// updates favor one marginal, so a single solve stopped at max_iter is not
// transpose-symmetric; averaging the two orientations makes the result exactly
// symmetric under (cost, a, b) -> (cost^T, b, a) at any iteration count, and
// each orientation keeps plain Gauss-Seidel convergence speed.
inline SinkhornResult sinkhorn(const Tensor& cost, const std::vector<double>& a,
                               const std::vector<double>& b, double reg,
                               std::size_t max_iter = 2000, double tol = 1e-9) {
  if (a.size() != cost.rows || b.size() != cost.cols)
    throw ShapeError("sinkhorn: marginal sizes do not match cost " + cost.shape_str());
  if (!(reg > 0.0)) throw RangeError("sinkhorn: reg must be positive");
  auto check_marginal = [](const std::vector<double>& m, const char* name) {
    double s = 0.0;
    for (double v : m) {
      if (v < 0.0) throw DataError(std::string("sinkhorn: negative weight in ") + name);
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw DataError(std::string("sinkhorn: ") + name + " must sum to 1, got " +
                      std::to_string(s));
  };
  check_marginal(a, "a");
  check_marginal(b, "b");

  const SinkhornResult fwd = detail::sinkhorn_one_sided(cost, a, b, reg, max_iter, tol);
  const SinkhornResult bwd = detail::sinkhorn_one_sided(transpose(cost), b, a, reg, max_iter, tol);

  SinkhornResult res;
  res.plan = Tensor(cost.rows, cost.cols);
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      res.plan(i, j) = 0.5 * (fwd.plan(i, j) + bwd.plan(j, i));
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j)
      res.transport_cost += res.plan(i, j) * cost(i, j);
  res.converged = fwd.converged && bwd.converged;
  res.iterations = std::max(fwd.iterations, bwd.iterations);
  return res;
}

namespace detail {

struct ClassSummary {
  std::vector<double> mean;
  double trace_sqrt = 0.0;  // sqrt of the covariance trace
};

inline std::vector<ClassSummary> class_summaries(const GlyphDataset& ds, int num_classes,
                                                 const char* which) {
  std::vector<ClassSummary> out(static_cast<std::size_t>(num_classes));
  const std::size_t d = ds.x.cols;
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (auto& s : out) s.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto c = static_cast<std::size_t>(ds.y[i]);
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) out[c].mean[j] += ds.x(i, j);
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (counts[c] == 0)
      throw DataError(std::string("dataset_distance: class ") + std::to_string(c) +
                      " missing from dataset " + which);
    for (double& v : out[c].mean) v /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto c = static_cast<std::size_t>(ds.y[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = ds.x(i, j) - out[c].mean[j];
      out[c].trace_sqrt += dv * dv;  // accumulate trace numerator first
    }
  }
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c].trace_sqrt = std::sqrt(out[c].trace_sqrt / static_cast<double>(counts[c]));
  return out;
}

}  // namespace detail

// Label-aware entropic-OT distance. Ground cost between samples is
// ||x - x'||^2 plus the squared distance between the class-conditional
// Gaussian summaries (mean + covariance-trace term) of the two labels; the
// plan is solved on uniform marginals with costs normalized by their mean.
inline double dataset_distance(const GlyphDataset& d_a, const GlyphDataset& d_b,
                               double reg = 1e-2) {
  if (d_a.size() == 0 || d_b.size() == 0) throw DataError("dataset_distance: empty dataset");
  if (d_a.x.cols != d_b.x.cols)
    throw ShapeError("dataset_distance: dimensionality mismatch " + d_a.x.shape_str() + " vs " +
                     d_b.x.shape_str());
  int num_classes = 0;
  for (int y : d_a.y) num_classes = std::max(num_classes, y + 1);
  for (int y : d_b.y) num_classes = std::max(num_classes, y + 1);

  const auto sum_a = detail::class_summaries(d_a, num_classes, "A");
  const auto sum_b = detail::class_summaries(d_b, num_classes, "B");

  Tensor label_cost(static_cast<std::size_t>(num_classes), static_cast<std::size_t>(num_classes));
  for (std::size_t ca = 0; ca < label_cost.rows; ++ca)
    for (std::size_t cb = 0; cb < label_cost.cols; ++cb) {
      double mean_sq = 0.0;
      for (std::size_t j = 0; j < sum_a[ca].mean.size(); ++j) {
        const double dv = sum_a[ca].mean[j] - sum_b[cb].mean[j];
        mean_sq += dv * dv;
      }
      const double dt = sum_a[ca].trace_sqrt - sum_b[cb].trace_sqrt;
      label_cost(ca, cb) = mean_sq + dt * dt;
    }

  Tensor cost(d_a.size(), d_b.size());
  double mean_cost = 0.0;
  for (std::size_t i = 0; i < d_a.size(); ++i)
    for (std::size_t j = 0; j < d_b.size(); ++j) {
      double sq = 0.0;
      for (std::size_t p = 0; p < d_a.x.cols; ++p) {
        const double dv = d_a.x(i, p) - d_b.x(j, p);
        sq += dv * dv;
      }
      const double c = sq + label_cost(static_cast<std::size_t>(d_a.y[i]),
                                       static_cast<std::size_t>(d_b.y[j]));
      cost(i, j) = c;
      mean_cost += c;
    }
  mean_cost /= static_cast<double>(d_a.size() * d_b.size());
  if (mean_cost == 0.0) return 0.0;

  Tensor norm_cost = scaled(cost, 1.0 / mean_cost);
  const std::vector<double> ua(d_a.size(), 1.0 / static_cast<double>(d_a.size()));
  const std::vector<double> ub(d_b.size(), 1.0 / static_cast<double>(d_b.size()));
  const SinkhornResult res = sinkhorn(norm_cost, ua, ub, reg);
  return res.transport_cost * mean_cost;
}

}  // namespace peerlab
