#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/params.hpp"

namespace peerlab {

// Central-difference gradient oracle: (f(x + h e_i) - f(x - h e_i)) / 2h per
// coordinate. Every analytic gradient in the repo is validated against this.
inline std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h) {
  if (!(h > 0.0)) throw RangeError("finite_diff_grad: h must be positive");
  std::vector<double> grad(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = f(x);
    x[i] = saved - h;
    const double fm = f(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_grad: non-finite value at coordinate " + std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

inline ParameterVector finite_diff_grad(const std::function<double(const ParameterVector&)>& f,
                                        const ParameterVector& p, double h) {
  ParameterVector probe = p;
  auto wrapped = [&](const std::vector<double>& x) {
    probe.values = x;
    return f(probe);
  };
  ParameterVector grad{p.layout, finite_diff_grad(wrapped, p.values, h)};
  return grad;
}

// Largest relative error between analytic and finite-difference gradients,
// restricted to entries whose reference magnitude exceeds min_magnitude.
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& reference,
                                 double min_magnitude = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double ref = reference[i];
    if (std::fabs(ref) <= min_magnitude) continue;
    const double err = std::fabs(analytic[i] - ref) / std::fabs(ref);
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace peerlab
