#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "peerlab/error.hpp"

namespace peerlab {

// One affine layer: weight stored row-major as in x out, followed by out bias
// values. A Layout is the ordered list of these shapes for a whole network.
struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  bool operator==(const LayerShape&) const = default;
  std::size_t value_count() const { return in * out + out; }
};

using Layout = std::vector<LayerShape>;

inline std::size_t layout_value_count(const Layout& layout) {
  std::size_t n = 0;
  for (const auto& l : layout) n += l.value_count();
  return n;
}

// Flat ordered list of all weights/biases of one network. Two vectors with
// equal layouts are element-aligned: index i refers to the same parameter.
struct ParameterVector {
  Layout layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

inline ParameterVector zeros_like(const ParameterVector& p) {
  return ParameterVector{p.layout, std::vector<double>(p.values.size(), 0.0)};
}

inline void require_same_layout(const ParameterVector& a, const ParameterVector& b,
                                const char* op) {
  if (a.layout != b.layout)
    throw LayoutError(std::string(op) + ": parameter layouts differ");
}

inline void add_in_place(ParameterVector& a, const ParameterVector& b) {
  require_same_layout(a, b, "add_in_place");
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
}

// Elementwise arithmetic mean of the snapshots.
inline ParameterVector average_params(const std::vector<ParameterVector>& snapshots) {
  if (snapshots.empty()) throw DataError("average_params: empty trajectory");
  for (const auto& s : snapshots) require_same_layout(snapshots.front(), s, "average_params");
  ParameterVector out = zeros_like(snapshots.front());
  for (const auto& s : snapshots)
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += s.values[i];
  const double inv = 1.0 / static_cast<double>(snapshots.size());
  for (double& v : out.values) v *= inv;
  return out;
}

struct RunningMean {
  ParameterVector mean;
  std::size_t count = 0;
};

// mean' = mean + (new - mean)/(count+1); the incremental form of the batch
// mean, so a task model never has to retain its snapshot list.
inline RunningMean running_mean_update(const ParameterVector& mean, std::size_t count,
                                       const ParameterVector& next) {
  if (count < 1) throw RangeError("running_mean_update: count must be >= 1");
  require_same_layout(mean, next, "running_mean_update");
  RunningMean out{mean, count + 1};
  const double inv = 1.0 / static_cast<double>(count + 1);
  for (std::size_t i = 0; i < out.mean.values.size(); ++i)
    out.mean.values[i] += (next.values[i] - mean.values[i]) * inv;
  return out;
}

// alpha*a + (1-alpha)*b, endpoints returned exactly.
inline ParameterVector interpolate_params(const ParameterVector& a, const ParameterVector& b,
                                          double alpha) {
  require_same_layout(a, b, "interpolate_params");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("interpolate_params: alpha must be in [0,1], got " + std::to_string(alpha));
  if (alpha == 1.0) return a;
  if (alpha == 0.0) return b;
  ParameterVector out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = alpha * a.values[i] + (1.0 - alpha) * b.values[i];
  return out;
}

}  // namespace peerlab
