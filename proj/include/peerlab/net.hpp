#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/params.hpp"
#include "peerlab/rng.hpp"
#include "peerlab/tensor.hpp"

namespace peerlab {

// Architecture of one model: encoder H (affine+ReLU stack, last layer linear,
// producing feature_dim), classifier C (single affine on features), and
// projection head R (affine+ReLU stack on features, last layer linear,
// producing proj_dims.back()).
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> encoder_dims;  // hidden widths; feature_dim excluded
  std::size_t feature_dim = 0;
  std::size_t num_classes = 0;
  std::vector<std::size_t> proj_dims;  // widths including the output r

  void validate() const {
    if (input_dim < 1 || feature_dim < 1 || num_classes < 1)
      throw ConfigError("MlpSpec: all widths must be >= 1");
    if (encoder_dims.empty()) throw ConfigError("MlpSpec: encoder_dims must be non-empty");
    if (proj_dims.empty()) throw ConfigError("MlpSpec: proj_dims must be non-empty");
    for (std::size_t w : encoder_dims)
      if (w < 1) throw ConfigError("MlpSpec: all widths must be >= 1");
    for (std::size_t w : proj_dims)
      if (w < 1) throw ConfigError("MlpSpec: all widths must be >= 1");
  }

  std::size_t encoder_layer_count() const { return encoder_dims.size() + 1; }
  std::size_t proj_layer_count() const { return proj_dims.size(); }
  std::size_t proj_output_dim() const { return proj_dims.back(); }

  bool operator==(const MlpSpec&) const = default;
};

// Benchmark default: 8x8 glyphs, 8 classes, projection output r=32.
inline MlpSpec default_spec() {
  return MlpSpec{64, {128, 64}, 64, 8, {32, 32}};
}

// Layer order: encoder stack, classifier, projection stack.
inline Layout make_layout(const MlpSpec& spec) {
  spec.validate();
  Layout layout;
  std::size_t prev = spec.input_dim;
  for (std::size_t w : spec.encoder_dims) {
    layout.push_back({prev, w});
    prev = w;
  }
  layout.push_back({prev, spec.feature_dim});
  layout.push_back({spec.feature_dim, spec.num_classes});
  prev = spec.feature_dim;
  for (std::size_t w : spec.proj_dims) {
    layout.push_back({prev, w});
    prev = w;
  }
  return layout;
}

inline std::size_t layer_offset(const Layout& layout, std::size_t layer) {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += layout[l].value_count();
  return off;
}

// Offset of the projection-head section inside the flat value vector.
inline std::size_t proj_section_offset(const MlpSpec& spec) {
  return layer_offset(make_layout(spec), spec.encoder_layer_count() + 1);
}

inline std::size_t proj_section_size(const MlpSpec& spec) {
  const Layout layout = make_layout(spec);
  std::size_t n = 0;
  for (std::size_t l = spec.encoder_layer_count() + 1; l < layout.size(); ++l)
    n += layout[l].value_count();
  return n;
}

// Glorot-uniform weights, zero biases, deterministic under seed.
inline ParameterVector init_model(const MlpSpec& spec, std::int64_t seed) {
  const Layout layout = make_layout(spec);
  ParameterVector p{layout, std::vector<double>(layout_value_count(layout), 0.0)};
  Rng rng(mix_seed(static_cast<std::uint64_t>(seed), 0x1217u));
  std::size_t off = 0;
  for (const auto& l : layout) {
    const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    for (std::size_t i = 0; i < l.in * l.out; ++i) p.values[off + i] = rng.uniform(-bound, bound);
    off += l.value_count();  // biases stay zero
  }
  return p;
}

namespace detail {

inline Tensor weight_tensor(const ParameterVector& p, std::size_t layer, std::size_t off) {
  const LayerShape& l = p.layout[layer];
  Tensor w(l.in, l.out);
  std::memcpy(w.data.data(), p.values.data() + off, l.in * l.out * sizeof(double));
  return w;
}

inline Tensor affine(const Tensor& x, const ParameterVector& p, std::size_t layer,
                     std::size_t off) {
  const LayerShape& l = p.layout[layer];
  Tensor y = matmul(x, weight_tensor(p, layer, off));
  const double* bias = p.values.data() + off + l.in * l.out;
  for (std::size_t i = 0; i < y.rows; ++i)
    for (std::size_t j = 0; j < y.cols; ++j) y(i, j) += bias[j];
  return y;
}

inline Tensor relu(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

// Subgradient 0 at 0.
inline void relu_mask_in_place(Tensor& grad, const Tensor& pre) {
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (!(pre.data[i] > 0.0)) grad.data[i] = 0.0;
}

inline std::uint64_t fnv1a64(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(values.data());
  const std::size_t n = values.size() * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// dW = x^T g, db = column sums of g; returns g W^T for further propagation.
inline Tensor affine_backward(const Tensor& x, const Tensor& g, const ParameterVector& p,
                              std::size_t layer, std::size_t off, std::vector<double>& grad_out) {
  const LayerShape& l = p.layout[layer];
  const Tensor dw = matmul(transpose(x), g);
  std::memcpy(grad_out.data() + off, dw.data.data(), dw.data.size() * sizeof(double));
  double* db = grad_out.data() + off + l.in * l.out;
  for (std::size_t i = 0; i < g.rows; ++i)
    for (std::size_t j = 0; j < g.cols; ++j) db[j] += g(i, j);
  return matmul(g, transpose(weight_tensor(p, layer, off)));
}

}  // namespace detail

struct ForwardCache {
  Tensor input;
  std::vector<Tensor> enc_pre;   // pre-activation per encoder layer
  std::vector<Tensor> enc_post;  // post-activation; back() == features
  std::vector<Tensor> proj_pre;
  std::vector<Tensor> proj_post;  // back() == projections
  std::uint64_t param_hash = 0;
};

struct ForwardResult {
  Tensor features;
  Tensor logits;
  Tensor projections;
  ForwardCache cache;
};

inline ForwardResult forward(const MlpSpec& spec, const ParameterVector& params,
                             const Tensor& batch_x) {
  if (batch_x.cols != spec.input_dim)
    throw ShapeError("forward: batch width " + std::to_string(batch_x.cols) +
                     " does not match input_dim " + std::to_string(spec.input_dim));
  ForwardResult r;
  ForwardCache& c = r.cache;
  c.input = batch_x;
  c.param_hash = detail::fnv1a64(params.values);

  const std::size_t enc_layers = spec.encoder_layer_count();
  std::size_t off = 0;
  Tensor cur = batch_x;
  for (std::size_t l = 0; l < enc_layers; ++l) {
    Tensor pre = detail::affine(cur, params, l, off);
    off += params.layout[l].value_count();
    cur = (l + 1 < enc_layers) ? detail::relu(pre) : pre;  // last encoder layer linear
    c.enc_pre.push_back(std::move(pre));
    c.enc_post.push_back(cur);
  }
  r.features = cur;

  r.logits = detail::affine(r.features, params, enc_layers, off);
  off += params.layout[enc_layers].value_count();

  const std::size_t proj_layers = spec.proj_layer_count();
  cur = r.features;
  for (std::size_t l = 0; l < proj_layers; ++l) {
    const std::size_t layer = enc_layers + 1 + l;
    Tensor pre = detail::affine(cur, params, layer, off);
    off += params.layout[layer].value_count();
    cur = (l + 1 < proj_layers) ? detail::relu(pre) : pre;
    c.proj_pre.push_back(std::move(pre));
    c.proj_post.push_back(cur);
  }
  r.projections = cur;
  return r;
}

// Reverse-mode gradient of the scalar whose upstream sensitivities are given.
// Any of the three upstream gradients may be empty, meaning all-zero.
inline ParameterVector backward(const MlpSpec& spec, const ParameterVector& params,
                                const ForwardCache& cache, const Tensor& grad_logits,
                                const Tensor& grad_projections, const Tensor& grad_features) {
  if (detail::fnv1a64(params.values) != cache.param_hash)
    throw StaleCacheError("backward: cache does not match parameters");
  ParameterVector grad = zeros_like(params);

  const std::size_t enc_layers = spec.encoder_layer_count();
  const Tensor& features = cache.enc_post.back();
  const std::size_t n = features.rows;
  Tensor g_feat = grad_features.empty() ? Tensor(n, spec.feature_dim) : grad_features;
  if (g_feat.rows != n || g_feat.cols != spec.feature_dim)
    throw ShapeError("backward: grad_features shape " + g_feat.shape_str());

  if (!grad_logits.empty()) {
    if (grad_logits.rows != n || grad_logits.cols != spec.num_classes)
      throw ShapeError("backward: grad_logits shape " + grad_logits.shape_str());
    const std::size_t off = layer_offset(params.layout, enc_layers);
    add_in_place(g_feat, detail::affine_backward(features, grad_logits, params, enc_layers, off,
                                                 grad.values));
  }

  if (!grad_projections.empty()) {
    if (grad_projections.rows != n || grad_projections.cols != spec.proj_output_dim())
      throw ShapeError("backward: grad_projections shape " + grad_projections.shape_str());
    Tensor g = grad_projections;
    for (std::size_t l = spec.proj_layer_count(); l-- > 0;) {
      const std::size_t layer = enc_layers + 1 + l;
      const Tensor& x = (l == 0) ? features : cache.proj_post[l - 1];
      const std::size_t off = layer_offset(params.layout, layer);
      g = detail::affine_backward(x, g, params, layer, off, grad.values);
      if (l > 0) detail::relu_mask_in_place(g, cache.proj_pre[l - 1]);
    }
    add_in_place(g_feat, g);
  }

  Tensor g = std::move(g_feat);
  for (std::size_t l = enc_layers; l-- > 0;) {
    const Tensor& x = (l == 0) ? cache.input : cache.enc_post[l - 1];
    const std::size_t off = layer_offset(params.layout, l);
    Tensor g_prev = detail::affine_backward(x, g, params, l, off, grad.values);
    if (l > 0) {
      detail::relu_mask_in_place(g_prev, cache.enc_pre[l - 1]);
      g = std::move(g_prev);
    }
  }
  return grad;
}

// Projection-head-only forward/backward, used where the shared head R is
// applied outside a full model pass (the regularizer projects both feature
// batches through one head).
struct ProjCache {
  Tensor input;
  std::vector<Tensor> pre;
  std::vector<Tensor> post;
};

struct ProjResult {
  Tensor projections;
  ProjCache cache;
};

inline ProjResult proj_forward(const MlpSpec& spec, const ParameterVector& params,
                               const Tensor& features) {
  if (features.cols != spec.feature_dim)
    throw ShapeError("proj_forward: feature width " + std::to_string(features.cols));
  ProjResult r;
  r.cache.input = features;
  const std::size_t enc_layers = spec.encoder_layer_count();
  std::size_t off = proj_section_offset(spec);
  Tensor cur = features;
  for (std::size_t l = 0; l < spec.proj_layer_count(); ++l) {
    const std::size_t layer = enc_layers + 1 + l;
    Tensor pre = detail::affine(cur, params, layer, off);
    off += params.layout[layer].value_count();
    cur = (l + 1 < spec.proj_layer_count()) ? detail::relu(pre) : pre;
    r.cache.pre.push_back(std::move(pre));
    r.cache.post.push_back(cur);
  }
  r.projections = cur;
  return r;
}

struct ProjBackwardResult {
  Tensor grad_features;
  std::vector<double> grad_proj_params;  // proj section only, layout order
};

inline ProjBackwardResult proj_backward(const MlpSpec& spec, const ParameterVector& params,
                                        const ProjCache& cache, const Tensor& grad_projections) {
  const std::size_t enc_layers = spec.encoder_layer_count();
  const std::size_t section_off = proj_section_offset(spec);
  ProjBackwardResult out;
  out.grad_proj_params.assign(params.values.size(), 0.0);
  Tensor g = grad_projections;
  for (std::size_t l = spec.proj_layer_count(); l-- > 0;) {
    const std::size_t layer = enc_layers + 1 + l;
    const Tensor& x = (l == 0) ? cache.input : cache.post[l - 1];
    const std::size_t off = layer_offset(params.layout, layer);
    g = detail::affine_backward(x, g, params, layer, off, out.grad_proj_params);
    if (l > 0) detail::relu_mask_in_place(g, cache.pre[l - 1]);
  }
  out.grad_features = std::move(g);
  out.grad_proj_params.erase(out.grad_proj_params.begin(),
                             out.grad_proj_params.begin() + static_cast<std::ptrdiff_t>(section_off));
  return out;
}

// Encoder activations on a probe batch: each hidden output plus the feature
// output. These are the layers compared by the CKA diagnostics.
inline std::vector<Tensor> encoder_activations(const MlpSpec& spec, const ParameterVector& params,
                                               const Tensor& batch_x) {
  return forward(spec, params, batch_x).cache.enc_post;
}

}  // namespace peerlab
