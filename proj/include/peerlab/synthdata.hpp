#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/rng.hpp"
#include "peerlab/tensor.hpp"

namespace peerlab {

inline constexpr std::size_t kGlyphSide = 8;
inline constexpr std::size_t kGlyphPixels = kGlyphSide * kGlyphSide;
inline constexpr std::size_t kNumClasses = 8;

// One shifted variant of the benchmark. The source domain is the identity
// spec; targets stack rotation / intensity / noise / occlusion shifts.
struct DomainSpec {
  std::string name;
  double rotation_deg = 0.0;
  double intensity_scale = 1.0;
  double intensity_offset = 0.0;
  double noise_std = 0.0;
  double occlusion_frac = 0.0;
  std::int64_t seed_offset = 0;

  void validate() const {
    if (occlusion_frac < 0.0 || occlusion_frac > 1.0)
      throw RangeError("DomainSpec: occlusion_frac must be in [0,1]");
    if (noise_std < 0.0) throw RangeError("DomainSpec: noise_std must be >= 0");
  }
};

struct GlyphDataset {
  Tensor x;  // N x 64
  std::vector<int> y;
  DomainSpec domain;

  std::size_t size() const { return y.size(); }
};

// Fixed binary stencils for classes 0..7: ring, blob, plus, tee, ell, cup,
// bars, diag. Chosen so that no two are near-rotations of each other.
inline const std::array<double, kGlyphPixels>& glyph_template(int cls) {
  static const std::array<std::array<const char*, 8>, kNumClasses> rows = {{
      {"........", ".######.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".######.",
       "........"},  // ring
      {"........", "........", "..####..", "..####..", "..####..", "..####..", "........",
       "........"},  // blob
      {"...##...", "...##...", "########", "########", "...##...", "...##...", "...##...",
       "...##..."},  // plus
      {"########", "########", "...##...", "...##...", "...##...", "...##...", "...##...",
       "...##..."},  // tee
      {".##.....", ".##.....", ".##.....", ".##.....", ".##.....", ".##.....", ".#######",
       ".#######"},  // ell
      {".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".######.",
       ".######."},  // cup
      {"########", "########", "........", "........", "########", "########", "........",
       "........"},  // bars
      {"##......", "###.....", ".###....", "..###...", "...###..", "....###.", ".....###",
       "......##"},  // diag
  }};
  static const auto tables = [] {
    std::array<std::array<double, kGlyphPixels>, kNumClasses> t{};
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (std::size_t r = 0; r < kGlyphSide; ++r)
        for (std::size_t j = 0; j < kGlyphSide; ++j)
          t[c][r * kGlyphSide + j] = rows[c][r][j] == '#' ? 1.0 : 0.0;
    return t;
  }();
  if (cls < 0 || static_cast<std::size_t>(cls) >= kNumClasses)
    throw DataError("glyph_template: class " + std::to_string(cls) + " out of range");
  return tables[static_cast<std::size_t>(cls)];
}

namespace img {

// Shift by (dr, dc) with zero fill.
inline void translate(std::array<double, kGlyphPixels>& px, int dr, int dc) {
  std::array<double, kGlyphPixels> out{};
  const int side = static_cast<int>(kGlyphSide);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int sr = r - dr, sc = c - dc;
      if (sr >= 0 && sr < side && sc >= 0 && sc < side)
        out[static_cast<std::size_t>(r * side + c)] =
            px[static_cast<std::size_t>(sr * side + sc)];
    }
  px = out;
}

// Nearest-neighbor rotation about the grid center (3.5, 3.5); exact pixel
// permutation at multiples of 90 degrees. Out-of-bounds sources read as 0.
inline void rotate(std::array<double, kGlyphPixels>& px, double deg) {
  if (deg == 0.0) return;
  const double th = deg * std::numbers::pi / 180.0;
  const double ct = std::cos(th), st = std::sin(th);
  const double cy = (kGlyphSide - 1) / 2.0;
  const int side = static_cast<int>(kGlyphSide);
  std::array<double, kGlyphPixels> out{};
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const double dr = r - cy, dc = c - cy;
      const long sr = std::lround(cy + ct * dr + st * dc);
      const long sc = std::lround(cy - st * dr + ct * dc);
      if (sr >= 0 && sr < side && sc >= 0 && sc < side)
        out[static_cast<std::size_t>(r * side + c)] =
            px[static_cast<std::size_t>(sr * side + sc)];
    }
  px = out;
}

inline void occlude(std::array<double, kGlyphPixels>& px, int side_len, Rng& rng) {
  const int side = static_cast<int>(kGlyphSide);
  side_len = std::clamp(side_len, 0, side);
  if (side_len == 0) return;
  const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - side_len + 1)));
  const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(side - side_len + 1)));
  for (int r = r0; r < r0 + side_len; ++r)
    for (int c = c0; c < c0 + side_len; ++c) px[static_cast<std::size_t>(r * side + c)] = 0.0;
}

}  // namespace img

// Procedural domain generation: per sample, the class stencil is jittered by
// +-1px, rotated, intensity-shifted, clamped to [0,1], then noised and
// occluded (final values unclamped). Deterministic under (spec, n, seed).
inline GlyphDataset generate_domain(const DomainSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n < kNumClasses)
    throw DataError("generate_domain: need at least 8 samples, got " + std::to_string(n));

  GlyphDataset ds;
  ds.domain = spec;
  ds.x = Tensor(n, kGlyphPixels);
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.y[i] = static_cast<int>(i % kNumClasses);
  {
    Rng shuffle_rng(mix_seed(seed, static_cast<std::uint64_t>(spec.seed_offset), 0x5afful));
    for (std::size_t i = n; i-- > 1;)
      std::swap(ds.y[i], ds.y[shuffle_rng.below(i + 1)]);
  }

  const int occ_side =
      spec.occlusion_frac > 0.0
          ? static_cast<int>(std::lround(std::sqrt(spec.occlusion_frac * kGlyphPixels)))
          : 0;

  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(spec.seed_offset), i));
    std::array<double, kGlyphPixels> px = glyph_template(ds.y[i]);
    const int dr = static_cast<int>(rng.below(3)) - 1;
    const int dc = static_cast<int>(rng.below(3)) - 1;
    img::translate(px, dr, dc);
    img::rotate(px, spec.rotation_deg);
    for (double& v : px) v = std::clamp(v * spec.intensity_scale + spec.intensity_offset, 0.0, 1.0);
    if (spec.noise_std > 0.0)
      for (double& v : px) v += spec.noise_std * rng.gaussian();
    if (occ_side > 0) img::occlude(px, occ_side, rng);
    std::copy(px.begin(), px.end(), ds.x.data.begin() + static_cast<std::ptrdiff_t>(i * kGlyphPixels));
  }
  return ds;
}

// Source plus four targets with escalating shifts.
inline std::vector<DomainSpec> default_domains() {
  return {
      DomainSpec{"source", 0.0, 1.0, 0.0, 0.0, 0.0, 0},
      DomainSpec{"target_a", 30.0, 1.0, 0.0, 0.0, 0.0, 1},
      DomainSpec{"target_b", 0.0, 0.6, 0.2, 0.0, 0.0, 2},
      DomainSpec{"target_c", 0.0, 1.0, 0.0, 0.25, 0.0, 3},
      DomainSpec{"target_d", 45.0, 1.0, 0.0, 0.0, 0.25, 4},
  };
}

enum class AugOp { Rotate, Intensity, Noise, Occlude, Translate };

inline std::string aug_op_name(AugOp op) {
  switch (op) {
    case AugOp::Rotate: return "rotate";
    case AugOp::Intensity: return "intensity";
    case AugOp::Noise: return "noise";
    case AugOp::Occlude: return "occlude";
    case AugOp::Translate: return "translate";
  }
  return "?";
}

// A sampled augmentation configuration: an ordered op subset and a shared
// magnitude. magnitude 0 makes apply_policy the identity map.
struct AugPolicy {
  std::vector<AugOp> ops;
  int num_ops = 1;
  double magnitude = 0.0;
  std::uint64_t policy_seed = 0;
};

// num_ops ~ U{1,2,3}; magnitude ~ U{0.1,...,1.0}; ops a uniform subset drawn
// without replacement.
inline AugPolicy reinit_policy(std::uint64_t rng_seed) {
  Rng rng(mix_seed(rng_seed, 0x90CCul));
  AugPolicy p;
  p.policy_seed = rng_seed;
  p.num_ops = 1 + static_cast<int>(rng.below(3));
  p.magnitude = static_cast<double>(1 + rng.below(10)) / 10.0;
  std::array<AugOp, 5> all = {AugOp::Rotate, AugOp::Intensity, AugOp::Noise, AugOp::Occlude,
                              AugOp::Translate};
  for (int i = 0; i < p.num_ops; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) + rng.below(all.size() - static_cast<std::size_t>(i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
    p.ops.push_back(all[static_cast<std::size_t>(i)]);
  }
  return p;
}

// Applies each op in order with strength proportional to magnitude m:
// rotate up to +-45m deg; intensity scale in [1-0.5m, 1+0.5m]; noise std
// 0.3m; occlusion block of ceil(8m) px per side capped at 4; translate up to
// ceil(2m) px. Per-sample randomness is derived from
// (policy_seed, call_seed, sample index).
inline Tensor apply_policy(const AugPolicy& policy, const Tensor& batch,
                           std::uint64_t call_seed) {
  if (batch.cols != kGlyphPixels)
    throw ShapeError("apply_policy: batch width " + std::to_string(batch.cols) + ", expected 64");
  if (policy.magnitude == 0.0) return batch;

  const double m = policy.magnitude;
  Tensor out = batch;
  for (std::size_t i = 0; i < batch.rows; ++i) {
    Rng rng(mix_seed(policy.policy_seed, call_seed, i));
    std::array<double, kGlyphPixels> px;
    std::copy(batch.data.begin() + static_cast<std::ptrdiff_t>(i * kGlyphPixels),
              batch.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * kGlyphPixels),
              px.begin());
    for (AugOp op : policy.ops) {
      switch (op) {
        case AugOp::Rotate:
          img::rotate(px, rng.uniform(-45.0 * m, 45.0 * m));
          break;
        case AugOp::Intensity: {
          const double s = rng.uniform(1.0 - 0.5 * m, 1.0 + 0.5 * m);
          for (double& v : px) v *= s;
          break;
        }
        case AugOp::Noise:
          for (double& v : px) v += 0.3 * m * rng.gaussian();
          break;
        case AugOp::Occlude:
          img::occlude(px, std::min(static_cast<int>(std::ceil(8.0 * m)), 4), rng);
          break;
        case AugOp::Translate: {
          const int t = static_cast<int>(std::ceil(2.0 * m));
          const int dr = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * t + 1))) - t;
          const int dc = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * t + 1))) - t;
          img::translate(px, dr, dc);
          break;
        }
      }
    }
    std::copy(px.begin(), px.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * kGlyphPixels));
  }
  return out;
}

// Augmentation never touches the label channel.
inline GlyphDataset augment_dataset(const GlyphDataset& ds, const AugPolicy& policy,
                                    std::uint64_t call_seed) {
  GlyphDataset out = ds;
  out.x = apply_policy(policy, ds.x, call_seed);
  return out;
}

}  // namespace peerlab
