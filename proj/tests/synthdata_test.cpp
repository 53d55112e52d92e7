#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>

#include "peerlab/synthdata.hpp"

using namespace peerlab;

namespace {

// All nine +-1px jitters of a template, via an independent index-mapping.
std::vector<std::array<double, kGlyphPixels>> jitter_variants(
    const std::array<double, kGlyphPixels>& base) {
  std::vector<std::array<double, kGlyphPixels>> out;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      std::array<double, kGlyphPixels> v{};
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
          const int sr = r - dr, sc = c - dc;
          if (sr >= 0 && sr < 8 && sc >= 0 && sc < 8)
            v[static_cast<std::size_t>(r * 8 + c)] = base[static_cast<std::size_t>(sr * 8 + sc)];
        }
      out.push_back(v);
    }
  return out;
}

bool rows_equal(const Tensor& x, std::size_t i, const std::array<double, kGlyphPixels>& v) {
  for (std::size_t j = 0; j < kGlyphPixels; ++j)
    if (x(i, j) != v[j]) return false;
  return true;
}

}  // namespace

TEST_CASE("identity domain emits exactly jittered templates") {
  const DomainSpec identity{"id", 0.0, 1.0, 0.0, 0.0, 0.0, 0};
  const GlyphDataset ds = generate_domain(identity, 64, 5);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto variants = jitter_variants(glyph_template(ds.y[i]));
    bool found = false;
    for (const auto& v : variants) found = found || rows_equal(ds.x, i, v);
    REQUIRE(found);
  }
}

TEST_CASE("generate_domain is deterministic and balanced") {
  const DomainSpec spec{"t", 20.0, 0.8, 0.1, 0.1, 0.1, 3};
  const GlyphDataset a = generate_domain(spec, 128, 9);
  const GlyphDataset b = generate_domain(spec, 128, 9);
  REQUIRE(a.x.data == b.x.data);
  REQUIRE(a.y == b.y);
  std::array<int, kNumClasses> counts{};
  for (int y : a.y) counts[static_cast<std::size_t>(y)]++;
  for (int c : counts) REQUIRE(c == 16);

  const GlyphDataset odd = generate_domain(spec, 131, 9);
  std::array<int, kNumClasses> oc{};
  for (int y : odd.y) oc[static_cast<std::size_t>(y)]++;
  for (int c : oc) {
    REQUIRE(c >= 16);
    REQUIRE(c <= 17);
  }
}

TEST_CASE("generate_domain rejects tiny datasets") {
  REQUIRE_THROWS_AS(generate_domain(DomainSpec{"x"}, 7, 1), DataError);
}

TEST_CASE("90 degree rotation is the reference pixel permutation") {
  std::array<double, kGlyphPixels> img = glyph_template(7);  // diag: asymmetric
  std::array<double, kGlyphPixels> want{};
  // independent oracle: dest(r,c) = src(c, 7-r)
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      want[static_cast<std::size_t>(r * 8 + c)] = img[static_cast<std::size_t>(c * 8 + (7 - r))];
  img::rotate(img, 90.0);
  REQUIRE(img == want);
}

TEST_CASE("rotation by 360 degrees is the identity") {
  std::array<double, kGlyphPixels> img = glyph_template(4);
  const auto orig = img;
  img::rotate(img, 360.0);
  REQUIRE(img == orig);
}

TEST_CASE("reinit_policy is deterministic") {
  const AugPolicy a = reinit_policy(123);
  const AugPolicy b = reinit_policy(123);
  REQUIRE(a.ops == b.ops);
  REQUIRE(a.num_ops == b.num_ops);
  REQUIRE(a.magnitude == b.magnitude);
}

TEST_CASE("reinit_policy uniform num_ops and grid magnitudes") {
  std::array<int, 4> counts{};
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const AugPolicy p = reinit_policy(s);
    REQUIRE(p.num_ops >= 1);
    REQUIRE(p.num_ops <= 3);
    REQUIRE(static_cast<int>(p.ops.size()) == p.num_ops);
    counts[static_cast<std::size_t>(p.num_ops)]++;
    const double scaled10 = p.magnitude * 10.0;
    REQUIRE(std::fabs(scaled10 - std::round(scaled10)) < 1e-12);
    REQUIRE(p.magnitude >= 0.1);
    REQUIRE(p.magnitude <= 1.0);
    const std::set<AugOp> uniq(p.ops.begin(), p.ops.end());
    REQUIRE(uniq.size() == p.ops.size());  // without replacement
  }
  for (int n = 1; n <= 3; ++n)
    REQUIRE(std::fabs(counts[static_cast<std::size_t>(n)] / 10000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("apply_policy at magnitude zero is the identity, bit-exact") {
  const GlyphDataset ds = generate_domain(default_domains()[0], 32, 4);
  AugPolicy p{{AugOp::Rotate, AugOp::Noise}, 2, 0.0, 99};
  const Tensor out = apply_policy(p, ds.x, 7);
  REQUIRE(out.data == ds.x.data);
}

TEST_CASE("apply_policy is deterministic and shape preserving") {
  const GlyphDataset ds = generate_domain(default_domains()[0], 32, 4);
  const AugPolicy p = reinit_policy(11);
  const Tensor a = apply_policy(p, ds.x, 21);
  const Tensor b = apply_policy(p, ds.x, 21);
  REQUIRE(a.data == b.data);
  REQUIRE(a.rows == ds.x.rows);
  REQUIRE(a.cols == ds.x.cols);
}

TEST_CASE("noise-only policy has the declared output std") {
  const GlyphDataset ds = generate_domain(default_domains()[0], 10000, 6);
  AugPolicy p{{AugOp::Noise}, 1, 0.5, 42};
  const Tensor out = apply_policy(p, ds.x, 1);
  double sum = 0.0, sq = 0.0;
  const double n = static_cast<double>(out.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double d = out.data[i] - ds.x.data[i];
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sq / n - mean * mean);
  REQUIRE(std::fabs(std - 0.15) < 0.005);
}

TEST_CASE("augment_dataset leaves labels untouched") {
  const GlyphDataset ds = generate_domain(default_domains()[0], 64, 8);
  const GlyphDataset aug = augment_dataset(ds, reinit_policy(3), 17);
  REQUIRE(aug.y == ds.y);
}
