#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/net.hpp"
#include "peerlab/params.hpp"

namespace peerlab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format stores raw little-endian doubles");

struct Checkpoint {
  MlpSpec spec;
  ParameterVector params;
  std::size_t epoch = 0;
  std::string method_tag;
  std::int64_t seed = 0;
};

// Format:
//   line 1: "PEERCKPT1"
//   line 2: spec integers in five '|'-separated sections:
//           input_dim | encoder widths | feature_dim | num_classes | proj widths
//   line 3: epoch method_tag seed
//   then raw little-endian 64-bit floats, parameters in layout order
//   (weights row-major, then bias, per layer).
inline constexpr const char* kCheckpointMagic = "PEERCKPT1";

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const Layout layout = make_layout(ckpt.spec);
  if (layout != ckpt.params.layout || ckpt.params.values.size() != layout_value_count(layout))
    throw LayoutError("save_checkpoint: params do not match spec layout");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_checkpoint: cannot open " + path);
  out << kCheckpointMagic << "\n";
  out << ckpt.spec.input_dim << " |";
  for (std::size_t w : ckpt.spec.encoder_dims) out << " " << w;
  out << " | " << ckpt.spec.feature_dim << " | " << ckpt.spec.num_classes << " |";
  for (std::size_t w : ckpt.spec.proj_dims) out << " " << w;
  out << "\n";
  out << ckpt.epoch << " " << ckpt.method_tag << " " << ckpt.seed << "\n";
  out.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
            static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
  if (!out) throw Error("save_checkpoint: write failed for " + path);
}

namespace detail {

inline std::vector<std::vector<std::size_t>> split_spec_sections(const std::string& line) {
  std::vector<std::vector<std::size_t>> sections(1);
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok == "|") {
      sections.emplace_back();
      continue;
    }
    try {
      sections.back().push_back(std::stoul(tok));
    } catch (const std::exception&) {
      throw ParseError("checkpoint: bad spec integer '" + tok + "'");
    }
  }
  return sections;
}

}  // namespace detail

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw ParseError("checkpoint: magic mismatch in " + path);

  if (!std::getline(in, line)) throw ParseError("checkpoint: missing spec line");
  const auto sections = detail::split_spec_sections(line);
  if (sections.size() != 5 || sections[0].size() != 1 || sections[1].empty() ||
      sections[2].size() != 1 || sections[3].size() != 1 || sections[4].empty())
    throw ParseError("checkpoint: malformed spec line '" + line + "'");
  Checkpoint ckpt;
  ckpt.spec.input_dim = sections[0][0];
  ckpt.spec.encoder_dims = sections[1];
  ckpt.spec.feature_dim = sections[2][0];
  ckpt.spec.num_classes = sections[3][0];
  ckpt.spec.proj_dims = sections[4];
  ckpt.spec.validate();

  if (!std::getline(in, line)) throw ParseError("checkpoint: missing header line");
  {
    std::istringstream hdr(line);
    if (!(hdr >> ckpt.epoch >> ckpt.method_tag >> ckpt.seed))
      throw ParseError("checkpoint: malformed header line '" + line + "'");
  }

  const Layout layout = make_layout(ckpt.spec);
  const std::size_t expected = layout_value_count(layout);
  ckpt.params.layout = layout;
  ckpt.params.values.resize(expected);
  in.read(reinterpret_cast<char*>(ckpt.params.values.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  const std::size_t got = static_cast<std::size_t>(in.gcount()) / sizeof(double);
  if (got != expected || static_cast<std::size_t>(in.gcount()) % sizeof(double) != 0)
    throw ParseError("checkpoint: truncated values, expected " + std::to_string(expected) +
                     " found " + std::to_string(got));
  char extra;
  if (in.read(&extra, 1))
    throw ParseError("checkpoint: trailing data after " + std::to_string(expected) + " values");
  return ckpt;
}

}  // namespace peerlab
