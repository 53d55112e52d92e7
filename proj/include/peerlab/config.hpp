#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "peerlab/error.hpp"
#include "peerlab/losses.hpp"
#include "peerlab/trainer.hpp"

namespace peerlab {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline long long parse_int(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": unparseable integer '" + v + "'");
  }
}

inline double parse_double(const std::string& v, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(ctx + ": unparseable number '" + v + "'");
  }
}

inline std::size_t parse_count(const std::string& v, const std::string& ctx) {
  const long long x = parse_int(v, ctx);
  if (x < 0) throw ConfigError(ctx + ": expected a non-negative count, got " + v);
  return static_cast<std::size_t>(x);
}

}  // namespace detail

// Assigns one `key = value` pair; ctx names the config line or flag for error
// messages. Per-field range checks fire here so the offending line is named.
inline void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value,
                             const std::string& ctx) {
  if (key == "method") {
    cfg.method = parse_method(value);
  } else if (key == "epochs") {
    cfg.epochs = detail::parse_count(value, ctx);
  } else if (key == "k") {
    cfg.k = detail::parse_count(value, ctx);
    if (cfg.k < 1) throw ConfigError(ctx + ": k >= 1 violated");
  } else if (key == "w") {
    cfg.w = detail::parse_double(value, ctx);
  } else if (key == "lambda") {
    cfg.lambda = detail::parse_double(value, ctx);
  } else if (key == "tau") {
    cfg.tau = detail::parse_double(value, ctx);
  } else if (key == "objective") {
    cfg.objective = parse_objective(value);
  } else if (key == "lr") {
    cfg.lr = detail::parse_double(value, ctx);
  } else if (key == "batch_size") {
    cfg.batch_size = detail::parse_count(value, ctx);
  } else if (key == "seed") {
    cfg.seed = detail::parse_int(value, ctx);
  } else if (key == "pretrain_epochs") {
    cfg.pretrain_epochs = detail::parse_count(value, ctx);
  } else if (key == "eval_every") {
    cfg.eval_every = detail::parse_count(value, ctx);
  } else {
    throw ConfigError(ctx + ": unknown key '" + key + "'");
  }
}

// Line-based `key = value` file, '#' comments. Unknown keys are rejected.
inline TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  TrainConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(ctx + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    set_config_field(cfg, key, value, ctx);
  }
  return cfg;
}

// File first (when given), then flag overrides, then cross-field validation.
inline TrainConfig parse_config(const std::string& path,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
  TrainConfig cfg = path.empty() ? TrainConfig{} : parse_config_file(path);
  for (const auto& [key, value] : overrides)
    set_config_field(cfg, key, value, "flag --" + key);
  cfg.validate();
  return cfg;
}

}  // namespace peerlab
