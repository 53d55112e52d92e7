#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "peerlab/checkpoint.hpp"
#include "peerlab/config.hpp"
#include "peerlab/csv.hpp"
#include "peerlab/diagnostics.hpp"
#include "peerlab/error.hpp"
#include "peerlab/synthdata.hpp"
#include "peerlab/trainer.hpp"

namespace peerlab::cli {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultDataSeed = 77;
inline constexpr std::size_t kDefaultSourceSize = 2048;
inline constexpr std::size_t kDefaultTargetSize = 512;

// ---------------------------------------------------------------------------
// Domain CSV: header `label,p0,...,p63`, one row per sample, 17 significant
// digits per pixel.
// ---------------------------------------------------------------------------

inline void write_domain_csv(const fs::path& path, const GlyphDataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "label";
  for (std::size_t j = 0; j < kGlyphPixels; ++j) out << ",p" << j;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.y[i];
    for (std::size_t j = 0; j < kGlyphPixels; ++j) out << "," << fmt_g17(ds.x(i, j));
    out << "\n";
  }
  if (!out) throw Error("write failed for " + path.string());
}

inline GlyphDataset load_domain_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() != kGlyphPixels + 1 || header[0] != "label")
    throw ParseError(path.string() + ": unexpected header");
  std::vector<int> labels;
  std::vector<double> pixels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kGlyphPixels + 1)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(kGlyphPixels + 1) + " columns");
    labels.push_back(static_cast<int>(detail::parse_int(cells[0], path.string())));
    for (std::size_t j = 1; j < cells.size(); ++j)
      pixels.push_back(detail::parse_double(cells[j], path.string()));
  }
  GlyphDataset ds;
  ds.domain.name = path.stem().string();
  ds.y = std::move(labels);
  ds.x = Tensor(ds.y.size(), kGlyphPixels);
  ds.x.data = std::move(pixels);
  return ds;
}

// ---------------------------------------------------------------------------
// Benchmark assembly: either loaded from a generate-data directory or built
// in memory from the default domain roster.
// ---------------------------------------------------------------------------

struct Benchmark {
  GlyphDataset source;
  std::vector<GlyphDataset> targets;
};

inline Benchmark make_benchmark(std::uint64_t data_seed, std::size_t n_source,
                                std::size_t n_target) {
  Benchmark b;
  const auto roster = default_domains();
  b.source = generate_domain(roster[0], n_source, data_seed);
  for (std::size_t i = 1; i < roster.size(); ++i)
    b.targets.push_back(generate_domain(roster[i], n_target, data_seed));
  return b;
}

inline Benchmark load_benchmark(const fs::path& dir) {
  Benchmark b;
  b.source = load_domain_csv(dir / "source.csv");
  std::vector<fs::path> target_files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string stem = e.path().stem().string();
    if (e.path().extension() == ".csv" && stem != "source") target_files.push_back(e.path());
  }
  std::sort(target_files.begin(), target_files.end());
  for (const auto& p : target_files) b.targets.push_back(load_domain_csv(p));
  if (b.targets.empty()) throw DataError("no target CSVs found in " + dir.string());
  return b;
}

// ---------------------------------------------------------------------------
// Metrics CSV: epoch,domain,model,accuracy,ce_loss,reg_loss
// ---------------------------------------------------------------------------

inline void write_metrics_csv(const fs::path& path, const MetricsRecord& metrics) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,domain,model,accuracy,ce_loss,reg_loss\n";
  for (const auto& pt : metrics.points) {
    for (const auto& s : pt.task)
      out << pt.epoch << "," << s.domain << ",task," << fmt_g17(s.accuracy) << ","
          << fmt_g17(pt.proxy_ce) << "," << fmt_g17(pt.proxy_reg) << "\n";
    for (const auto& s : pt.proxy)
      out << pt.epoch << "," << s.domain << ",proxy," << fmt_g17(s.accuracy) << ","
          << fmt_g17(pt.proxy_ce) << "," << fmt_g17(pt.proxy_reg) << "\n";
  }
  if (!out) throw Error("write failed for " + path.string());
}

inline MetricsRecord read_metrics_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,domain,model,accuracy,ce_loss,reg_loss")
    throw ParseError(path.string() + ": unexpected metrics header");
  MetricsRecord metrics;
  std::map<std::size_t, EvalPoint> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 6 columns");
    const std::string ctx = path.string() + ":" + std::to_string(lineno);
    const auto epoch = static_cast<std::size_t>(detail::parse_int(cells[0], ctx));
    EvalPoint& pt = points[epoch];
    pt.epoch = epoch;
    DomainScore score{cells[1], detail::parse_double(cells[3], ctx)};
    if (cells[2] == "task") {
      pt.task.push_back(score);
    } else if (cells[2] == "proxy") {
      pt.proxy.push_back(score);
    } else {
      throw ParseError(ctx + ": unknown model '" + cells[2] + "'");
    }
    pt.proxy_ce = detail::parse_double(cells[4], ctx);
    pt.proxy_reg = detail::parse_double(cells[5], ctx);
  }
  for (auto& [epoch, pt] : points) metrics.points.push_back(std::move(pt));
  if (!metrics.points.empty())
    for (const auto& s : metrics.points.front().task) metrics.domains.push_back(s.domain);
  return metrics;
}

// ---------------------------------------------------------------------------
// Run manifest: config echo + artifact version + output file list. Written
// before any result file, finalized with the wall-clock duration at the end.
// ---------------------------------------------------------------------------

struct DataOptions {
  std::string data_dir;  // empty: generate in memory
  std::uint64_t data_seed = kDefaultDataSeed;
  std::size_t n_source = kDefaultSourceSize;
  std::size_t n_target = kDefaultTargetSize;
};

inline void write_manifest(const fs::path& path, const TrainConfig& cfg, const DataOptions& data,
                           const std::vector<std::string>& outputs, long long duration_ms) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "artifact_version = " << kVersion << "\n";
  out << "method = " << method_name(cfg.method) << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "k = " << cfg.k << "\n";
  out << "w = " << fmt_g17(cfg.w) << "\n";
  out << "lambda = " << fmt_g17(cfg.lambda) << "\n";
  out << "tau = " << fmt_g17(cfg.tau) << "\n";
  out << "objective = " << objective_name(cfg.objective) << "\n";
  out << "lr = " << fmt_g17(cfg.lr) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "pretrain_epochs = " << cfg.pretrain_epochs << "\n";
  out << "eval_every = " << cfg.effective_eval_every() << "\n";
  if (data.data_dir.empty()) {
    out << "data_seed = " << data.data_seed << "\n";
    out << "n_source = " << data.n_source << "\n";
    out << "n_target = " << data.n_target << "\n";
  } else {
    out << "data_dir = " << data.data_dir << "\n";
  }
  out << "duration_ms = " << duration_ms << "\n";
  for (const auto& o : outputs) out << "output = " << o << "\n";
  if (!out) throw Error("write failed for " + path.string());
}

struct ManifestInfo {
  std::string method;
  std::int64_t seed = 0;
};

inline ManifestInfo read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  ManifestInfo info;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "method") info.method = value;
    if (key == "seed") info.seed = detail::parse_int(value, path.string());
  }
  if (info.method.empty()) throw ParseError(path.string() + ": manifest has no method");
  return info;
}

// ---------------------------------------------------------------------------
// Single training run to a directory.
// ---------------------------------------------------------------------------

inline void run_to_dir(const TrainConfig& cfg, const DataOptions& data, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> outputs = {"metrics.csv", "task.ckpt", "proxy.ckpt"};
  write_manifest(out_dir / "manifest.txt", cfg, data, outputs, 0);

  const Benchmark bench = data.data_dir.empty()
                              ? make_benchmark(data.data_seed, data.n_source, data.n_target)
                              : load_benchmark(data.data_dir);
  const MlpSpec spec = default_spec();
  const RunResult result = run_experiment(cfg, spec, bench.source, bench.targets);

  write_metrics_csv(out_dir / "metrics.csv", result.metrics);
  save_checkpoint((out_dir / "task.ckpt").string(), result.task);
  save_checkpoint((out_dir / "proxy.ckpt").string(), result.proxy);

  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  write_manifest(out_dir / "manifest.txt", cfg, data, outputs, ms);
}

// ---------------------------------------------------------------------------
// Argument handling
// ---------------------------------------------------------------------------

namespace detail_args {

inline bool is_config_flag(const std::string& name) {
  static const std::set<std::string> keys = {"method", "epochs",          "k",
                                             "w",      "lambda",          "tau",
                                             "objective", "lr",           "batch_size",
                                             "seed",   "pretrain_epochs", "eval_every"};
  return keys.count(name) > 0;
}

// Maps `--batch-size` to config key `batch_size`.
inline std::string flag_to_key(const std::string& flag) {
  std::string key = flag.substr(2);
  for (char& c : key)
    if (c == '-') c = '_';
  return key;
}

struct ParsedArgs {
  std::map<std::string, std::string> options;  // non-config --flag value pairs
  std::vector<std::pair<std::string, std::string>> config_overrides;
  std::vector<std::string> positional;
};

inline ParsedArgs parse_args(const std::vector<std::string>& args, std::size_t begin,
                             const std::set<std::string>& bool_flags = {}) {
  ParsedArgs out;
  for (std::size_t i = begin; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) {
      out.positional.push_back(a);
      continue;
    }
    const std::string name = a.substr(2);
    if (bool_flags.count(name)) {
      out.options[name] = "1";
      continue;
    }
    if (i + 1 >= args.size()) throw ConfigError("flag --" + name + " expects a value");
    const std::string value = args[++i];
    if (is_config_flag(flag_to_key(a)))
      out.config_overrides.emplace_back(flag_to_key(a), value);
    else
      out.options[name] = value;
  }
  return out;
}

inline std::string require_option(const ParsedArgs& p, const std::string& name) {
  const auto it = p.options.find(name);
  if (it == p.options.end()) throw ConfigError("missing required flag --" + name);
  return it->second;
}

inline std::string option_or(const ParsedArgs& p, const std::string& name,
                             const std::string& fallback) {
  const auto it = p.options.find(name);
  return it == p.options.end() ? fallback : it->second;
}

inline DataOptions data_options(const ParsedArgs& p) {
  DataOptions d;
  d.data_dir = option_or(p, "data-dir", "");
  d.data_seed = static_cast<std::uint64_t>(
      detail::parse_int(option_or(p, "data-seed", std::to_string(kDefaultDataSeed)), "--data-seed"));
  d.n_source = detail::parse_count(
      option_or(p, "n-source", std::to_string(kDefaultSourceSize)), "--n-source");
  d.n_target = detail::parse_count(
      option_or(p, "n-target", std::to_string(kDefaultTargetSize)), "--n-target");
  return d;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(peerlab::detail::trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!peerlab::detail::trim(cur).empty() || !out.empty()) out.push_back(peerlab::detail::trim(cur));
  return out;
}

}  // namespace detail_args

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline int cmd_generate(const std::vector<std::string>& args) {
  const auto p = detail_args::parse_args(args, 1);
  const fs::path out_dir = detail_args::require_option(p, "out");
  const auto seed = static_cast<std::uint64_t>(detail::parse_int(
      detail_args::option_or(p, "seed", std::to_string(kDefaultDataSeed)), "--seed"));
  const std::size_t n_source = detail::parse_count(
      detail_args::option_or(p, "n-source", std::to_string(kDefaultSourceSize)), "--n-source");
  const std::size_t n_target = detail::parse_count(
      detail_args::option_or(p, "n-target", std::to_string(kDefaultTargetSize)), "--n-target");
  fs::create_directories(out_dir);
  for (const auto& spec : default_domains()) {
    const std::size_t n = spec.name == "source" ? n_source : n_target;
    write_domain_csv(out_dir / (spec.name + ".csv"), generate_domain(spec, n, seed));
  }
  std::cout << "wrote " << default_domains().size() << " domain CSVs to " << out_dir.string()
            << "\n";
  return 0;
}

inline int cmd_train(const std::vector<std::string>& args) {
  const auto p = detail_args::parse_args(args, 1);
  const fs::path out_dir = detail_args::require_option(p, "out");
  const std::string config_path = detail_args::option_or(p, "config", "");
  const TrainConfig cfg = parse_config(config_path, p.config_overrides);
  run_to_dir(cfg, detail_args::data_options(p), out_dir);
  std::cout << "run " << method_name(cfg.method) << " seed " << cfg.seed << " -> "
            << out_dir.string() << "\n";
  return 0;
}

inline int cmd_sweep(const std::vector<std::string>& args) {
  const auto p = detail_args::parse_args(args, 1);
  const fs::path out_dir = detail_args::require_option(p, "out");
  const std::string config_path = detail_args::option_or(p, "config", "");
  const std::string grid = detail_args::require_option(p, "grid");
  const std::string seeds_arg = detail_args::require_option(p, "seeds");

  const auto eq = grid.find('=');
  if (eq == std::string::npos) throw ConfigError("--grid expects key=v1,v2,...");
  const std::string grid_key = peerlab::detail::trim(grid.substr(0, eq));
  const auto grid_values = detail_args::split_list(grid.substr(eq + 1));
  if (grid_values.empty()) throw ConfigError("--grid has no values");
  const auto seeds = detail_args::split_list(seeds_arg);
  if (seeds.empty()) throw ConfigError("--seeds has no values");

  // Cells are parsed and run independently: a bad grid value or a runtime
  // failure marks its own cell with error.txt and the rest still complete.
  struct Cell {
    std::vector<std::pair<std::string, std::string>> overrides;
    fs::path dir;
  };
  std::vector<Cell> cells;
  const DataOptions data = detail_args::data_options(p);
  for (const auto& value : grid_values)
    for (const auto& seed : seeds) {
      auto overrides = p.config_overrides;
      overrides.emplace_back(grid_key, value);
      overrides.emplace_back("seed", seed);
      cells.push_back({std::move(overrides),
                       out_dir / ("cell_" + grid_key + "-" + value + "_seed" + seed)});
    }

  std::size_t workers = 1;
  if (const char* env = std::getenv("PEERLAB_WORKERS")) {
    workers = std::max<std::size_t>(1, static_cast<std::size_t>(std::atoll(env)));
  }
  workers = std::min(workers, cells.size());

  fs::create_directories(out_dir);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::vector<std::string> errors(cells.size());
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        run_to_dir(parse_config(config_path, cells[i].overrides), data, cells[i].dir);
      } catch (const std::exception& e) {
        failures.fetch_add(1);
        errors[i] = e.what();
        fs::create_directories(cells[i].dir);
        std::ofstream err(cells[i].dir / "error.txt");
        err << e.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < cells.size(); ++i)
    std::cout << cells[i].dir.filename().string() << ": "
              << (errors[i].empty() ? "ok" : "FAILED (" + errors[i] + ")") << "\n";
  return failures.load() == 0 ? 0 : 1;
}

// Final accuracy of the model a method reports: the parameter-averaged task
// model where one exists, the trained model otherwise.
inline ModelKind reported_model_kind(const std::string& method) {
  return reports_task_model(parse_method(method)) ? ModelKind::Task : ModelKind::Proxy;
}

inline int cmd_report(const std::vector<std::string>& args) {
  const auto p = detail_args::parse_args(args, 1);
  const fs::path in_dir = detail_args::require_option(p, "in");
  const fs::path out_dir = detail_args::require_option(p, "out");

  std::vector<fs::path> run_dirs;
  for (const auto& e : fs::directory_iterator(in_dir))
    if (e.is_directory() && fs::exists(e.path() / "manifest.txt") &&
        fs::exists(e.path() / "metrics.csv"))
      run_dirs.push_back(e.path());
  std::sort(run_dirs.begin(), run_dirs.end());
  if (run_dirs.empty()) throw DataError("no completed runs under " + in_dir.string());

  std::vector<std::string> domains;
  // method -> domain -> accumulated values
  std::map<std::string, std::map<std::string, std::vector<double>>> acc, fluct;
  for (const auto& dir : run_dirs) {
    const ManifestInfo info = read_manifest(dir / "manifest.txt");
    const MetricsRecord metrics = read_metrics_csv(dir / "metrics.csv");
    if (domains.empty()) domains = metrics.domains;
    if (domains != metrics.domains)
      throw DataError("domain mismatch between runs under " + in_dir.string());
    const ModelKind kind = reported_model_kind(info.method);
    const EvalPoint& last = metrics.points.back();
    const auto& scores = kind == ModelKind::Task ? last.task : last.proxy;
    for (const auto& s : scores) acc[info.method][s.domain].push_back(s.accuracy);
    for (const auto& d : domains)
      fluct[info.method][d].push_back(fluctuation(metrics, d, kind));
  }

  fs::create_directories(out_dir);
  auto write_table = [&](const fs::path& path,
                         const std::map<std::string, std::map<std::string, std::vector<double>>>&
                             table,
                         double scale) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "method";
    for (const auto& d : domains) out << "," << d;
    out << ",mean\n";
    for (const auto& [method, row] : table) {
      out << method;
      double target_sum = 0.0;
      std::size_t target_count = 0;
      for (const auto& d : domains) {
        const auto& vals = row.at(d);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean = mean / static_cast<double>(vals.size()) * scale;
        out << "," << fmt_g17(mean);
        if (d != "source") {
          target_sum += mean;
          ++target_count;
        }
      }
      out << "," << fmt_g17(target_sum / static_cast<double>(target_count)) << "\n";
    }
    if (!out) throw Error("write failed for " + path.string());
  };
  // Accuracies reported in percent, fluctuations already in percentage points;
  // the mean column averages over target domains only.
  write_table(out_dir / "accuracy_report.csv", acc, 100.0);
  write_table(out_dir / "fluctuation_report.csv", fluct, 1.0);
  std::cout << "report over " << run_dirs.size() << " runs -> " << out_dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze {cka|barrier|distance|fluctuation}
// ---------------------------------------------------------------------------

inline int cmd_analyze(const std::vector<std::string>& args) {
  if (args.size() < 2)
    throw ConfigError("analyze expects a mode: cka, barrier, distance or fluctuation");
  const std::string mode = args[1];
  const auto p = detail_args::parse_args(args, 2, {"augmented"});
  const fs::path out_path = detail_args::require_option(p, "out");

  if (mode == "cka") {
    const Checkpoint a = load_checkpoint(detail_args::require_option(p, "a"));
    const Checkpoint b = load_checkpoint(detail_args::require_option(p, "b"));
    if (!(a.spec == b.spec)) throw ConfigError("analyze cka: checkpoints have different specs");
    const DataOptions d = detail_args::data_options(p);
    GlyphDataset probe =
        d.data_dir.empty()
            ? generate_domain(default_domains()[0],
                              detail::parse_count(detail_args::option_or(p, "n", "512"), "--n"),
                              d.data_seed)
            : load_domain_csv(d.data_dir + "/source.csv");
    if (p.options.count("augmented"))
      probe = augment_dataset(probe, reinit_policy(mix_seed(d.data_seed, 0xCCAul)), 0);
    const CkaMatrix m = layerwise_cka(a.spec, a.params, b.params, probe);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path.string());
    out << "layer";
    for (std::size_t j = 0; j < m.cols; ++j) out << ",l" << j;
    out << "\n";
    for (std::size_t i = 0; i < m.rows; ++i) {
      out << "l" << i;
      for (std::size_t j = 0; j < m.cols; ++j) out << "," << fmt_g17(m(i, j));
      out << "\n";
    }
    std::cout << "cka matrix " << m.rows << "x" << m.cols << " -> " << out_path.string() << "\n";
    return 0;
  }

  if (mode == "barrier") {
    const Checkpoint a = load_checkpoint(detail_args::require_option(p, "a"));
    const Checkpoint b = load_checkpoint(detail_args::require_option(p, "b"));
    if (!(a.spec == b.spec))
      throw ConfigError("analyze barrier: checkpoints have different specs");
    const std::size_t grid =
        detail::parse_count(detail_args::option_or(p, "grid", "11"), "--grid");
    const DataOptions d = detail_args::data_options(p);
    const Benchmark bench = d.data_dir.empty()
                                ? make_benchmark(d.data_seed, d.n_source, d.n_target)
                                : load_benchmark(d.data_dir);
    std::vector<GlyphDataset> sets;
    sets.push_back(bench.source);
    for (const auto& t : bench.targets) sets.push_back(t);
    const BarrierCurve curve = barrier_scan(a.spec, a.params, b.params, grid, sets);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path.string());
    out << "alpha,domain,loss,accuracy\n";
    for (std::size_t g = 0; g < curve.alphas.size(); ++g)
      for (std::size_t di = 0; di < curve.domains.size(); ++di)
        out << fmt_g17(curve.alphas[g]) << "," << curve.domains[di] << ","
            << fmt_g17(curve.loss[g][di]) << "," << fmt_g17(curve.accuracy[g][di]) << "\n";
    std::cout << "barrier curve (" << curve.alphas.size() << " alphas) -> " << out_path.string()
              << "\n";
    return 0;
  }

  if (mode == "distance") {
    const DataOptions d = detail_args::data_options(p);
    const double reg = detail::parse_double(detail_args::option_or(p, "reg", "0.01"), "--reg");
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path.string());
    out << "pair,magnitude,distance\n";
    if (!d.data_dir.empty()) {
      const Benchmark bench = load_benchmark(d.data_dir);
      for (const auto& t : bench.targets)
        out << "source:" << t.domain.name << ",0,"
            << fmt_g17(dataset_distance(bench.source, t, reg)) << "\n";
    } else {
      const std::size_t n =
          detail::parse_count(detail_args::option_or(p, "n", "256"), "--n");
      const auto mags = detail_args::split_list(
          detail_args::option_or(p, "magnitudes", "0.1,0.4,0.7,1.0"));
      const GlyphDataset clean = generate_domain(default_domains()[0], n, d.data_seed);
      for (const auto& ms : mags) {
        const double m = detail::parse_double(ms, "--magnitudes");
        AugPolicy policy{{AugOp::Noise}, 1, m, mix_seed(d.data_seed, 0xA6u)};
        const GlyphDataset aug = augment_dataset(clean, policy, 1);
        out << "clean:noise," << ms << "," << fmt_g17(dataset_distance(clean, aug, reg)) << "\n";
      }
    }
    std::cout << "distances -> " << out_path.string() << "\n";
    return 0;
  }

  if (mode == "fluctuation") {
    const fs::path metrics_path = detail_args::require_option(p, "metrics");
    const MetricsRecord metrics = read_metrics_csv(metrics_path);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path.string());
    out << "domain,model,fluctuation\n";
    for (const auto& d : metrics.domains) {
      out << d << ",task," << fmt_g17(fluctuation(metrics, d, ModelKind::Task)) << "\n";
      out << d << ",proxy," << fmt_g17(fluctuation(metrics, d, ModelKind::Proxy)) << "\n";
    }
    std::cout << "fluctuation table -> " << out_path.string() << "\n";
    return 0;
  }

  throw ConfigError("unknown analyze mode '" + mode + "'");
}

// ---------------------------------------------------------------------------

inline void print_usage(std::ostream& out) {
  out << "peerlab " << kVersion << "\n"
      << "usage: peerlab <command> [flags]\n\n"
      << "commands:\n"
      << "  generate-data --out DIR [--seed N] [--n-source N] [--n-target N]\n"
      << "  train         --out DIR [--config FILE] [--<config-key> VALUE ...]\n"
      << "                [--data-dir DIR | --data-seed N]\n"
      << "  sweep         --out DIR --grid key=v1,v2,... --seeds s1,s2,...\n"
      << "                [--config FILE] [--<config-key> VALUE ...]\n"
      << "  analyze       {cka|barrier|distance|fluctuation} --out FILE ...\n"
      << "  report        --in DIR --out DIR\n\n"
      << "config keys: method epochs k w lambda tau objective lr batch_size seed\n"
      << "             pretrain_epochs eval_every (flags use dashes, e.g. --batch-size)\n"
      << "environment: PEERLAB_WORKERS bounds sweep concurrency (default 1)\n";
}

inline int run_cli(const std::vector<std::string>& args) {
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
      print_usage(std::cout);
      return args.empty() ? 1 : 0;
    }
    const std::string& cmd = args[0];
    if (cmd == "generate-data") return cmd_generate(args);
    if (cmd == "train") return cmd_train(args);
    if (cmd == "sweep") return cmd_sweep(args);
    if (cmd == "analyze") return cmd_analyze(args);
    if (cmd == "report") return cmd_report(args);
    std::cerr << "unknown command '" << cmd << "'\n";
    print_usage(std::cerr);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace peerlab::cli
