// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 invalid configuration or usage.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "lsrgan/checkpoint.hpp"
#include "lsrgan/config.hpp"
#include "lsrgan/dataset.hpp"
#include "lsrgan/error.hpp"
#include "lsrgan/image.hpp"
#include "lsrgan/loss_suite.hpp"
#include "lsrgan/metrics.hpp"
#include "lsrgan/parallel.hpp"
#include "lsrgan/pwl.hpp"
#include "lsrgan/trainer.hpp"

namespace fs = std::filesystem;
using namespace lsrgan;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
  } else {
    write_text(output, text);
  }
}

RunConfig load_config(const std::string& path, const std::string& output_override) {
  RunConfig cfg = RunConfig::load(path);
  if (!output_override.empty()) cfg.output_dir = output_override;
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  return cfg;
}

Checkpoint run_pretrain(const RunConfig& cfg, const Dataset& data) {
  TrainConfig train = cfg.train_config(Stage::kPretrain);
  train.loss_csv = cfg.output_dir / "pretrain_loss.csv";
  TrainSession<float> session(initial_networks(cfg), data, train);
  const double before = dataset_l1(session.networks().generator, data);
  session.run();
  const double after = dataset_l1(session.networks().generator, data);
  Checkpoint ckpt = session.checkpoint();
  ckpt.save(cfg.output_dir / "pretrain.ckpt");
  fmt::print("pretrain: G training L1 {} -> {} after {} iterations\n", format_number(before),
             format_number(after), session.state().iteration);
  fmt::print("wrote {}\n", (cfg.output_dir / "pretrain.ckpt").string());
  return ckpt;
}

Dataset eval_dataset(const std::string& spec, std::size_t count, std::size_t patch) {
  if (spec.rfind("synth:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(spec.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("--data: cannot parse seed in '" + spec + "'");
    }
    return Dataset::synthetic(seed, count, patch, false);
  }
  if (!fs::is_directory(spec)) throw ConfigError("--data: no such directory " + spec);
  return Dataset::from_directory(spec, patch, false);
}

struct ScalarFn {
  ScalarFunction f;
  double a = 0.0, b = 1.0;
  double k = 1.0;  // Lipschitz constant used by the density rule
};

ScalarFn parse_function(const std::string& text) {
  if (text == "sin") {
    return {[](double x) { return std::sin(x); }, 0.0, 2.0 * std::numbers::pi, 1.0};
  }
  if (text == "abs") return {[](double x) { return std::abs(x); }, -1.0, 1.0, 1.0};
  if (text.rfind("poly:", 0) == 0) {
    std::vector<double> c;
    std::stringstream ss(text.substr(5));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        c.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("--fn: bad polynomial coefficient '" + item + "'");
      }
    }
    if (c.empty()) throw ConfigError("--fn: polynomial needs coefficients");
    ScalarFn fn;
    fn.f = [c](double x) {
      double acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
    fn.a = -1.0;
    fn.b = 1.0;
    // Bound on |p'| over [-1, 1]: sum of i |c_i|.
    double k = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) k += static_cast<double>(i) * std::abs(c[i]);
    fn.k = k > 0.0 ? k : 1.0;
    return fn;
  }
  throw ConfigError("--fn: expected sin, abs or poly:c0,c1,...");
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("lsrgan");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Latent-space regularized super-resolution GAN toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config_path, output_dir, ckpt_path, kind_text, data_spec, input, output, fn_text;
  std::string mus_text;
  std::optional<std::uint64_t> iters;
  std::optional<double> mu_override;
  double tol = 1e-4, step = 1e-4, eps = 0.0;
  std::uint64_t seed = 1;
  std::size_t count = 16, patch = 32, n_segments = 0, grid_points = 10000, pairs = 1000,
              probe_size = 8;

  auto* pretrain = app.add_subcommand("pretrain", "PSNR-oriented pretraining of G and L");
  pretrain->add_option("--config", config_path, "INI run config")->required();
  pretrain->add_option("--output", output_dir, "Override output_dir");
  pretrain->add_option("--iters", iters, "Override pretrain max_iters");

  auto* finetune = app.add_subcommand("finetune", "Adversarial fine-tuning from a checkpoint");
  finetune->add_option("--config", config_path, "INI run config")->required();
  finetune->add_option("--from", ckpt_path, "Starting checkpoint")->required();
  finetune->add_option("--kind", kind_text, "esr|lsr|cesr|clsr|kkt (default: config)");
  finetune->add_option("--mu", mu_override, "Override loss.mu");
  finetune->add_option("--output", output_dir, "Override output_dir");
  finetune->add_option("--iters", iters, "Override finetune max_iters");

  auto* eval = app.add_subcommand("eval", "PSNR/SSIM/L1 of a model on a dataset");
  eval->add_option("--model", ckpt_path, "Checkpoint")->required();
  eval->add_option("--data", data_spec, "Image directory or synth:SEED")->required();
  eval->add_option("--count", count, "Synthetic image count");
  eval->add_option("--patch", patch, "Synthetic image size / minimum image size");
  eval->add_option("--output", output, "CSV path (default: stdout)");

  auto* sr = app.add_subcommand("sr", "x4 super-resolution of one image");
  sr->add_option("--model", ckpt_path, "Checkpoint")->required();
  sr->add_option("--input", input, "LR image (.png or .ppm)")->required();
  sr->add_option("--output", output, "Output image")->required();

  auto* down = app.add_subcommand("downscale", "Antialiased bicubic x4 downscale");
  down->add_option("--input", input, "HR image")->required();
  down->add_option("--output", output, "Output image")->required();

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every loss");
  grad->add_option("--tol", tol, "Relative error tolerance");
  grad->add_option("--step", step, "Central difference step");
  grad->add_option("--seed", seed, "Input seed");

  auto* pwl = app.add_subcommand("pwl", "Piecewise linear analysis");
  pwl->require_subcommand(1);
  auto* approx = pwl->add_subcommand("approx", "Interpolate a function and measure the error");
  auto* lips = pwl->add_subcommand("lipschitz", "Lipschitz constants of an interpolant");
  for (auto* sub : {approx, lips}) {
    sub->add_option("--fn", fn_text, "sin | abs | poly:c0,c1,...")->required();
    sub->add_option("--n", n_segments, "Segments");
  }
  approx->add_option("--eps", eps, "Target error; picks n by the density rule when --n is absent");
  approx->add_option("--grid", grid_points, "Evaluation grid points");

  auto* probe = app.add_subcommand("probe", "Empirical Lipschitz ratio of G against L");
  probe->add_option("--model", ckpt_path, "Checkpoint")->required();
  probe->add_option("--pairs", pairs, "Random input pairs");
  probe->add_option("--seed", seed, "Sampler seed");
  probe->add_option("--size", probe_size, "LR side length");
  probe->add_option("--output", output, "CSV path (default: stdout)");

  auto* sweep = app.add_subcommand("musweep", "Finetune and evaluate once per mu value");
  sweep->add_option("--config", config_path, "INI run config")->required();
  sweep->add_option("--mus", mus_text, "Comma-separated mu values")->required();
  sweep->add_option("--from", ckpt_path, "Pretrained checkpoint (default: run pretraining)");
  sweep->add_option("--kind", kind_text, "lsr or clsr (default lsr)");
  sweep->add_option("--output", output_dir, "Override output_dir");
  sweep->add_option("--iters", iters, "Override finetune max_iters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*pretrain) {
      RunConfig cfg = load_config(config_path, output_dir);
      if (iters) cfg.pretrain.max_iters = *iters;
      run_pretrain(cfg, Dataset::from_spec(cfg.data));
    } else if (*finetune) {
      RunConfig cfg = load_config(config_path, output_dir);
      if (!kind_text.empty()) cfg.kind = parse_objective_kind(kind_text);
      if (mu_override) cfg.weights.mu = *mu_override;
      if (iters) cfg.finetune.max_iters = *iters;
      cfg.validate();
      const auto data = Dataset::from_spec(cfg.data);
      TrainConfig train = cfg.train_config(Stage::kFinetune);
      const std::string stem = "finetune_" + std::string(to_string(cfg.kind));
      train.loss_csv = cfg.output_dir / (stem + "_loss.csv");
      TrainSession<float> session(Checkpoint::load(ckpt_path), data, train);
      session.run();
      session.checkpoint().save(cfg.output_dir / (stem + ".ckpt"));
      fmt::print("wrote {}\n", (cfg.output_dir / (stem + ".ckpt")).string());
    } else if (*eval) {
      const auto nets = restore_networks<float>(Checkpoint::load(ckpt_path));
      const auto data = eval_dataset(data_spec, count, patch);
      emit(evaluate(nets.generator, data.pairs(), worker_threads()).to_csv(), output);
    } else if (*sr) {
      const auto nets = restore_networks<float>(Checkpoint::load(ckpt_path));
      write_image(super_resolve(nets.generator, read_image(input)), output);
    } else if (*down) {
      write_image(downscale4(read_image(input)), output);
    } else if (*grad) {
      bool ok = true;
      for (const auto& entry : loss_gradcheck_suite({seed, step, tol})) {
        fmt::print("{:<24} max_rel_err={:.3e} {}\n", entry.name, entry.report.worst(),
                   entry.report.passed ? "PASS" : "FAIL");
        ok = ok && entry.report.passed;
      }
      return ok ? 0 : kExitRuntime;
    } else if (*approx) {
      const auto fn = parse_function(fn_text);
      std::size_t n = n_segments;
      if (n == 0) {
        if (!(eps > 0.0)) throw ConfigError("pwl approx: give --n or a positive --eps");
        n = density_rule_segments(fn.a, fn.b, fn.k, eps);
      }
      const auto interp = build_interpolant(fn.f, fn.a, fn.b, n);
      const auto grid = uniform_grid(fn.a, fn.b, grid_points);
      const auto bound = error_bound(interp, fn.f, grid);
      const auto k = lipschitz_of_pwl(interp);
      fmt::print("n,measured_max_error,oscillation_bound,holds,below_eps,tight_k,proof_k\n");
      fmt::print("{},{},{},{},{},{},{}\n", n, format_number(bound.measured_max_error),
                 format_number(bound.oscillation_bound), bound.holds ? "true" : "false",
                 eps > 0.0 ? (bound.measured_max_error < eps ? "true" : "false") : "",
                 format_number(k.tight_k), format_number(k.proof_k));
    } else if (*lips) {
      if (n_segments == 0) throw ConfigError("pwl lipschitz: --n is required");
      const auto fn = parse_function(fn_text);
      const auto k = lipschitz_of_pwl(build_interpolant(fn.f, fn.a, fn.b, n_segments));
      fmt::print("tight_k,proof_k\n{},{}\n", format_number(k.tight_k), format_number(k.proof_k));
    } else if (*probe) {
      const auto nets = restore_networks<float>(Checkpoint::load(ckpt_path));
      const auto report = empirical_lipschitz_probe(
          nets.generator, nets.encoder, uniform_pair_sampler(seed, probe_size, probe_size), pairs,
          worker_threads());
      emit(report.to_csv(), output);
      spdlog::info("probe: max ratio {} over {} pairs ({} skipped)", format_number(report.max),
                   report.rows.size(), report.skipped);
    } else if (*sweep) {
      RunConfig cfg = load_config(config_path, output_dir);
      cfg.kind = kind_text.empty() ? ObjectiveKind::kLSR : parse_objective_kind(kind_text);
      if (iters) cfg.finetune.max_iters = *iters;
      std::vector<double> mus;
      std::stringstream ss(mus_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          mus.push_back(std::stod(item));
        } catch (const std::exception&) {
          throw ConfigError("--mus: cannot parse '" + item + "'");
        }
      }
      const auto data = Dataset::from_spec(cfg.data);
      const Checkpoint start = ckpt_path.empty() ? run_pretrain(cfg, data) : Checkpoint::load(ckpt_path);
      const auto rows = mu_sweep(mus, start, data, cfg.train_config(Stage::kFinetune), data.pairs(),
                                 cfg.output_dir);
      for (const auto& row : rows) {
        row.checkpoint.save(cfg.output_dir / ("finetune_mu_" + format_number(row.mu) + ".ckpt"));
      }
      const std::string table = sweep_table_csv(rows);
      write_text(cfg.output_dir / "musweep.csv", table);
      std::cout << table;
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
