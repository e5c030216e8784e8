#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "kbsa/bench.hpp"
#include "kbsa/config.hpp"
#include "kbsa/core.hpp"
#include "kbsa/oracles.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOptions {
  std::string config_path;
  std::string preset;
  long iters = 0;
  int replications = 0;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string output;
  std::string format = "csv";
  int threads = 0;
  bool no_timing = false;
};

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--config", opt.config_path, "path to a key=value config");
  cmd->add_option("--preset", opt.preset,
                  "named experiment preset (case1-cost1 ... case3-cost2, "
                  "portfolio)");
  cmd->add_option("--iters", opt.iters, "override iteration count");
  cmd->add_option("--replications", opt.replications,
                  "override replication count");
  cmd->add_option("--seed", opt.seed, "override base seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--output", opt.output, "override report path prefix");
  cmd->add_option("--format", opt.format, "report format: csv or table")
      ->check(CLI::IsMember({"csv", "table"}));
  cmd->add_option("--threads", opt.threads,
                  "worker threads (0 = KBSA_THREADS env or all cores)");
  cmd->add_flag("--no-timing", opt.no_timing,
                "zero wall-clock columns for byte-reproducible reports");
}

kbsa::RunConfig load_config(const RunOptions& opt) {
  kbsa::RunConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = kbsa::parse_config(read_file(opt.config_path));
  } else if (!opt.preset.empty()) {
    cfg = kbsa::preset_config(opt.preset);
  } else {
    throw std::runtime_error("one of --config or --preset is required");
  }
  if (opt.iters > 0) cfg.n_iters = opt.iters;
  if (opt.replications > 0) cfg.replications = opt.replications;
  if (opt.seed_set) cfg.base_seed = opt.seed;
  if (!opt.output.empty()) cfg.output_path = opt.output;
  return cfg;
}

int run_and_report(const kbsa::RunConfig& cfg, const RunOptions& opt) {
  kbsa::RunComponents rc = kbsa::make_components(cfg);
  kbsa::BenchmarkResult result = kbsa::run_replications(
      rc.problem, rc.schedules, *rc.kernel, rc.mode, cfg.n_iters,
      cfg.replications, cfg.base_seed, rc.checkpoints, rc.metrics, 1e4,
      static_cast<double>(cfg.n_iters), opt.threads,
      kbsa::config_fingerprint(cfg));
  kbsa::emit_report(result, opt.format, cfg.output_path, !opt.no_timing);

  std::printf("problem: %s  mode: %s  iters: %ld  replications: %d\n",
              cfg.problem_name.c_str(),
              cfg.mode == kbsa::RunMode::Optimize ? "optimize" : "estimate",
              cfg.n_iters, cfg.replications);
  for (const kbsa::MetricStats& ms : result.metrics) {
    std::printf("  %-10s rel_err %.4g  ermse %.4g  slope %.3f\n",
                ms.name.c_str(), ms.rel_err.back(), ms.ermse.back(),
                ms.fit.slope);
  }
  std::printf("report written to %s.*\n", cfg.output_path.c_str());
  return 0;
}

void print_truth(const kbsa::GroundTruth& t) {
  auto print_vec = [](const char* label, const std::vector<double>& v) {
    std::printf("%s", label);
    for (double x : v) std::printf(" %.10g", x);
    std::printf("\n");
  };
  print_vec("nu:", t.nu_true);
  print_vec("lambda:", t.lambda_true);
  for (size_t i = 0; i < t.grad_nu_true.size(); ++i) {
    print_vec(("d(nu_" + std::to_string(i + 1) + ")/d(theta):").c_str(),
              t.grad_nu_true[i]);
  }
  for (size_t j = 0; j < t.grad_lambda_true.size(); ++j) {
    print_vec(("d(lambda_" + std::to_string(j + 1) + ")/d(theta):").c_str(),
              t.grad_lambda_true[j]);
  }
  if (t.theta_star) print_vec("theta*:", *t.theta_star);
  if (t.cost_star) std::printf("cost*: %.10g\n", *t.cost_star);
  if (t.mc_samples > 0) {
    print_vec("nu standard error:", t.nu_se);
    print_vec("lambda standard error:", t.lambda_se);
    std::printf("samples: %ld  seed: %llu\n", t.mc_samples,
                static_cast<unsigned long long>(t.mc_seed));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-based stochastic approximation for contextual measures"};
  app.require_subcommand(1);

  RunOptions est_opt, optm_opt, bench_opt;
  CLI::App* est = app.add_subcommand(
      "estimate", "estimate measures and sensitivities at fixed theta");
  add_run_options(est, est_opt);
  CLI::App* optm = app.add_subcommand(
      "optimize", "minimize the contextual cost over the feasible box");
  add_run_options(optm, optm_opt);
  CLI::App* bench = app.add_subcommand(
      "bench", "run a named reference experiment end to end");
  add_run_options(bench, bench_opt);

  std::string val_path;
  CLI::App* val = app.add_subcommand(
      "validate", "check a config against the schedule constraints");
  val->add_option("--config", val_path, "path to a key=value config")
      ->required();

  std::string oracle_name = "portfolio";
  long oracle_n = 0;
  double oracle_band = 0.02;
  uint64_t oracle_seed = 777;
  std::vector<double> oracle_theta;
  CLI::App* orc = app.add_subcommand(
      "oracle", "print ground-truth values for a builtin problem");
  orc->add_option("--name", oracle_name,
                  "problem (case1-cost1 ... case3-cost2, portfolio)");
  orc->add_option("--theta", oracle_theta,
                  "evaluation point (default: the problem's theta0)");
  orc->add_option("--brute-force", oracle_n,
                  "also run the Monte Carlo oracle with N samples");
  orc->add_option("--band", oracle_band, "conditioning strip half-width");
  orc->add_option("--seed", oracle_seed, "Monte Carlo seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*val) {
      kbsa::RunConfig cfg = kbsa::parse_config(read_file(val_path));
      std::vector<std::string> violations =
          kbsa::validate(cfg.schedules, cfg.mode);
      if (violations.empty()) {
        std::printf("ok: schedule constraints satisfied\n");
        return 0;
      }
      // Reachable only with validation.override = true in the file.
      for (const std::string& v : violations) {
        std::fprintf(stderr, "violation: %s\n", v.c_str());
      }
      return 1;
    }
    if (*orc) {
      kbsa::ContextualProblem pb =
          oracle_name == "portfolio"
              ? kbsa::builtin_portfolio()
              : kbsa::reference_benchmark(oracle_name).problem;
      std::vector<double> theta =
          oracle_theta.empty() ? pb.theta0 : oracle_theta;
      kbsa::GroundTruth t;
      if (oracle_name == "portfolio") {
        t = kbsa::portfolio_truth();
      } else {
        int tc = oracle_name[4] - '0';
        int cost = oracle_name[10] - '0';
        t = cost == 1 ? kbsa::cond_expectation_truth(tc, theta)
                      : kbsa::covar_truth_case(tc, theta);
      }
      std::printf("analytic truth for %s:\n", oracle_name.c_str());
      print_truth(t);
      if (oracle_n > 0) {
        kbsa::GroundTruth mc = kbsa::brute_force_measures(
            pb, theta, oracle_n, oracle_band, oracle_seed);
        std::printf("Monte Carlo oracle:\n");
        print_truth(mc);
      }
      return 0;
    }
    RunOptions& opt = *est ? est_opt : (*optm ? optm_opt : bench_opt);
    kbsa::RunConfig cfg = load_config(opt);
    if (*est) cfg.mode = kbsa::RunMode::Estimate;
    if (*optm) cfg.mode = kbsa::RunMode::Optimize;
    if (!cfg.override_validation) {
      std::vector<std::string> violations =
          kbsa::validate(cfg.schedules, cfg.mode);
      if (!violations.empty()) {
        for (const std::string& v : violations) {
          std::fprintf(stderr, "violation: %s\n", v.c_str());
        }
        return 1;
      }
    }
    return run_and_report(cfg, opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
