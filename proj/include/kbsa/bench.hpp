#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kbsa/core.hpp"
#include "kbsa/oracles.hpp"

namespace kbsa {

// One tracked quantity: a vector extract for eRMSE plus a scalar view for
// relative error (for optimization benchmarks the scalar is the objective
// value while the vector is theta itself).
struct Metric {
  std::string name;
  std::function<std::vector<double>(const Checkpoint&)> extract;
  std::vector<double> truth;
  std::function<double(const Checkpoint&)> scalar;
  double scalar_truth = 0.0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

struct MetricStats {
  std::string name;
  std::vector<double> rel_err;  // per checkpoint, mean over replications
  std::vector<double> ermse;    // per checkpoint
  RateFit fit;
};

struct BenchmarkResult {
  std::vector<RunTrace> traces;
  std::vector<long> checkpoint_iters;
  std::vector<double> act;  // mean wall seconds per checkpoint
  std::vector<MetricStats> metrics;
  std::vector<Metric> metric_defs;
  uint64_t fingerprint = 0;
};

double relative_error(double estimate, double truth);

// sqrt(R^-1 sum_r ||est_r - truth||^2)
double ermse(const std::vector<std::vector<double>>& estimates,
             const std::vector<double>& truth);

// OLS of log(ermse) on log(n) over points with lo <= n <= hi and ermse > 0;
// requires at least 3 usable points.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double lo, double hi);

// Decade checkpoints {1e3,...} up to n_iters plus 30 log-spaced points for
// slope fitting; always includes n_iters.
std::vector<long> default_checkpoints(long n_iters);

// Runs R independent replications with per-replication seeds derived from
// base_seed and aggregates. threads == 0 means KBSA_THREADS or hardware
// concurrency; aggregation order is independent of the thread count.
BenchmarkResult run_replications(const ContextualProblem& pb,
                                 const ScheduleSet& schedules,
                                 const Kernel& kernel, RunMode mode,
                                 long n_iters, int R, uint64_t base_seed,
                                 const std::vector<long>& checkpoints,
                                 const std::vector<Metric>& metrics,
                                 double fit_lo = 1e4, double fit_hi = 1e6,
                                 int threads = 0, uint64_t fingerprint = 0);

// format "csv" writes <path>.checkpoints.csv and <path>.aggregate.csv;
// format "table" writes <path>.table.txt mirroring the relative error
// (eRMSE) cell layout. include_timing=false zeroes wall-clock columns so
// reports become byte-reproducible.
void emit_report(const BenchmarkResult& result, const std::string& format,
                 const std::string& path, bool include_timing = true);

// A ready-to-run configuration of one reference experiment.
struct ReferenceBenchmark {
  std::string name;
  ContextualProblem problem;
  ScheduleSet schedules;
  RunMode mode = RunMode::Optimize;
  std::vector<Metric> metrics;
  uint64_t fingerprint = 0;
};

// name in {case1-cost1, ..., case3-cost2, portfolio}.
ReferenceBenchmark reference_benchmark(const std::string& name);

}  // namespace kbsa
