#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kbsa/bench.hpp"
#include "kbsa/kernels.hpp"
#include "kbsa/problem.hpp"
#include "kbsa/schedules.hpp"

namespace kbsa {

// Flat key-value run configuration; round-trips losslessly through
// serialize_config/parse_config.
struct RunConfig {
  std::string problem_name = "case1-cost1";
  RunMode mode = RunMode::Optimize;
  std::string kernel_type = "gaussian";  // gaussian | high-order
  int kernel_r = 0;                      // order for high-order kernels
  ScheduleSet schedules;
  long n_iters = 1000000;
  int replications = 1;
  uint64_t base_seed = 12345;
  std::vector<long> checkpoints;  // empty means default_checkpoints(n_iters)
  std::string output_path = "kbsa_out";
  bool override_validation = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Parses flat `key = value` text (with '#' comments). Syntax errors carry
// line numbers; schedule-constraint violations are listed unless the
// override flag is set in the config.
RunConfig parse_config(const std::string& text);

// Canonical serialization; doubles are printed with full precision.
std::string serialize_config(const RunConfig& cfg);

// Stable 64-bit hash of the canonical serialization.
uint64_t config_fingerprint(const RunConfig& cfg);

// Named experiment presets: case1-cost1 ... case3-cost2, portfolio.
RunConfig preset_config(const std::string& name);

struct RunComponents {
  ContextualProblem problem;
  ScheduleSet schedules;
  std::shared_ptr<const Kernel> kernel;
  RunMode mode = RunMode::Optimize;
  std::vector<Metric> metrics;
  std::vector<long> checkpoints;
};

// Resolves a config into runnable pieces (builtin problem, kernel object,
// checkpoint list, and the benchmark metrics for the chosen problem).
RunComponents make_components(const RunConfig& cfg);

}  // namespace kbsa
