#pragma once

#include <optional>
#include <string>
#include <vector>

namespace kbsa {

enum class RunMode { Optimize, Estimate };

// Power-law sequence value(n) = C / (n + n0)^e.
struct PowerSchedule {
  double C = 1.0;
  double n0 = 0.0;
  double e = 0.0;

  double value(long n) const;

  friend bool operator==(const PowerSchedule&, const PowerSchedule&) = default;
};

// The full family of step-, perturbation-, and bandwidth-sequences used by
// one run. All beta schedules must share a common decay exponent; the
// multipliers may differ per component.
struct ScheduleSet {
  PowerSchedule alpha;                       // decision step
  PowerSchedule beta_nu;                     // nu measure step
  std::vector<PowerSchedule> beta_lambda;    // lambda_j measure steps (size p)
  PowerSchedule beta_g_nu;                   // G_nu gradient step
  std::vector<PowerSchedule> beta_g_lambda;  // G_j gradient steps (size p)
  PowerSchedule c;                           // perturbation size
  PowerSchedule h;                           // bandwidth (measure recursion)
  // Bandwidth for the gradient recursion; defaults to h when absent. The
  // portfolio experiment uses a slower-decaying bandwidth for measures than
  // for gradients.
  std::optional<PowerSchedule> h_grad;

  const PowerSchedule& gradient_bandwidth() const {
    return h_grad ? *h_grad : h;
  }

  friend bool operator==(const ScheduleSet&, const ScheduleSet&) = default;
};

// Checks the exponent constraints. Returns one message per violated
// inequality; empty means valid. In Estimate mode alpha is ignored
// (alpha == 0 semantics).
std::vector<std::string> validate(const ScheduleSet& s, RunMode mode);

// Rate-optimal exponent choices. has_alpha is false for estimation presets.
struct ScheduleExponents {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double h = 0.0;
  bool has_alpha = false;
};

// name in {optimize-default, estimate-measures, estimate-gradients,
// optimize-accelerated, estimate-measures-accelerated,
// estimate-gradients-accelerated, multivariate-optimize,
// multivariate-estimate}. `arg` is the kernel order r for accelerated
// presets and the covariate dimension m for multivariate presets.
ScheduleExponents preset(const std::string& name, int arg = 0);

// Expands exponents into a ScheduleSet with unit multipliers and p lambda
// components.
ScheduleSet schedule_set_from_exponents(const ScheduleExponents& e, int p);

}  // namespace kbsa
