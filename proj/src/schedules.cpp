#include "kbsa/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace kbsa {

double PowerSchedule::value(long n) const {
  if (n < 1) throw std::invalid_argument("PowerSchedule: n must be >= 1");
  if (e == 0.0) return C;
  return C / std::pow(static_cast<double>(n) + n0, e);
}

namespace {

void check_band(std::vector<std::string>& out, const char* name, double b,
                double c, double h) {
  if (!(c > 0.0)) out.push_back(std::string("c > 0 violated (c=") +
                                std::to_string(c) + ", " + name + ")");
  if (!(h > 0.0)) out.push_back(std::string("h > 0 violated (h=") +
                                std::to_string(h) + ", " + name + ")");
  if (!(c + h < b / 2.0))
    out.push_back(std::string("c + h < b/2 violated (") + name + ")");
  if (!(2.0 * b - 2.0 * c - 2.0 * h > 1.0))
    out.push_back(std::string("2b - 2c - 2h > 1 violated (") + name + ")");
}

}  // namespace

std::vector<std::string> validate(const ScheduleSet& s, RunMode mode) {
  std::vector<std::string> v;

  const double b = s.beta_nu.e;
  auto same_b = [&](const PowerSchedule& ps, const char* what) {
    if (ps.e != b)
      v.push_back(std::string("beta-family exponents differ: ") + what +
                  " has e=" + std::to_string(ps.e) +
                  ", expected b=" + std::to_string(b));
  };
  for (const auto& ps : s.beta_lambda) same_b(ps, "beta_lambda");
  same_b(s.beta_g_nu, "beta_g_nu");
  for (const auto& ps : s.beta_g_lambda) same_b(ps, "beta_g_lambda");

  if (!(b > 0.5 && b <= 1.0))
    v.push_back("b in (1/2, 1] violated (b=" + std::to_string(b) + ")");

  if (mode == RunMode::Optimize) {
    const double a = s.alpha.e;
    if (!(a > 0.5 && a <= 1.0))
      v.push_back("a in (1/2, 1] violated (a=" + std::to_string(a) + ")");
    if (!(a > b))
      v.push_back("a > b violated (a=" + std::to_string(a) +
                  ", b=" + std::to_string(b) + ")");
  }

  check_band(v, "measure bandwidth", b, s.c.e, s.h.e);
  if (s.h_grad) check_band(v, "gradient bandwidth", b, s.c.e, s.h_grad->e);
  return v;
}

ScheduleExponents preset(const std::string& name, int arg) {
  ScheduleExponents e;
  auto r = [&] {
    if (arg < 2) throw std::invalid_argument("preset '" + name +
                                             "' requires kernel order r >= 2");
    return static_cast<double>(arg);
  };
  auto m = [&] {
    if (arg < 1)
      throw std::invalid_argument("preset '" + name +
                                  "' requires covariate dimension m >= 1");
    return static_cast<double>(arg);
  };

  if (name == "optimize-default") {
    e = {1.0, 4.0 / 5.0, 1.0 / 10.0, 1.0 / 10.0, true};
  } else if (name == "estimate-measures") {
    e = {0.0, 1.0, 1.0 / 8.0, 1.0 / 5.0, false};
  } else if (name == "estimate-gradients") {
    e = {0.0, 1.0, 1.0 / 8.0, 1.0 / 8.0, false};
  } else if (name == "optimize-accelerated") {
    double rr = r();
    e = {1.0, (3.0 * rr + 2.0) / (4.0 * rr + 2.0), rr / (8.0 * rr + 4.0),
         1.0 / (4.0 * rr + 2.0), true};
  } else if (name == "estimate-measures-accelerated") {
    double rr = r();
    e = {0.0, 1.0, rr / (2.0 * (3.0 * rr + 2.0)), 1.0 / (2.0 * rr + 1.0),
         false};
  } else if (name == "estimate-gradients-accelerated") {
    double rr = r();
    e = {0.0, 1.0, rr / (2.0 * (3.0 * rr + 2.0)), 1.0 / (3.0 * rr + 2.0),
         false};
  } else if (name == "multivariate-optimize") {
    double mm = m();
    e = {1.0, (mm + 3.0) / (mm + 4.0), 1.0 / (2.0 * (mm + 4.0)),
         1.0 / (2.0 * (mm + 4.0)), true};
  } else if (name == "multivariate-estimate") {
    double mm = m();
    e = {0.0, 1.0, 1.0 / (2.0 * (mm + 3.0)), 1.0 / (mm + 4.0), false};
  } else {
    throw std::invalid_argument("unknown schedule preset '" + name + "'");
  }
  return e;
}

ScheduleSet schedule_set_from_exponents(const ScheduleExponents& e, int p) {
  if (p < 0) throw std::invalid_argument("p must be >= 0");
  ScheduleSet s;
  s.alpha = e.has_alpha ? PowerSchedule{1.0, 0.0, e.a} : PowerSchedule{0.0, 0.0, 0.0};
  s.beta_nu = {1.0, 0.0, e.b};
  s.beta_lambda.assign(static_cast<size_t>(p), PowerSchedule{1.0, 0.0, e.b});
  s.beta_g_nu = {1.0, 0.0, e.b};
  s.beta_g_lambda.assign(static_cast<size_t>(p), PowerSchedule{1.0, 0.0, e.b});
  s.c = {1.0, 0.0, e.c};
  s.h = {1.0, 0.0, e.h};
  return s;
}

}  // namespace kbsa
