#include "doctest.h"

#include <cmath>
#include <string>

#include "kbsa/schedules.hpp"

using namespace kbsa;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("power schedule values") {
  PowerSchedule s{2.0, 0.0, 0.5};
  CHECK(s.value(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.value(4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.value(100) == doctest::Approx(0.2).epsilon(1e-15));
  PowerSchedule shifted{1.0, 1e4, 1.0};
  CHECK(shifted.value(1) == doctest::Approx(1.0 / 10001.0).epsilon(1e-15));
  PowerSchedule constant{0.7, 0.0, 0.0};
  CHECK(constant.value(123456) == 0.7);
  CHECK_THROWS(s.value(0));
  CHECK_THROWS(s.value(-5));
}

TEST_CASE("validate accepts the default optimize exponents") {
  auto set = schedule_set_from_exponents(preset("optimize-default"), 1);
  CHECK(validate(set, RunMode::Optimize).empty());
  CHECK(validate(set, RunMode::Estimate).empty());
}

TEST_CASE("validate flags each constraint") {
  auto base = schedule_set_from_exponents(preset("optimize-default"), 1);

  SUBCASE("b out of range") {
    auto s = base;
    s.beta_nu.e = 0.3;
    s.beta_lambda[0].e = 0.3;
    s.beta_g_nu.e = 0.3;
    s.beta_g_lambda[0].e = 0.3;
    auto v = validate(s, RunMode::Estimate);
    CHECK(!v.empty());
    CHECK(mentions(v, "b in (1/2, 1]"));
  }
  SUBCASE("a must exceed b") {
    auto s = base;
    s.alpha.e = 0.8;  // equal to b
    auto v = validate(s, RunMode::Optimize);
    CHECK(mentions(v, "a > b"));
    // estimation ignores alpha entirely
    CHECK(validate(s, RunMode::Estimate).empty());
  }
  SUBCASE("beta family exponents must match") {
    auto s = base;
    s.beta_g_lambda[0].e = 0.9;
    CHECK(mentions(validate(s, RunMode::Optimize), "beta-family"));
  }
  SUBCASE("bandwidth/perturbation band") {
    auto s = base;
    s.c.e = 0.2;
    s.h.e = 0.25;  // c + h = 0.45 >= b/2 = 0.4
    auto v = validate(s, RunMode::Optimize);
    CHECK(mentions(v, "c + h < b/2"));
  }
  SUBCASE("c and h must be positive") {
    auto s = base;
    s.c.e = 0.0;
    s.h.e = -0.1;
    auto v = validate(s, RunMode::Optimize);
    CHECK(mentions(v, "c > 0"));
    CHECK(mentions(v, "h > 0"));
  }
  SUBCASE("gradient bandwidth checked separately") {
    auto s = base;
    s.h_grad = PowerSchedule{1.0, 0.0, 0.35};  // c + h_grad = 0.45 >= 0.4
    auto v = validate(s, RunMode::Optimize);
    CHECK(mentions(v, "gradient bandwidth"));
  }
}

TEST_CASE("preset exponent tables") {
  auto e = preset("optimize-default");
  CHECK(e.a == 1.0);
  CHECK(e.b == doctest::Approx(0.8));
  CHECK(e.c == doctest::Approx(0.1));
  CHECK(e.h == doctest::Approx(0.1));
  CHECK(e.has_alpha);

  e = preset("estimate-measures");
  CHECK(!e.has_alpha);
  CHECK(e.b == 1.0);
  CHECK(e.h == doctest::Approx(0.2));

  e = preset("estimate-gradients");
  CHECK(e.c == doctest::Approx(1.0 / 8.0));
  CHECK(e.h == doctest::Approx(1.0 / 8.0));

  e = preset("optimize-accelerated", 4);
  CHECK(e.b == doctest::Approx(14.0 / 18.0));
  CHECK(e.c == doctest::Approx(4.0 / 36.0));
  CHECK(e.h == doctest::Approx(1.0 / 18.0));

  e = preset("estimate-measures-accelerated", 2);
  CHECK(e.h == doctest::Approx(1.0 / 5.0));
  CHECK(e.c == doctest::Approx(1.0 / 8.0));

  e = preset("estimate-gradients-accelerated", 2);
  CHECK(e.h == doctest::Approx(1.0 / 8.0));

  e = preset("multivariate-optimize", 2);
  CHECK(e.b == doctest::Approx(5.0 / 6.0));
  CHECK(e.c == doctest::Approx(1.0 / 12.0));

  e = preset("multivariate-estimate", 2);
  CHECK(e.h == doctest::Approx(1.0 / 6.0));
  CHECK(e.c == doctest::Approx(1.0 / 10.0));

  CHECK_THROWS(preset("no-such-preset"));
  CHECK_THROWS(preset("optimize-accelerated", 1));
  CHECK_THROWS(preset("multivariate-estimate", 0));
}

TEST_CASE("every preset satisfies its own constraints") {
  for (const char* name : {"optimize-default", "optimize-accelerated"}) {
    int arg = std::string(name) == "optimize-default" ? 0 : 4;
    auto s = schedule_set_from_exponents(preset(name, arg), 2);
    CHECK(validate(s, RunMode::Optimize).empty());
  }
  for (const char* name : {"estimate-measures", "estimate-gradients"}) {
    auto s = schedule_set_from_exponents(preset(name), 2);
    CHECK(validate(s, RunMode::Estimate).empty());
  }
  for (int r : {2, 4, 6}) {
    for (const char* name :
         {"estimate-measures-accelerated", "estimate-gradients-accelerated"}) {
      auto s = schedule_set_from_exponents(preset(name, r), 1);
      CHECK(validate(s, RunMode::Estimate).empty());
    }
    auto s = schedule_set_from_exponents(preset("optimize-accelerated", r), 1);
    CHECK(validate(s, RunMode::Optimize).empty());
  }
  for (int m : {1, 2, 3, 5}) {
    auto so = schedule_set_from_exponents(preset("multivariate-optimize", m), 1);
    CHECK(validate(so, RunMode::Optimize).empty());
    auto se = schedule_set_from_exponents(preset("multivariate-estimate", m), 1);
    CHECK(validate(se, RunMode::Estimate).empty());
  }
}

TEST_CASE("schedule_set_from_exponents shapes") {
  auto s = schedule_set_from_exponents(preset("optimize-default"), 3);
  CHECK(s.beta_lambda.size() == 3);
  CHECK(s.beta_g_lambda.size() == 3);
  CHECK(!s.h_grad.has_value());
  CHECK(&s.gradient_bandwidth() == &s.h);
  s.h_grad = PowerSchedule{1.0, 0.0, 0.05};
  CHECK(&s.gradient_bandwidth() == &*s.h_grad);
  auto est = schedule_set_from_exponents(preset("estimate-measures"), 1);
  CHECK(est.alpha.value(17) == 0.0);
}
