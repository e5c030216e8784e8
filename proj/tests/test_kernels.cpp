#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "kbsa/kernels.hpp"

using namespace kbsa;

namespace {

// Central finite difference of the analytic (l-1)-th derivative; each order
// is checked against a numerical derivative of the previous one.
double fd_derivative(const Kernel& k, double u, int l, double eps) {
  return (k.derivative(u + eps, l - 1) - k.derivative(u - eps, l - 1)) /
         (2.0 * eps);
}

double moment(const Kernel& k, int order) {
  return simpson_integrate(
      [&](double u) { return std::pow(u, order) * k.evaluate(u); }, -12.0, 12.0,
      8001);
}

}  // namespace

TEST_CASE("gaussian kernel values") {
  GaussianKernel k;
  CHECK(k.evaluate(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(k.evaluate(1.0) ==
        doctest::Approx(0.3989422804014327 * std::exp(-0.5)).epsilon(1e-14));
  for (double u : {0.3, 1.7, -2.4}) CHECK(k.evaluate(u) == k.evaluate(-u));
  CHECK(k.derivative(0.7, 0) == k.evaluate(0.7));
  // K'(u) = -u K(u)
  CHECK(k.derivative(0.7, 1) ==
        doctest::Approx(-0.7 * k.evaluate(0.7)).epsilon(1e-14));
  CHECK(k.order_of_smoothness() == GaussianKernel::kMaxDerivative);
  CHECK_THROWS(k.derivative(0.0, GaussianKernel::kMaxDerivative + 1));
  CHECK_THROWS(k.derivative(0.0, -1));
}

TEST_CASE("gaussian derivative recurrence matches finite differences") {
  GaussianKernel k;
  for (int l = 1; l <= 6; ++l) {
    for (double u : {-1.3, 0.0, 0.4, 2.1}) {
      double fd = fd_derivative(k, u, l, 1e-5);
      CHECK(k.derivative(u, l) == doctest::Approx(fd).scale(1.0).epsilon(1e-7));
    }
  }
}

TEST_CASE("base kernel derivative defaults to order zero only") {
  struct Flat : Kernel {
    double evaluate(double) const override { return 1.0; }
  } flat;
  CHECK(flat.derivative(0.3, 0) == 1.0);
  CHECK_THROWS(flat.derivative(0.3, 1));
}

TEST_CASE("high-order kernel closed forms") {
  auto g = gaussian_kernel();
  auto w2 = make_high_order(g, 2);
  auto w4 = make_high_order(g, 4);
  // W_2(u) = (2 - u^2) K(u)
  for (double u : {0.0, 0.5, -1.2, 2.0}) {
    CHECK(w2->evaluate(u) ==
          doctest::Approx((2.0 - u * u) * g->evaluate(u)).epsilon(1e-13));
  }
  CHECK(w2->evaluate(0.0) == doctest::Approx(0.7978845608028654).epsilon(1e-13));
  CHECK(w4->evaluate(0.0) ==
        doctest::Approx(4.0 * 0.3989422804014327).epsilon(1e-13));
  CHECK(w2->order() == 2);
  CHECK(w4->order() == 4);
  CHECK_THROWS(make_high_order(g, 1));
  CHECK_THROWS(make_high_order(g, GaussianKernel::kMaxDerivative + 2));
  CHECK_THROWS(make_high_order(nullptr, 2));
}

TEST_CASE("high-order kernel moment conditions") {
  auto g = gaussian_kernel();
  for (int r : {2, 4}) {
    auto w = make_high_order(g, r);
    CHECK(moment(*w, 0) == doctest::Approx(1.0).epsilon(1e-8));
    for (int l = 1; l < r; ++l) {
      CHECK(std::fabs(moment(*w, l)) < 1e-8);
    }
    CHECK(std::fabs(moment(*w, r)) > 1e-3);  // first non-vanishing moment
  }
}

TEST_CASE("kernel weight") {
  auto g = gaussian_kernel();
  double h = 0.25, nu = 1.0, x = 0.6;
  CHECK(kernel_weight(*g, h, nu, x) ==
        doctest::Approx(g->evaluate((nu - x) / h) / h).epsilon(1e-15));
  CHECK_THROWS(kernel_weight(*g, 0.0, nu, x));
  CHECK_THROWS(kernel_weight(*g, -0.1, nu, x));
}

TEST_CASE("bandwidth matrix") {
  BandwidthMatrix H({0.5, 0.25});
  CHECK(H.dim() == 2);
  CHECK(H.det() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(H.entry(1) == 0.25);
  CHECK_THROWS(BandwidthMatrix({0.5, 0.0}));
  CHECK_THROWS(BandwidthMatrix({-0.1}));
  auto iso = BandwidthMatrix::isotropic(3, 0.1);
  CHECK(iso.det() == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("multivariate kernel weight reduces to scalar weight at m = 1") {
  auto g = gaussian_kernel();
  BandwidthMatrix H({0.3});
  std::vector<double> nu{0.8}, x{0.1};
  // bit-identical, not merely approximately equal
  CHECK(multivariate_kernel_weight(*g, H, nu, x) ==
        kernel_weight(*g, 0.3, nu[0], x[0]));
}

TEST_CASE("multivariate kernel weight product form") {
  auto g = gaussian_kernel();
  BandwidthMatrix H({0.3, 0.5});
  std::vector<double> nu{0.8, -0.2}, x{0.1, 0.4};
  double expect = g->evaluate((nu[0] - x[0]) / 0.3) *
                  g->evaluate((nu[1] - x[1]) / 0.5) / (0.3 * 0.5);
  CHECK(multivariate_kernel_weight(*g, H, nu, x) ==
        doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS(multivariate_kernel_weight(*g, H, std::vector<double>{0.8}, x));
}

TEST_CASE("simpson integration") {
  CHECK(simpson_integrate([](double x) { return x * x; }, 0.0, 1.0, 11) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(simpson_integrate([](double x) { return std::sin(x); }, 0.0, 3.14159,
                          2001) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK_THROWS(simpson_integrate([](double) { return 1.0; }, 0.0, 1.0, 10));
  CHECK_THROWS(simpson_integrate([](double) { return 1.0; }, 0.0, 1.0, 1));
}
