#include "kbsa/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace kbsa {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

double Kernel::derivative(double u, int l) const {
  if (l == 0) return evaluate(u);
  throw std::invalid_argument("Kernel: derivative order " + std::to_string(l) +
                              " not supported");
}

double GaussianKernel::evaluate(double u) const {
  return kInvSqrt2Pi * std::exp(-0.5 * u * u);
}

double GaussianKernel::derivative(double u, int l) const {
  if (l < 0 || l > kMaxDerivative)
    throw std::invalid_argument("GaussianKernel: derivative order " +
                                std::to_string(l) + " out of range [0, " +
                                std::to_string(kMaxDerivative) + "]");
  double k0 = evaluate(u);
  if (l == 0) return k0;
  // K^(l) = -u K^(l-1) - (l-1) K^(l-2)
  double prev = k0;        // K^(0)
  double cur = -u * k0;    // K^(1)
  for (int i = 2; i <= l; ++i) {
    double next = -u * cur - (i - 1) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HighOrderKernel::HighOrderKernel(std::shared_ptr<const Kernel> base, int r)
    : base_(std::move(base)), r_(r) {
  if (!base_) throw std::invalid_argument("HighOrderKernel: null base kernel");
  if (r_ < 2)
    throw std::invalid_argument("HighOrderKernel: order must be >= 2");
  if (r_ > base_->order_of_smoothness())
    throw std::invalid_argument(
        "HighOrderKernel: order exceeds base kernel smoothness");
  coef_.resize(static_cast<size_t>(r_));
  double fact = 1.0;
  for (int l = 0; l < r_; ++l) {
    if (l > 0) fact *= l;
    coef_[static_cast<size_t>(l)] = binom(r_, l + 1) / fact;
  }
}

double HighOrderKernel::evaluate(double u) const {
  double sum = 0.0;
  double ul = 1.0;
  for (int l = 0; l < r_; ++l) {
    sum += coef_[static_cast<size_t>(l)] * ul * base_->derivative(u, l);
    ul *= u;
  }
  return sum;
}

std::shared_ptr<const GaussianKernel> gaussian_kernel() {
  static const auto k = std::make_shared<const GaussianKernel>();
  return k;
}

std::shared_ptr<const HighOrderKernel> make_high_order(
    std::shared_ptr<const Kernel> base, int r) {
  return std::make_shared<const HighOrderKernel>(std::move(base), r);
}

double kernel_weight(const Kernel& k, double h, double nu, double x) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel_weight: h must be > 0");
  return k.evaluate((nu - x) / h) / h;
}

BandwidthMatrix::BandwidthMatrix(std::vector<double> diag)
    : diag_(std::move(diag)) {
  if (diag_.empty())
    throw std::invalid_argument("BandwidthMatrix: empty diagonal");
  for (double h : diag_)
    if (!(h > 0.0))
      throw std::invalid_argument("BandwidthMatrix: entries must be > 0");
}

BandwidthMatrix BandwidthMatrix::isotropic(int dim, double h) {
  return BandwidthMatrix(std::vector<double>(static_cast<size_t>(dim), h));
}

double BandwidthMatrix::det() const {
  double d = 1.0;
  for (double h : diag_) d *= h;
  return d;
}

double multivariate_kernel_weight(const Kernel& k, const BandwidthMatrix& H,
                                  std::span<const double> nu,
                                  std::span<const double> x) {
  const size_t m = nu.size();
  if (x.size() != m || static_cast<size_t>(H.dim()) != m)
    throw std::invalid_argument("multivariate_kernel_weight: dimension mismatch");
  double w = 1.0;
  for (size_t i = 0; i < m; ++i) {
    double h = H.entry(static_cast<int>(i));
    w *= k.evaluate((nu[i] - x[i]) / h) / h;
  }
  return w;
}

double simpson_integrate(const std::function<double(double)>& f, double lo,
                         double hi, int nodes) {
  if (nodes < 3 || nodes % 2 == 0)
    throw std::invalid_argument("simpson_integrate: nodes must be odd and >= 3");
  const double dx = (hi - lo) / (nodes - 1);
  double sum = f(lo) + f(hi);
  for (int i = 1; i < nodes - 1; ++i)
    sum += f(lo + i * dx) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * dx / 3.0;
}

}  // namespace kbsa
