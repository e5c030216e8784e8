#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace kbsa {

// A symmetric smoothing kernel with evaluable derivatives.
// Implementations must satisfy evaluate(u) == evaluate(-u) and integrate
// to one over the real line.
class Kernel {
public:
  virtual ~Kernel() = default;

  virtual double evaluate(double u) const = 0;

  // l-th derivative at u; derivative(u, 0) == evaluate(u) exactly.
  virtual double derivative(double u, int l) const;

  // Maximum supported derivative order.
  virtual int order_of_smoothness() const { return 0; }
};

// Standard normal density, K(u) = (2*pi)^{-1/2} exp(-u^2/2).
// Derivatives follow the recurrence K^(l)(u) = -u K^(l-1)(u) - (l-1) K^(l-2)(u).
class GaussianKernel final : public Kernel {
public:
  static constexpr int kMaxDerivative = 8;

  double evaluate(double u) const override;
  double derivative(double u, int l) const override;
  int order_of_smoothness() const override { return kMaxDerivative; }
};

// Order-r bias-reduced kernel
//   W(u) = sum_{l=0}^{r-1} binom(r, l+1) (1/l!) u^l K^(l)(u).
// W may take negative values; its moments 1..r-1 vanish.
class HighOrderKernel final : public Kernel {
public:
  HighOrderKernel(std::shared_ptr<const Kernel> base, int r);

  double evaluate(double u) const override;
  int order() const { return r_; }
  const Kernel& base() const { return *base_; }

private:
  std::shared_ptr<const Kernel> base_;
  int r_;
  std::vector<double> coef_;  // binom(r, l+1) / l!
};

std::shared_ptr<const GaussianKernel> gaussian_kernel();
std::shared_ptr<const HighOrderKernel> make_high_order(
    std::shared_ptr<const Kernel> base, int r);

// Scalar kernel weight (1/h) K((nu - x)/h). Requires h > 0.
double kernel_weight(const Kernel& k, double h, double nu, double x);

// Diagonal bandwidth matrix with positive entries.
class BandwidthMatrix {
public:
  explicit BandwidthMatrix(std::vector<double> diag);
  static BandwidthMatrix isotropic(int dim, double h);

  int dim() const { return static_cast<int>(diag_.size()); }
  double entry(int i) const { return diag_[static_cast<size_t>(i)]; }
  const std::vector<double>& diag() const { return diag_; }
  double det() const;

private:
  std::vector<double> diag_;
};

// Product-kernel weight [prod_i K((nu_i - x_i)/h_i)] / det(H).
double multivariate_kernel_weight(const Kernel& k, const BandwidthMatrix& H,
                                  std::span<const double> nu,
                                  std::span<const double> x);

// Composite Simpson rule with an odd node count.
double simpson_integrate(const std::function<double(double)>& f, double lo,
                         double hi, int nodes = 4001);

}  // namespace kbsa
