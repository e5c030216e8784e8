#include "kbsa/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "kbsa/rng.hpp"

namespace kbsa {

double norm_pdf(double x) {
  return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("norm_ppf: p must lie in (0, 1)");
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement.
  double e = norm_cdf(x) - p;
  double u = e / norm_pdf(x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

// Conditional law of Y given X = x for the synthetic test cases:
//   Y | X = x  ~  coef * xi + shift + x + x^2/2,   xi ~ N(1, 1).
double case_coef(int tc, const std::vector<double>& th) {
  switch (tc) {
    case 1:
      return 2.6 * (th[0] * th[0] + th[1] * th[1]) - 4.8 * th[0] * th[1];
    case 2: {
      double s = 1.0;
      for (int i = 0; i < 10; ++i) {
        double t = th[static_cast<size_t>(i)] - (i + 1);
        s += t * t;
      }
      return s;
    }
    case 3:
      return 1.0;
    default:
      throw std::invalid_argument("unknown test case");
  }
}

double case_shift(int tc, const std::vector<double>& th) {
  if (tc != 3) return 0.0;
  double s = 0.0;
  for (int i = 0; i < 20; ++i)
    s += (th[static_cast<size_t>(i)] - (i + 1)) * th[static_cast<size_t>(i)];
  return s;
}

std::vector<double> case_coef_grad(int tc, const std::vector<double>& th) {
  switch (tc) {
    case 1:
      return {5.2 * th[0] - 4.8 * th[1], 5.2 * th[1] - 4.8 * th[0]};
    case 2: {
      std::vector<double> g(10);
      for (int i = 0; i < 10; ++i)
        g[static_cast<size_t>(i)] = 2.0 * (th[static_cast<size_t>(i)] - (i + 1));
      return g;
    }
    case 3:
      return std::vector<double>(20, 0.0);
    default:
      throw std::invalid_argument("unknown test case");
  }
}

std::vector<double> case_shift_grad(int tc, const std::vector<double>& th) {
  if (tc != 3) return std::vector<double>(th.size(), 0.0);
  std::vector<double> g(20);
  for (int i = 0; i < 20; ++i)
    g[static_cast<size_t>(i)] = 2.0 * th[static_cast<size_t>(i)] - (i + 1);
  return g;
}

int case_dim(int tc) { return tc == 1 ? 2 : (tc == 2 ? 10 : 20); }

void check_theta(int tc, const std::vector<double>& th) {
  if (static_cast<int>(th.size()) != case_dim(tc))
    throw std::invalid_argument("theta dimension mismatch for test case");
}

// Projected gradient descent with backtracking on a smooth function over a
// box; gradients by central differences.
std::vector<double> minimize_box(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& lower, const std::vector<double>& upper,
    std::vector<double> x) {
  const size_t d = x.size();
  auto proj = [&](std::vector<double> v) {
    for (size_t i = 0; i < d; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
    return v;
  };
  x = proj(std::move(x));
  double fx = f(x);
  std::vector<double> g(d), xn(d);
  double step = 1.0;
  for (int it = 0; it < 5000; ++it) {
    for (size_t i = 0; i < d; ++i) {
      double eps = 1e-6 * std::max(1.0, std::fabs(x[i]));
      std::vector<double> xp = x, xm = x;
      xp[i] += eps;
      xm[i] -= eps;
      g[i] = (f(xp) - f(xm)) / (2.0 * eps);
    }
    double t = step * 4.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t i = 0; i < d; ++i) xn[i] = x[i] - t * g[i];
      xn = proj(std::move(xn));
      double fn = f(xn);
      if (fn < fx - 1e-15 * std::fabs(fx)) {
        double moved = 0.0;
        for (size_t i = 0; i < d; ++i) moved += (xn[i] - x[i]) * (xn[i] - x[i]);
        x = xn;
        fx = fn;
        step = t;
        improved = true;
        if (moved < 1e-24) return x;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return x;
}

double covar_lambda(int tc, const std::vector<double>& th, double phi,
                    double psi) {
  double coef = case_coef(tc, th);
  if (coef < 0.0)
    throw std::invalid_argument("covar_truth_case: negative noise coefficient");
  double nu = th[0] + norm_ppf(phi);
  double base = case_shift(tc, th) + nu + 0.5 * nu * nu;
  if (coef == 0.0) return base;
  return coef * (1.0 + norm_ppf(psi)) + base;
}

}  // namespace

GroundTruth cond_expectation_truth(int tc, const std::vector<double>& theta) {
  check_theta(tc, theta);
  GroundTruth gt;
  gt.provenance = Provenance::Analytic;
  gt.nu_true = {1.0};
  // lambda = E[Y | X = 1] = coef * E[xi] + shift + 1 + 1/2.
  gt.lambda_true = {case_coef(tc, theta) + case_shift(tc, theta) + 1.5};
  gt.grad_nu_true = {std::vector<double>(theta.size(), 0.0)};
  auto gc = case_coef_grad(tc, theta);
  auto gs = case_shift_grad(tc, theta);
  std::vector<double> gl(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) gl[i] = gc[i] + gs[i];
  gt.grad_lambda_true = {gl};

  switch (tc) {
    case 1:
      gt.theta_star = std::vector<double>(2, 0.0);
      gt.cost_star = 1.5;
      break;
    case 2: {
      std::vector<double> ts(10);
      for (int i = 0; i < 10; ++i) ts[static_cast<size_t>(i)] = i + 1;
      gt.theta_star = ts;
      gt.cost_star = 2.5;
      break;
    }
    case 3: {
      std::vector<double> ts(20);
      for (int i = 0; i < 20; ++i) ts[static_cast<size_t>(i)] = (i + 1) / 2.0;
      gt.theta_star = ts;
      gt.cost_star = -715.0;
      break;
    }
  }
  return gt;
}

double test_case_objective(int tc, int cost, const std::vector<double>& theta) {
  check_theta(tc, theta);
  if (cost == 1)
    return case_coef(tc, theta) + case_shift(tc, theta) + 1.5;
  if (cost == 2) return covar_lambda(tc, theta, 0.5, 0.6);
  throw std::invalid_argument("unknown cost");
}

GroundTruth covar_truth_case(int tc, const std::vector<double>& theta,
                             double phi, double psi) {
  check_theta(tc, theta);
  GroundTruth gt;
  gt.provenance = Provenance::NumericMinimization;
  double nu = theta[0] + norm_ppf(phi);
  gt.nu_true = {nu};
  gt.lambda_true = {covar_lambda(tc, theta, phi, psi)};

  std::vector<double> gnu(theta.size(), 0.0);
  gnu[0] = 1.0;
  gt.grad_nu_true = {gnu};
  auto gc = case_coef_grad(tc, theta);
  auto gs = case_shift_grad(tc, theta);
  const double zq = 1.0 + norm_ppf(psi);
  std::vector<double> gl(theta.size());
  for (size_t i = 0; i < theta.size(); ++i)
    gl[i] = zq * gc[i] + gs[i] + (i == 0 ? (1.0 + nu) : 0.0);
  gt.grad_lambda_true = {gl};

  ContextualProblem pb = builtin_test_case(tc, 2);
  auto objective = [&](const std::vector<double>& th) {
    return covar_lambda(tc, th, phi, psi);
  };
  auto ts = minimize_box(objective, pb.feasible.lower, pb.feasible.upper,
                         pb.theta0);
  gt.theta_star = ts;
  gt.cost_star = objective(ts);
  return gt;
}

GroundTruth portfolio_truth() {
  const PortfolioParams pp = portfolio_params();
  GroundTruth gt;
  gt.provenance = Provenance::Analytic;
  const double z = norm_ppf(pp.phi);
  const double nu = pp.theta + pp.sigma_x * z;
  const double s = pp.sigma_y * std::sqrt(1.0 - pp.rho * pp.rho);
  const double mu = pp.delta * nu + 0.5 * pp.gamma * nu * nu +
                    pp.sigma_y * pp.rho * z;
  const double zpsi = norm_ppf(pp.psi);
  gt.nu_true = {nu};
  gt.lambda_true = {mu + s * zpsi, mu + s * norm_pdf(zpsi) / (1.0 - pp.psi)};
  gt.grad_nu_true = {{1.0}};
  const double dl = pp.delta + pp.gamma * nu;
  gt.grad_lambda_true = {{dl}, {dl}};
  return gt;
}

namespace {

// Monotone-decreasing empirical root via bracket expansion and bisection.
double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi) {
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 80 && flo < 0.0; ++i) {
    hi = lo;
    lo = lo - std::max(1.0, std::fabs(lo));
    flo = f(lo);
  }
  for (int i = 0; i < 80 && fhi > 0.0; ++i) {
    lo = hi;
    hi = hi + std::max(1.0, std::fabs(hi));
    fhi = f(hi);
  }
  if (flo < 0.0 || fhi > 0.0)
    throw std::runtime_error("brute_force_measures: failed to bracket root");
  for (int i = 0; i < 60 && hi - lo > 1e-12 * (1.0 + std::fabs(lo)); ++i) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct StripEstimates {
  double nu;
  std::vector<double> lambda;
};

StripEstimates estimate_from(const ContextualProblem& pb,
                             const std::vector<double>& theta,
                             const std::vector<double>& xs,
                             const std::vector<double>& ys, double band) {
  const size_t n = xs.size();
  auto mean_q = [&](double nu) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += pb.q_links[0](theta, xs[i], nu);
    return s / static_cast<double>(n);
  };
  double xlo = *std::min_element(xs.begin(), xs.end());
  double xhi = *std::max_element(xs.begin(), xs.end());
  double nu_hat = bisect_root(mean_q, xlo, xhi);

  std::vector<size_t> strip;
  for (size_t i = 0; i < n; ++i)
    if (std::fabs(xs[i] - nu_hat) <= band) strip.push_back(i);
  if (strip.empty())
    throw std::runtime_error(
        "brute_force_measures: empty conditioning strip (band too small)");

  StripEstimates est;
  est.nu = nu_hat;
  std::vector<double> lam(static_cast<size_t>(pb.p), 0.0);
  for (int j = 0; j < pb.p; ++j) {
    auto mean_m = [&](double l) {
      lam[static_cast<size_t>(j)] = l;
      double s = 0.0;
      for (size_t idx : strip) s += pb.m_links[static_cast<size_t>(j)](theta, ys[idx], lam);
      return s / static_cast<double>(strip.size());
    };
    double ylo = -1.0, yhi = 1.0;
    double root = bisect_root(mean_m, ylo, yhi);
    lam[static_cast<size_t>(j)] = root;
  }
  est.lambda = lam;
  return est;
}

}  // namespace

GroundTruth brute_force_measures(const ContextualProblem& pb,
                                 const std::vector<double>& theta, long N,
                                 double band, uint64_t seed) {
  if (pb.m != 1)
    throw std::invalid_argument(
        "brute_force_measures: only univariate conditioning supported");
  if (N < 1000000)
    throw std::invalid_argument("brute_force_measures: N must be >= 1e6");
  if (!(band > 0.0))
    throw std::invalid_argument("brute_force_measures: band must be > 0");

  auto streams = make_streams(seed, 0);
  std::vector<double> xs(static_cast<size_t>(N)), ys(static_cast<size_t>(N));
  Sample smp;
  for (long i = 0; i < N; ++i) {
    pb.sampler(theta, streams.measure, smp);
    xs[static_cast<size_t>(i)] = smp.x[0];
    ys[static_cast<size_t>(i)] = smp.y;
  }

  auto full = estimate_from(pb, theta, xs, ys, band);

  // Section-based standard errors.
  const int B = 20;
  const size_t sec = static_cast<size_t>(N) / B;
  std::vector<double> nu_b(B);
  std::vector<std::vector<double>> lam_b(B);
  for (int b = 0; b < B; ++b) {
    std::vector<double> xb(xs.begin() + static_cast<long>(b * sec),
                           xs.begin() + static_cast<long>((b + 1) * sec));
    std::vector<double> yb(ys.begin() + static_cast<long>(b * sec),
                           ys.begin() + static_cast<long>((b + 1) * sec));
    auto e = estimate_from(pb, theta, xb, yb, band);
    nu_b[static_cast<size_t>(b)] = e.nu;
    lam_b[static_cast<size_t>(b)] = e.lambda;
  }
  auto se_of = [&](const std::function<double(int)>& get) {
    double mean = 0.0;
    for (int b = 0; b < B; ++b) mean += get(b);
    mean /= B;
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      double d = get(b) - mean;
      var += d * d;
    }
    var /= (B - 1);
    return std::sqrt(var / B);
  };

  GroundTruth gt;
  gt.provenance = Provenance::MonteCarlo;
  gt.mc_samples = N;
  gt.mc_seed = seed;
  gt.nu_true = {full.nu};
  gt.lambda_true = full.lambda;
  gt.nu_se = {se_of([&](int b) { return nu_b[static_cast<size_t>(b)]; })};
  gt.lambda_se.resize(static_cast<size_t>(pb.p));
  for (int j = 0; j < pb.p; ++j)
    gt.lambda_se[static_cast<size_t>(j)] =
        se_of([&](int b) { return lam_b[static_cast<size_t>(b)][static_cast<size_t>(j)]; });
  return gt;
}

}  // namespace kbsa
