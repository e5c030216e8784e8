#include "kbsa/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kbsa/rng.hpp"

namespace kbsa {

std::vector<double> FeasibleSet::project(const std::vector<double>& theta) const {
  std::vector<double> out = theta;
  project_in_place(out);
  return out;
}

void FeasibleSet::project_in_place(std::vector<double>& theta) const {
  if (theta.size() != lower.size())
    throw std::invalid_argument("FeasibleSet::project: dimension mismatch");
  for (size_t i = 0; i < theta.size(); ++i)
    theta[i] = std::clamp(theta[i], lower[i], upper[i]);
}

bool FeasibleSet::contains(const std::vector<double>& theta) const {
  if (theta.size() != lower.size()) return false;
  for (size_t i = 0; i < theta.size(); ++i)
    if (theta[i] < lower[i] || theta[i] > upper[i]) return false;
  return true;
}

namespace {

// Noise coefficient and deterministic shift of Y given theta:
//   Y = coef(theta) * xi + shift(theta) + X + X^2/2,  xi ~ N(1,1).
double case_coef(int test_case, const std::vector<double>& th) {
  switch (test_case) {
    case 1:
      return 2.6 * (th[0] * th[0] + th[1] * th[1]) - 4.8 * th[0] * th[1];
    case 2: {
      double s = 0.0;
      for (int i = 0; i < 10; ++i) {
        double t = th[static_cast<size_t>(i)] - (i + 1);
        s += t * t;
      }
      return s + 1.0;
    }
    case 3:
      return 1.0;
    default:
      throw std::invalid_argument("unknown test case");
  }
}

double case_shift(int test_case, const std::vector<double>& th) {
  if (test_case != 3) return 0.0;
  double s = 0.0;
  for (int i = 0; i < 20; ++i)
    s += (th[static_cast<size_t>(i)] - (i + 1)) * th[static_cast<size_t>(i)];
  return s;
}

}  // namespace

ContextualProblem builtin_test_case(int test_case, int cost) {
  if (test_case < 1 || test_case > 3)
    throw std::invalid_argument("builtin_test_case: case must be 1, 2, or 3");
  if (cost != 1 && cost != 2)
    throw std::invalid_argument("builtin_test_case: cost must be 1 or 2");

  ContextualProblem pb;
  pb.name = "case" + std::to_string(test_case) + "-cost" + std::to_string(cost);
  pb.p = 1;
  pb.m = 1;

  switch (test_case) {
    case 1:
      pb.d = 2;
      pb.feasible.lower.assign(2, -2.0);
      pb.feasible.upper.assign(2, 2.0);
      pb.theta0 = {1.0, 1.0};
      break;
    case 2:
      pb.d = 10;
      for (int i = 1; i <= 10; ++i) {
        pb.feasible.lower.push_back(i - 1.0);
        pb.feasible.upper.push_back(i + 1.0);
        pb.theta0.push_back(i - 0.5);
      }
      break;
    case 3:
      pb.d = 20;
      pb.feasible.lower.assign(20, -20.0);
      pb.feasible.upper.assign(20, 20.0);
      pb.theta0.assign(20, 0.0);
      break;
  }

  pb.sampler = [test_case](const std::vector<double>& th, std::mt19937_64& rng,
                           Sample& out) {
    double x = th[0] + draw_std_normal(rng);
    double xi = 1.0 + draw_std_normal(rng);
    out.x.assign(1, x);
    out.y = case_coef(test_case, th) * xi + case_shift(test_case, th) + x +
            0.5 * x * x;
  };

  if (cost == 1) {
    pb.m_links = {[](const std::vector<double>&, double y,
                     const std::vector<double>& lam) { return y - lam[0]; }};
    pb.q_links = {[](const std::vector<double>&, double, double nu) {
      return 1.0 - nu;
    }};
  } else {
    pb.m_links = {[](const std::vector<double>&, double y,
                     const std::vector<double>& lam) {
      return 0.6 - (y <= lam[0] ? 1.0 : 0.0);
    }};
    pb.q_links = {[](const std::vector<double>&, double x, double nu) {
      return 0.5 - (x <= nu ? 1.0 : 0.0);
    }};
  }

  pb.cost = [](const std::vector<double>&, const std::vector<double>& lam) {
    return lam[0];
  };
  pb.cost_grad_theta = [d = pb.d](const std::vector<double>&,
                                  const std::vector<double>&,
                                  std::vector<double>& out) {
    out.assign(static_cast<size_t>(d), 0.0);
  };
  pb.cost_grad_lambda = [](const std::vector<double>&,
                           const std::vector<double>&,
                           std::vector<double>& out) { out.assign(1, 1.0); };

  pb.nu0 = {0.0};
  pb.lambda0 = {0.0};
  pb.g_init = 0.0;
  return pb;
}

PortfolioParams portfolio_params() { return PortfolioParams{}; }

ContextualProblem builtin_portfolio() {
  const PortfolioParams pp = portfolio_params();

  ContextualProblem pb;
  pb.name = "portfolio";
  pb.d = 1;
  pb.p = 2;
  pb.m = 1;
  pb.feasible.lower = {-1.0};
  pb.feasible.upper = {1.0};
  pb.theta0 = {pp.theta};

  pb.sampler = [pp](const std::vector<double>& th, std::mt19937_64& rng,
                    Sample& out) {
    double z = draw_std_normal(rng);
    double x = th[0] + pp.sigma_x * z;
    double xi = draw_std_normal(rng);
    out.x.assign(1, x);
    out.y = pp.delta * x + 0.5 * pp.gamma * x * x +
            pp.sigma_y * (pp.rho * z + std::sqrt(1.0 - pp.rho * pp.rho) * xi);
  };

  auto links = covar_coes_links(pp.phi, pp.psi);
  pb.m_links = links.m_links;
  pb.q_links = {links.q_link};

  pb.cost = [](const std::vector<double>&, const std::vector<double>& lam) {
    return lam[0];
  };
  pb.cost_grad_theta = [](const std::vector<double>&,
                          const std::vector<double>&,
                          std::vector<double>& out) { out.assign(1, 0.0); };
  pb.cost_grad_lambda = [](const std::vector<double>&,
                           const std::vector<double>&,
                           std::vector<double>& out) {
    out.assign(2, 0.0);
    out[0] = 1.0;
  };

  pb.nu0 = {0.0};
  pb.lambda0 = {0.0, 0.0};
  pb.g_init = 1.0;
  pb.measure_clip = std::make_pair(-1.0, 1.0);
  return pb;
}

namespace {
void check_level(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}
}  // namespace

LinkSet covar_coes_links(double phi, double psi) {
  check_level(phi, "phi");
  check_level(psi, "psi");
  LinkSet ls;
  ls.m_links = {
      [psi](const std::vector<double>&, double y,
            const std::vector<double>& lam) {
        return psi - (y <= lam[0] ? 1.0 : 0.0);
      },
      [](const std::vector<double>&, double y,
         const std::vector<double>& lam) {
        return y >= lam[0] ? (y - lam[1]) : 0.0;
      }};
  ls.q_link = [phi](const std::vector<double>&, double x, double nu) {
    return phi - (x <= nu ? 1.0 : 0.0);
  };
  return ls;
}

LinkSet conditional_expected_cost_links(
    std::function<double(const std::vector<double>&, double)> c, double xbar) {
  if (!c) throw std::invalid_argument("cost closure must be callable");
  LinkSet ls;
  ls.m_links = {[c](const std::vector<double>& th, double y,
                    const std::vector<double>& lam) {
    return c(th, y) - lam[0];
  }};
  ls.q_link = [xbar](const std::vector<double>&, double, double nu) {
    return xbar - nu;
  };
  return ls;
}

LinkSet mean_variance_quantile_links(double psi, double xbar) {
  check_level(psi, "psi");
  LinkSet ls;
  ls.m_links = {
      [](const std::vector<double>&, double y, const std::vector<double>& lam) {
        return y - lam[0];
      },
      [](const std::vector<double>&, double y, const std::vector<double>& lam) {
        double t = y - lam[0];
        return t * t - lam[1];
      },
      [psi](const std::vector<double>&, double y,
            const std::vector<double>& lam) {
        return psi - (y <= lam[2] ? 1.0 : 0.0);
      }};
  ls.q_link = [xbar](const std::vector<double>&, double, double nu) {
    return xbar - nu;
  };
  return ls;
}

}  // namespace kbsa
