#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace kbsa {

// One output pair from the black-box system: covariate vector x and outcome y.
struct Sample {
  std::vector<double> x;
  double y = 0.0;
};

using SamplerFn =
    std::function<void(const std::vector<double>& theta, std::mt19937_64& rng,
                       Sample& out)>;
// q_i(theta, x_i, nu_i)
using QLinkFn =
    std::function<double(const std::vector<double>& theta, double x, double nu)>;
// m_j(theta, y, lambda); contract: link j reads only lambda[0..j].
using MLinkFn = std::function<double(const std::vector<double>& theta, double y,
                                     const std::vector<double>& lambda)>;
using CostFn = std::function<double(const std::vector<double>& theta,
                                    const std::vector<double>& lambda)>;
using CostGradFn =
    std::function<void(const std::vector<double>& theta,
                       const std::vector<double>& lambda,
                       std::vector<double>& out)>;

// Box feasible region with componentwise clamp projection.
struct FeasibleSet {
  std::vector<double> lower;
  std::vector<double> upper;

  std::vector<double> project(const std::vector<double>& theta) const;
  void project_in_place(std::vector<double>& theta) const;
  bool contains(const std::vector<double>& theta) const;
};

// The black-box contextual optimization problem: sampler, link functions,
// cost with partials, and feasible set. Immutable after construction; the
// sampler must be callable concurrently given distinct rng streams.
struct ContextualProblem {
  std::string name;
  int d = 0;  // decision dimension
  int p = 0;  // number of contextual measures
  int m = 1;  // covariate dimension

  SamplerFn sampler;
  std::vector<QLinkFn> q_links;  // size m
  std::vector<MLinkFn> m_links;  // size p
  CostFn cost;
  CostGradFn cost_grad_theta;   // fills vector of size d
  CostGradFn cost_grad_lambda;  // fills vector of size p
  FeasibleSet feasible;

  // Optional stabilization interval applied to nu, lambda, and gradient
  // entries after each update.
  std::optional<std::pair<double, double>> measure_clip;

  // Initial iterates.
  std::vector<double> theta0;   // size d
  std::vector<double> nu0;      // size m
  std::vector<double> lambda0;  // size p
  double g_init = 0.0;          // fill value for G_nu and G_j entries
};

// Synthetic benchmark problems: test_case in {1,2,3}, cost in {1,2}.
ContextualProblem builtin_test_case(int test_case, int cost);

// Nonlinear portfolio problem (CoVaR/CoES estimation).
ContextualProblem builtin_portfolio();

// Portfolio model constants.
struct PortfolioParams {
  double theta = -0.03;
  double sigma_x = 0.2;
  double sigma_y = 0.3;
  double rho = 0.95;
  double delta = 0.2;
  double gamma = 0.8;
  double phi = 0.95;
  double psi = 0.95;
};
PortfolioParams portfolio_params();

// A (m-link list, q-link) pair from the link-function catalog.
struct LinkSet {
  std::vector<MLinkFn> m_links;
  QLinkFn q_link;
};

LinkSet covar_coes_links(double phi, double psi);
LinkSet conditional_expected_cost_links(
    std::function<double(const std::vector<double>&, double)> c, double xbar);
LinkSet mean_variance_quantile_links(double psi, double xbar);

}  // namespace kbsa
