#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kbsa/problem.hpp"

namespace kbsa {

enum class Provenance { Analytic, NumericMinimization, MonteCarlo };

struct GroundTruth {
  std::vector<double> nu_true;                       // m
  std::vector<double> lambda_true;                   // p
  std::vector<std::vector<double>> grad_nu_true;     // m x d
  std::vector<std::vector<double>> grad_lambda_true; // p x d
  std::optional<std::vector<double>> theta_star;
  std::optional<double> cost_star;
  Provenance provenance = Provenance::Analytic;

  // Monte Carlo extras (brute_force_measures only).
  std::vector<double> nu_se;
  std::vector<double> lambda_se;
  long mc_samples = 0;
  uint64_t mc_seed = 0;
};

double norm_pdf(double x);
double norm_cdf(double x);
// Inverse standard normal CDF, |error| < 1e-9 (Acklam-style rational
// approximation refined by one Halley step).
double norm_ppf(double p);

// Cost 1 truth: lambda(theta) = E[Y | X = 1] in closed form, plus the known
// optimum for each test case.
GroundTruth cond_expectation_truth(int test_case,
                                   const std::vector<double>& theta);

// Cost 2 truth: nu = median of X, lambda = CoVaR_{phi,psi} of the test-case
// conditional law. theta_star via numeric minimization from theta0.
GroundTruth covar_truth_case(int test_case, const std::vector<double>& theta,
                             double phi = 0.5, double psi = 0.6);

// Closed-form CoVaR/CoES truth and decision-sensitivities for the nonlinear
// portfolio problem at theta = -0.03.
GroundTruth portfolio_truth();

// Closed-form objective lambda(theta) for a test case and cost; used for
// relative-error reporting.
double test_case_objective(int test_case, int cost,
                           const std::vector<double>& theta);

// Independent strip-conditioning Monte Carlo oracle: nu from the root of the
// empirical mean of q, lambda_j from the empirical root of mean m_j over
// samples with |x - nu| <= band. Standard errors via 20 batch sections.
GroundTruth brute_force_measures(const ContextualProblem& pb,
                                 const std::vector<double>& theta, long N,
                                 double band, uint64_t seed);

}  // namespace kbsa
