#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbsa/kernels.hpp"
#include "kbsa/problem.hpp"
#include "kbsa/rng.hpp"
#include "kbsa/schedules.hpp"

namespace kbsa {

// Rademacher perturbation direction; every entry is +1 or -1.
struct Direction {
  std::vector<double> delta;
};

void draw_direction(std::mt19937_64& rng, int d, Direction& out);

// Full algorithm state after iteration n.
struct IterateState {
  long n = 0;
  std::vector<double> theta;                // d
  std::vector<double> nu;                   // m
  std::vector<double> lambda;               // p
  std::vector<std::vector<double>> g_nu;    // m columns of size d
  std::vector<std::vector<double>> g;       // p vectors of size d
  long eval_count = 0;                      // output pairs consumed

  static IterateState initial(const ContextualProblem& pb);
  bool all_finite() const;
};

// Raised when an update produces a non-finite value; carries the iteration
// index and a state snapshot.
class NumericError : public std::runtime_error {
public:
  NumericError(long iteration, std::string what)
      : std::runtime_error(std::move(what)), iteration_(iteration) {}
  long iteration() const { return iteration_; }

private:
  long iteration_;
};

// cbar = c_n / max{1, ||G_nu col||/sqrt(d), ||G_j||/sqrt(d), ...}.
double scaled_perturbation(double c_n, const IterateState& s);

struct PerturbedPoints {
  std::vector<double> theta_plus, theta_minus;    // d, unprojected
  std::vector<double> nu_plus, nu_minus;          // m
  std::vector<double> lambda_plus, lambda_minus;  // p
};

void perturbed_points(const IterateState& s, double cbar, const Direction& dir,
                      PerturbedPoints& out);

// One measure update (Jacobi: all link and kernel evaluations use the
// pre-update nu and lambda). beta_lambda has one step value per measure.
void measure_step(IterateState& s, const Sample& sample,
                  const ContextualProblem& pb, double beta_nu,
                  const std::vector<double>& beta_lambda, double h,
                  const Kernel& kernel);

// One SP gradient update from samples drawn at theta+/-.
void gradient_step(IterateState& s, const Sample& sample_plus,
                   const Sample& sample_minus, const PerturbedPoints& pts,
                   const Direction& dir, double cbar,
                   const ContextualProblem& pb, double beta_g_nu,
                   const std::vector<double>& beta_g_lambda, double h,
                   const Kernel& kernel);

// Projected descent step using the chain-rule direction
//   D = grad_theta g + sum_j (dg/dlambda_j) G_j.
void theta_step(IterateState& s, const ContextualProblem& pb, double alpha);

struct Checkpoint {
  long n = 0;
  long eval_count = 0;
  double wall_seconds = 0.0;
  std::vector<double> theta;
  std::vector<double> nu;
  std::vector<double> lambda;
  std::vector<std::vector<double>> g_nu;
  std::vector<std::vector<double>> g;
};

struct RunTrace {
  uint64_t seed = 0;
  uint64_t fingerprint = 0;
  std::vector<Checkpoint> checkpoints;
  IterateState final_state;
};

// Runs the coupled KBSA recursions for n_iters iterations. In Estimate mode theta stays
// frozen at theta0. `checkpoints` must be sorted ascending.
RunTrace run(const ContextualProblem& pb, const ScheduleSet& schedules,
             const Kernel& kernel, RunMode mode, long n_iters,
             RngStreams& streams, const std::vector<long>& checkpoints = {});

// Multivariate-conditioning variant (m >= 1); identical loop with product
// kernel weights and per-covariate nu recursions. With m == 1 the trajectory
// is bit-identical to run().
RunTrace run_multivariate(const ContextualProblem& pb,
                          const ScheduleSet& schedules, const Kernel& kernel,
                          RunMode mode, long n_iters, RngStreams& streams,
                          const std::vector<long>& checkpoints = {});

}  // namespace kbsa
