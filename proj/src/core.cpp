#include "kbsa/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace kbsa {

namespace {

// Isotropic product weight; for m == 1 this reduces bit-exactly to
// kernel_weight.
double weight(const Kernel& k, double h, const std::vector<double>& nu,
              const std::vector<double>& x) {
  double w = 1.0;
  for (size_t i = 0; i < nu.size(); ++i) w *= k.evaluate((nu[i] - x[i]) / h) / h;
  return w;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void clip_vec(std::vector<double>& v,
              const std::optional<std::pair<double, double>>& clip) {
  if (!clip) return;
  for (double& x : v) x = std::clamp(x, clip->first, clip->second);
}

std::string describe_state(const IterateState& s) {
  std::ostringstream os;
  os << "n=" << s.n << " theta=[";
  for (double v : s.theta) os << v << " ";
  os << "] nu=[";
  for (double v : s.nu) os << v << " ";
  os << "] lambda=[";
  for (double v : s.lambda) os << v << " ";
  os << "]";
  return os.str();
}

void check_finite(const IterateState& s, const char* where) {
  if (!s.all_finite())
    throw NumericError(s.n, std::string("non-finite value after ") + where +
                                ": " + describe_state(s));
}

}  // namespace

void draw_direction(std::mt19937_64& rng, int d, Direction& out) {
  out.delta.resize(static_cast<size_t>(d));
  for (double& v : out.delta) v = (rng() & 1ULL) ? 1.0 : -1.0;
}

IterateState IterateState::initial(const ContextualProblem& pb) {
  IterateState s;
  s.theta = pb.theta0;
  s.nu = pb.nu0;
  s.lambda = pb.lambda0;
  s.g_nu.assign(static_cast<size_t>(pb.m),
                std::vector<double>(static_cast<size_t>(pb.d), pb.g_init));
  s.g.assign(static_cast<size_t>(pb.p),
             std::vector<double>(static_cast<size_t>(pb.d), pb.g_init));
  return s;
}

bool IterateState::all_finite() const {
  auto ok = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!ok(theta) || !ok(nu) || !ok(lambda)) return false;
  for (const auto& c : g_nu)
    if (!ok(c)) return false;
  for (const auto& c : g)
    if (!ok(c)) return false;
  return true;
}

double scaled_perturbation(double c_n, const IterateState& s) {
  if (!(c_n > 0.0))
    throw std::invalid_argument("scaled_perturbation: c_n must be > 0");
  const double sqrt_d = std::sqrt(static_cast<double>(s.theta.size()));
  double mx = 1.0;
  for (const auto& col : s.g_nu) mx = std::max(mx, norm(col) / sqrt_d);
  for (const auto& gj : s.g) mx = std::max(mx, norm(gj) / sqrt_d);
  return c_n / mx;
}

void perturbed_points(const IterateState& s, double cbar, const Direction& dir,
                      PerturbedPoints& out) {
  const size_t d = s.theta.size();
  if (dir.delta.size() != d)
    throw std::invalid_argument("perturbed_points: direction dimension mismatch");
  out.theta_plus.resize(d);
  out.theta_minus.resize(d);
  for (size_t i = 0; i < d; ++i) {
    double dd = cbar * dir.delta[i];
    out.theta_plus[i] = s.theta[i] + dd;
    out.theta_minus[i] = s.theta[i] - dd;
  }
  const size_t m = s.nu.size();
  out.nu_plus.resize(m);
  out.nu_minus.resize(m);
  for (size_t i = 0; i < m; ++i) {
    double dd = cbar * dot(dir.delta, s.g_nu[i]);
    out.nu_plus[i] = s.nu[i] + dd;
    out.nu_minus[i] = s.nu[i] - dd;
  }
  const size_t p = s.lambda.size();
  out.lambda_plus.resize(p);
  out.lambda_minus.resize(p);
  for (size_t j = 0; j < p; ++j) {
    double dd = cbar * dot(dir.delta, s.g[j]);
    out.lambda_plus[j] = s.lambda[j] + dd;
    out.lambda_minus[j] = s.lambda[j] - dd;
  }
}

void measure_step(IterateState& s, const Sample& sample,
                  const ContextualProblem& pb, double beta_nu,
                  const std::vector<double>& beta_lambda, double h,
                  const Kernel& kernel) {
  thread_local std::vector<double> incr_nu, incr_lambda;
  const size_t m = s.nu.size();
  const size_t p = s.lambda.size();
  incr_nu.resize(m);
  incr_lambda.resize(p);

  const double kw = weight(kernel, h, s.nu, sample.x);
  for (size_t i = 0; i < m; ++i)
    incr_nu[i] = beta_nu * pb.q_links[i](s.theta, sample.x[i], s.nu[i]);
  for (size_t j = 0; j < p; ++j)
    incr_lambda[j] =
        beta_lambda[j] * pb.m_links[j](s.theta, sample.y, s.lambda) * kw;

  for (size_t i = 0; i < m; ++i) s.nu[i] += incr_nu[i];
  for (size_t j = 0; j < p; ++j) s.lambda[j] += incr_lambda[j];
  clip_vec(s.nu, pb.measure_clip);
  clip_vec(s.lambda, pb.measure_clip);
  check_finite(s, "measure_step");
}

void gradient_step(IterateState& s, const Sample& sample_plus,
                   const Sample& sample_minus, const PerturbedPoints& pts,
                   const Direction& dir, double cbar,
                   const ContextualProblem& pb, double beta_g_nu,
                   const std::vector<double>& beta_g_lambda, double h,
                   const Kernel& kernel) {
  const size_t d = s.theta.size();
  const size_t m = s.nu.size();
  const size_t p = s.lambda.size();
  const double inv_2c = 1.0 / (2.0 * cbar);

  for (size_t i = 0; i < m; ++i) {
    double diff =
        pb.q_links[i](pts.theta_plus, sample_plus.x[i], pts.nu_plus[i]) -
        pb.q_links[i](pts.theta_minus, sample_minus.x[i], pts.nu_minus[i]);
    double f = beta_g_nu * diff * inv_2c;
    auto& col = s.g_nu[i];
    // division by Delta equals multiplication for Rademacher entries
    for (size_t k = 0; k < d; ++k) col[k] += f * dir.delta[k];
  }

  const double kp = weight(kernel, h, pts.nu_plus, sample_plus.x);
  const double km = weight(kernel, h, pts.nu_minus, sample_minus.x);
  const double kk = kp * km;
  for (size_t j = 0; j < p; ++j) {
    double diff =
        pb.m_links[j](pts.theta_plus, sample_plus.y, pts.lambda_plus) -
        pb.m_links[j](pts.theta_minus, sample_minus.y, pts.lambda_minus);
    double f = beta_g_lambda[j] * diff * kk * inv_2c;
    auto& gj = s.g[j];
    for (size_t k = 0; k < d; ++k) gj[k] += f * dir.delta[k];
  }

  if (pb.measure_clip) {
    for (auto& col : s.g_nu) clip_vec(col, pb.measure_clip);
    for (auto& gj : s.g) clip_vec(gj, pb.measure_clip);
  }
  check_finite(s, "gradient_step");
}

void theta_step(IterateState& s, const ContextualProblem& pb, double alpha) {
  thread_local std::vector<double> gt, gl;
  pb.cost_grad_theta(s.theta, s.lambda, gt);
  pb.cost_grad_lambda(s.theta, s.lambda, gl);
  const size_t d = s.theta.size();
  for (size_t k = 0; k < d; ++k) {
    double dk = gt[k];
    for (size_t j = 0; j < s.g.size(); ++j) dk += gl[j] * s.g[j][k];
    s.theta[k] -= alpha * dk;
  }
  pb.feasible.project_in_place(s.theta);
  check_finite(s, "theta_step");
}

namespace {

RunTrace run_engine(const ContextualProblem& pb, const ScheduleSet& sch,
                    const Kernel& kernel, RunMode mode, long n_iters,
                    RngStreams& streams, const std::vector<long>& checkpoints) {
  if (n_iters < 1) throw std::invalid_argument("run: n_iters must be >= 1");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
    throw std::invalid_argument("run: checkpoints must be sorted ascending");
  if (sch.beta_lambda.size() != static_cast<size_t>(pb.p) ||
      sch.beta_g_lambda.size() != static_cast<size_t>(pb.p))
    throw std::invalid_argument("run: schedule/measure count mismatch");

  RunTrace trace;
  IterateState s = IterateState::initial(pb);

  const size_t p = static_cast<size_t>(pb.p);
  std::vector<double> beta_lambda(p), beta_g_lambda(p);
  Sample smp, smp_plus, smp_minus;
  Direction dir;
  PerturbedPoints pts;

  const bool optimize = (mode == RunMode::Optimize);
  const auto& h_grad = sch.gradient_bandwidth();
  size_t next_cp = 0;
  const auto t0 = std::chrono::steady_clock::now();

  auto record = [&](long n) {
    Checkpoint cp;
    cp.n = n;
    cp.eval_count = s.eval_count;
    cp.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    cp.theta = s.theta;
    cp.nu = s.nu;
    cp.lambda = s.lambda;
    cp.g_nu = s.g_nu;
    cp.g = s.g;
    trace.checkpoints.push_back(std::move(cp));
  };

  for (long n = 1; n <= n_iters; ++n) {
    const double beta_nu = sch.beta_nu.value(n);
    for (size_t j = 0; j < p; ++j) {
      beta_lambda[j] = sch.beta_lambda[j].value(n);
      beta_g_lambda[j] = sch.beta_g_lambda[j].value(n);
    }
    const double beta_g_nu = sch.beta_g_nu.value(n);
    const double hn = sch.h.value(n);
    const double hn_grad = h_grad.value(n);
    const double cn = sch.c.value(n);

    // (i) nominal sample; perturbation geometry from the pre-iteration state
    pb.sampler(s.theta, streams.measure, smp);
    const double cbar = scaled_perturbation(cn, s);
    draw_direction(streams.direction, pb.d, dir);
    perturbed_points(s, cbar, dir, pts);

    // descent direction from pre-iteration (theta, lambda, G)
    thread_local std::vector<double> gt, gl, descent;
    if (optimize) {
      pb.cost_grad_theta(s.theta, s.lambda, gt);
      pb.cost_grad_lambda(s.theta, s.lambda, gl);
      descent.assign(static_cast<size_t>(pb.d), 0.0);
      for (size_t k = 0; k < descent.size(); ++k) {
        double dk = gt[k];
        for (size_t j = 0; j < p; ++j) dk += gl[j] * s.g[j][k];
        descent[k] = dk;
      }
    }

    try {
      measure_step(s, smp, pb, beta_nu, beta_lambda, hn, kernel);

      // (ii) perturbed samples and gradient update
      pb.sampler(pts.theta_plus, streams.gradient, smp_plus);
      pb.sampler(pts.theta_minus, streams.gradient, smp_minus);
      gradient_step(s, smp_plus, smp_minus, pts, dir, cbar, pb, beta_g_nu,
                    beta_g_lambda, hn_grad, kernel);

      // (iii) projected descent
      if (optimize) {
        const double alpha = sch.alpha.value(n);
        for (size_t k = 0; k < descent.size(); ++k)
          s.theta[k] -= alpha * descent[k];
        pb.feasible.project_in_place(s.theta);
        check_finite(s, "theta_step");
      }
    } catch (const NumericError& err) {
      throw NumericError(n, "iteration " + std::to_string(n) + ": " +
                                err.what());
    }

    s.n = n;
    s.eval_count += 3;
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
      record(n);
      ++next_cp;
    }
  }

  trace.final_state = std::move(s);
  return trace;
}

}  // namespace

RunTrace run(const ContextualProblem& pb, const ScheduleSet& schedules,
             const Kernel& kernel, RunMode mode, long n_iters,
             RngStreams& streams, const std::vector<long>& checkpoints) {
  return run_engine(pb, schedules, kernel, mode, n_iters, streams, checkpoints);
}

RunTrace run_multivariate(const ContextualProblem& pb,
                          const ScheduleSet& schedules, const Kernel& kernel,
                          RunMode mode, long n_iters, RngStreams& streams,
                          const std::vector<long>& checkpoints) {
  if (pb.m < 1)
    throw std::invalid_argument("run_multivariate: covariate dimension < 1");
  return run_engine(pb, schedules, kernel, mode, n_iters, streams, checkpoints);
}

}  // namespace kbsa
