#include "kbsa/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace kbsa {

double relative_error(double estimate, double truth) {
  if (truth == 0.0)
    throw std::invalid_argument(
        "relative_error: truth is zero, report absolute error instead");
  return (estimate - truth) / std::fabs(truth);
}

double ermse(const std::vector<std::vector<double>>& estimates,
             const std::vector<double>& truth) {
  if (estimates.empty()) throw std::invalid_argument("ermse: no estimates");
  double sum = 0.0;
  for (const auto& est : estimates) {
    if (est.size() != truth.size())
      throw std::invalid_argument("ermse: dimension mismatch");
    for (size_t i = 0; i < truth.size(); ++i) {
      double d = est[i] - truth[i];
      sum += d * d;
    }
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 double lo, double hi) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [n, e] : points)
    if (n >= lo && n <= hi && e > 0.0)
      logs.emplace_back(std::log(n), std::log(e));
  if (logs.size() < 3)
    throw std::invalid_argument(
        "fit_rate: fewer than 3 usable points in the fit window");
  double sx = 0, sy = 0;
  for (auto& [x, y] : logs) {
    sx += x;
    sy += y;
  }
  const double mx = sx / logs.size(), my = sy / logs.size();
  double sxx = 0, sxy = 0;
  for (auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (auto& [x, y] : logs) {
    double r = y - (fit.intercept + fit.slope * x);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / logs.size());
  return fit;
}

std::vector<long> default_checkpoints(long n_iters) {
  std::set<long> cps;
  for (long decade = 1000; decade <= n_iters; decade *= 10) cps.insert(decade);
  if (n_iters > 1000) {
    const double llo = std::log10(1000.0), lhi = std::log10(double(n_iters));
    for (int i = 0; i < 30; ++i) {
      long n = std::lround(std::pow(10.0, llo + (lhi - llo) * i / 29.0));
      cps.insert(std::clamp(n, 1L, n_iters));
    }
  }
  cps.insert(n_iters);
  return {cps.begin(), cps.end()};
}

namespace {
int resolve_threads(int threads) {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("KBSA_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}
}  // namespace

BenchmarkResult run_replications(const ContextualProblem& pb,
                                 const ScheduleSet& schedules,
                                 const Kernel& kernel, RunMode mode,
                                 long n_iters, int R, uint64_t base_seed,
                                 const std::vector<long>& checkpoints,
                                 const std::vector<Metric>& metrics,
                                 double fit_lo, double fit_hi, int threads,
                                 uint64_t fingerprint) {
  if (R < 1) throw std::invalid_argument("run_replications: R must be >= 1");

  BenchmarkResult result;
  result.checkpoint_iters = checkpoints;
  result.fingerprint = fingerprint;
  result.metric_defs = metrics;
  result.traces.resize(static_cast<size_t>(R));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string fail_msg;
  std::mutex fail_mu;

  auto worker = [&] {
    for (;;) {
      int r = next.fetch_add(1);
      if (r >= R || failed.load()) return;
      try {
        RngStreams streams = make_streams(base_seed, static_cast<uint64_t>(r));
        RunTrace t = run_multivariate(pb, schedules, kernel, mode, n_iters,
                                      streams, checkpoints);
        t.seed = split_seed(base_seed, static_cast<uint64_t>(r), 0);
        t.fingerprint = fingerprint;
        result.traces[static_cast<size_t>(r)] = std::move(t);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(fail_mu);
        failed = true;
        fail_msg = "replication " + std::to_string(r) + ": " + e.what();
      }
    }
  };

  const int nthreads = std::min(resolve_threads(threads), R);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed) throw std::runtime_error("run_replications: " + fail_msg);

  const size_t C = checkpoints.size();
  result.act.assign(C, 0.0);
  for (const auto& t : result.traces) {
    if (t.checkpoints.size() != C)
      throw std::runtime_error("run_replications: checkpoint count mismatch");
    for (size_t c = 0; c < C; ++c)
      result.act[c] += t.checkpoints[c].wall_seconds;
  }
  for (double& a : result.act) a /= R;

  for (const auto& metric : metrics) {
    MetricStats stats;
    stats.name = metric.name;
    stats.rel_err.resize(C);
    stats.ermse.resize(C);
    std::vector<std::pair<double, double>> curve;
    for (size_t c = 0; c < C; ++c) {
      double rel = 0.0;
      std::vector<std::vector<double>> ests;
      ests.reserve(static_cast<size_t>(R));
      for (const auto& t : result.traces) {
        const Checkpoint& cp = t.checkpoints[c];
        rel += relative_error(metric.scalar(cp), metric.scalar_truth);
        ests.push_back(metric.extract(cp));
      }
      stats.rel_err[c] = rel / R;
      stats.ermse[c] = ermse(ests, metric.truth);
      curve.emplace_back(static_cast<double>(checkpoints[c]), stats.ermse[c]);
    }
    try {
      stats.fit = fit_rate(curve, fit_lo, fit_hi);
    } catch (const std::invalid_argument&) {
      stats.fit = RateFit{};  // too few points; slope left at 0
    }
    result.metrics.push_back(std::move(stats));
  }
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const BenchmarkResult& result, const std::string& format,
                 const std::string& path, bool include_timing) {
  auto open = [&](const std::string& suffix) {
    std::ofstream out(path + suffix);
    if (!out)
      throw std::runtime_error("emit_report: cannot write " + path + suffix);
    return out;
  };

  if (format == "csv") {
    // Per-checkpoint CSV.
    std::ofstream out = open(".checkpoints.csv");
    out << "replication,n,eval_count,wall_time";
    const Checkpoint* first = nullptr;
    if (!result.traces.empty() && !result.traces[0].checkpoints.empty())
      first = &result.traces[0].checkpoints[0];
    if (first) {
      for (size_t i = 0; i < first->theta.size(); ++i) out << ",theta_" << i;
      for (size_t i = 0; i < first->nu.size(); ++i) out << ",nu_" << i;
      for (size_t i = 0; i < first->lambda.size(); ++i) out << ",lambda_" << i;
      for (size_t i = 0; i < first->g_nu.size(); ++i)
        for (size_t k = 0; k < first->g_nu[i].size(); ++k)
          out << ",gnu_" << i << "_" << k;
      for (size_t j = 0; j < first->g.size(); ++j)
        for (size_t k = 0; k < first->g[j].size(); ++k)
          out << ",g_" << j << "_" << k;
    }
    for (const auto& m : result.metric_defs)
      out << ",rel_err_" << m.name << ",sq_err_" << m.name;
    out << "\n";
    for (size_t r = 0; r < result.traces.size(); ++r) {
      const auto& t = result.traces[r];
      for (const auto& cp : t.checkpoints) {
        out << r << "," << cp.n << "," << cp.eval_count << ","
            << fmt(include_timing ? cp.wall_seconds : 0.0);
        for (double v : cp.theta) out << "," << fmt(v);
        for (double v : cp.nu) out << "," << fmt(v);
        for (double v : cp.lambda) out << "," << fmt(v);
        for (const auto& col : cp.g_nu)
          for (double v : col) out << "," << fmt(v);
        for (const auto& gj : cp.g)
          for (double v : gj) out << "," << fmt(v);
        for (const auto& m : result.metric_defs) {
          out << "," << fmt(relative_error(m.scalar(cp), m.scalar_truth));
          auto est = m.extract(cp);
          double sq = 0.0;
          for (size_t i = 0; i < est.size(); ++i) {
            double d = est[i] - m.truth[i];
            sq += d * d;
          }
          out << "," << fmt(sq);
        }
        out << "\n";
      }
    }
    // Aggregate CSV.
    std::ofstream agg = open(".aggregate.csv");
    agg << "n";
    for (const auto& m : result.metrics)
      agg << ",rel_err_" << m.name << ",ermse_" << m.name;
    agg << ",act\n";
    for (size_t c = 0; c < result.checkpoint_iters.size(); ++c) {
      agg << result.checkpoint_iters[c];
      for (const auto& m : result.metrics)
        agg << "," << fmt(m.rel_err[c]) << "," << fmt(m.ermse[c]);
      agg << "," << fmt(include_timing ? result.act[c] : 0.0) << "\n";
    }
  } else if (format == "table") {
    std::ofstream out = open(".table.txt");
    out << "quantity";
    for (long n : result.checkpoint_iters) out << "\t" << n;
    out << "\tslope\n";
    for (const auto& m : result.metrics) {
      out << m.name;
      for (size_t c = 0; c < result.checkpoint_iters.size(); ++c) {
        char cell[64];
        std::snprintf(cell, sizeof cell, "%.2f%% (%.4g)",
                      100.0 * m.rel_err[c], m.ermse[c]);
        out << "\t" << cell;
      }
      char sl[32];
      std::snprintf(sl, sizeof sl, "O(n^%.2f)", m.fit.slope);
      out << "\t" << sl << "\n";
    }
    out << "ACT";
    for (size_t c = 0; c < result.checkpoint_iters.size(); ++c) {
      char cell[32];
      std::snprintf(cell, sizeof cell, "%.2f",
                    include_timing ? result.act[c] : 0.0);
      out << "\t" << cell;
    }
    out << "\t\n";
  } else {
    throw std::invalid_argument("emit_report: unknown format '" + format + "'");
  }
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PowerSchedule ps(double C, double n0, double e) { return PowerSchedule{C, n0, e}; }

}  // namespace

ReferenceBenchmark reference_benchmark(const std::string& name) {
  ReferenceBenchmark b;
  b.name = name;

  auto test_case_bench = [&](int tc, int cost) {
    b.problem = builtin_test_case(tc, cost);
    b.mode = RunMode::Optimize;
    ScheduleSet s;
    s.alpha = ps(1.0, 1e4, 1.0);
    if (cost == 1) {
      s.beta_nu = s.beta_g_nu = ps(1.0, 0.0, 0.8);
      s.beta_lambda = {ps(1.0, 0.0, 0.8)};
      s.beta_g_lambda = {ps(1.0, 0.0, 0.8)};
      double cc = (tc == 2) ? 2.0 : 4.0;
      s.c = ps(cc, 0.0, 0.1);
    } else {
      s.beta_nu = s.beta_g_nu = ps(2.0, 0.0, 0.8);
      s.beta_lambda = {ps(5.0, 0.0, 0.8)};
      s.beta_g_lambda = {ps(25.0, 0.0, 0.8)};
      double cc = (tc == 1) ? 0.5 : (tc == 2 ? 1.0 : 8.0);
      s.c = ps(cc, 0.0, 0.1);
    }
    s.h = ps(1.0, 0.0, 0.1);
    b.schedules = s;

    GroundTruth gt = (cost == 1)
                         ? cond_expectation_truth(tc, b.problem.theta0)
                         : covar_truth_case(tc, b.problem.theta0);
    Metric m;
    m.name = "objective";
    m.extract = [](const Checkpoint& cp) { return cp.theta; };
    m.truth = *gt.theta_star;
    m.scalar = [tc, cost](const Checkpoint& cp) {
      return test_case_objective(tc, cost, cp.theta);
    };
    m.scalar_truth = *gt.cost_star;
    b.metrics = {m};
  };

  if (name == "case1-cost1") test_case_bench(1, 1);
  else if (name == "case2-cost1") test_case_bench(2, 1);
  else if (name == "case3-cost1") test_case_bench(3, 1);
  else if (name == "case1-cost2") test_case_bench(1, 2);
  else if (name == "case2-cost2") test_case_bench(2, 2);
  else if (name == "case3-cost2") test_case_bench(3, 2);
  else if (name == "portfolio") {
    b.problem = builtin_portfolio();
    b.mode = RunMode::Estimate;
    ScheduleSet s;
    s.alpha = ps(0.0, 0.0, 0.0);
    s.beta_nu = s.beta_g_nu = ps(3.0, 1.0, 1.0);
    s.beta_lambda = {ps(3.0, 1.0, 1.0), ps(50.0, 1.0, 1.0)};
    s.beta_g_lambda = {ps(3.0, 1.0, 1.0), ps(50.0, 1.0, 1.0)};
    s.c = ps(3.0, 0.0, 1.0 / 8.0);
    s.h = ps(0.08, 0.0, 1.0 / 5.0);
    s.h_grad = ps(0.08, 0.0, 1.0 / 8.0);
    b.schedules = s;

    GroundTruth gt = portfolio_truth();
    auto scalar_metric = [&](const std::string& mname, double truth,
                             std::function<double(const Checkpoint&)> get) {
      Metric m;
      m.name = mname;
      m.scalar = get;
      m.scalar_truth = truth;
      m.extract = [get](const Checkpoint& cp) {
        return std::vector<double>{get(cp)};
      };
      m.truth = {truth};
      return m;
    };
    b.metrics = {
        scalar_metric("lambda1", gt.lambda_true[0],
                      [](const Checkpoint& cp) { return cp.lambda[0]; }),
        scalar_metric("lambda2", gt.lambda_true[1],
                      [](const Checkpoint& cp) { return cp.lambda[1]; }),
        scalar_metric("G1", gt.grad_lambda_true[0][0],
                      [](const Checkpoint& cp) { return cp.g[0][0]; }),
        scalar_metric("G2", gt.grad_lambda_true[1][0],
                      [](const Checkpoint& cp) { return cp.g[1][0]; }),
    };
  } else {
    throw std::invalid_argument("unknown reference benchmark '" + name + "'");
  }

  std::ostringstream fp;
  fp << b.name << "|" << (b.mode == RunMode::Optimize ? "opt" : "est");
  for (const PowerSchedule* sc :
       {&b.schedules.alpha, &b.schedules.beta_nu, &b.schedules.beta_g_nu,
        &b.schedules.c, &b.schedules.h}) {
    fp << "|" << sc->C << "," << sc->n0 << "," << sc->e;
  }
  b.fingerprint = fnv1a(fp.str());
  return b;
}

}  // namespace kbsa
