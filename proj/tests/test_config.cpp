#include "doctest.h"

#include <string>

#include "kbsa/config.hpp"

using namespace kbsa;

namespace {

RunConfig sample_config() {
  RunConfig cfg;
  cfg.problem_name = "portfolio";
  cfg.mode = RunMode::Estimate;
  cfg.kernel_type = "high-order";
  cfg.kernel_r = 4;
  cfg.schedules = reference_benchmark("portfolio").schedules;
  cfg.n_iters = 123456;
  cfg.replications = 7;
  cfg.base_seed = 987654321;
  cfg.checkpoints = {1000, 50000, 123456};
  cfg.output_path = "out/portfolio_run";
  cfg.override_validation = true;
  return cfg;
}

bool throws_mentioning(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("config round-trips losslessly") {
  RunConfig cfg = sample_config();
  std::string text = serialize_config(cfg);
  RunConfig back = parse_config(text);
  CHECK(back == cfg);
  // serialization is canonical: a second pass yields identical bytes
  CHECK(serialize_config(back) == text);
}

TEST_CASE("round trip preserves awkward doubles") {
  RunConfig cfg = sample_config();
  cfg.schedules.c.C = 0.1 + 0.2;           // not exactly 0.3
  cfg.schedules.h.e = 1.0 / 3.0;
  cfg.schedules.beta_nu.C = 1e-17;
  RunConfig back = parse_config(serialize_config(cfg));
  CHECK(back.schedules.c.C == cfg.schedules.c.C);
  CHECK(back.schedules.h.e == cfg.schedules.h.e);
  CHECK(back.schedules.beta_nu.C == cfg.schedules.beta_nu.C);
}

TEST_CASE("fingerprint is stable and sensitive") {
  RunConfig cfg = sample_config();
  uint64_t fp = config_fingerprint(cfg);
  CHECK(fp == config_fingerprint(cfg));
  RunConfig other = cfg;
  other.base_seed += 1;
  CHECK(config_fingerprint(other) != fp);
  other = cfg;
  other.schedules.h.C *= 2.0;
  CHECK(config_fingerprint(other) != fp);
}

TEST_CASE("parser reports line numbers and key context") {
  CHECK(throws_mentioning("problem = case1-cost1\nnot a key value pair\n",
                          "line 2"));
  CHECK(throws_mentioning("problem = x\nproblem = y\n", "duplicate key"));
  CHECK(throws_mentioning("bogus.key = 1\n", "unknown key 'bogus.key'"));
  CHECK(throws_mentioning("schedule.h.C = abc\n", "invalid number"));
  CHECK(throws_mentioning("schedule.h.C = abc\n", "line 1"));
  CHECK(throws_mentioning("mode = sideways\n", "mode"));
  CHECK(throws_mentioning("run.iters = 2.5\n", "invalid integer"));
  CHECK(throws_mentioning("validation.override = maybe\n", "true or false"));
  CHECK(throws_mentioning("run.checkpoints = 10,zap\n", "invalid checkpoint"));
}

TEST_CASE("comments and blank lines are ignored") {
  RunConfig cfg = parse_config(
      "# a comment\n"
      "\n"
      "mode = estimate   # trailing comment\n"
      "schedule.beta.nu.e = 1\n"
      "schedule.beta.g.nu.e = 1\n"
      "schedule.c.e = 0.125\n"
      "schedule.h.e = 0.2\n"
      "schedule.c.C = 1\n"
      "schedule.h.C = 1\n"
      "schedule.beta.nu.C = 1\n");
  CHECK(cfg.mode == RunMode::Estimate);
  CHECK(cfg.schedules.h.e == 0.2);
  CHECK(cfg.schedules.beta_lambda.empty());
}

TEST_CASE("schedule constraint violations are rejected at parse time") {
  // b = 0.3 lies outside (1/2, 1]
  CHECK(throws_mentioning(
      "mode = estimate\nschedule.beta.nu.e = 0.3\nschedule.beta.g.nu.e = 0.3\n"
      "schedule.c.C = 1\nschedule.c.e = 0.05\nschedule.h.C = 1\n"
      "schedule.h.e = 0.05\n",
      "b in (1/2, 1]"));
  // same file with the override flag parses
  RunConfig cfg = parse_config(
      "mode = estimate\nschedule.beta.nu.e = 0.3\nschedule.beta.g.nu.e = 0.3\n"
      "schedule.c.C = 1\nschedule.c.e = 0.05\nschedule.h.C = 1\n"
      "schedule.h.e = 0.05\nvalidation.override = true\n");
  CHECK(cfg.override_validation);
  CHECK(cfg.schedules.beta_nu.e == 0.3);
}

TEST_CASE("indexed lambda schedules") {
  RunConfig cfg = parse_config(
      "mode = estimate\n"
      "schedule.beta.nu.e = 1\nschedule.beta.nu.C = 3\n"
      "schedule.beta.g.nu.e = 1\n"
      "schedule.beta.lambda.1.C = 3\nschedule.beta.lambda.1.e = 1\n"
      "schedule.beta.lambda.2.C = 50\nschedule.beta.lambda.2.e = 1\n"
      "schedule.beta.g.lambda.1.e = 1\nschedule.beta.g.lambda.2.e = 1\n"
      "schedule.c.C = 3\nschedule.c.e = 0.125\n"
      "schedule.h.C = 0.08\nschedule.h.e = 0.2\n"
      "schedule.h_grad.C = 0.08\nschedule.h_grad.e = 0.125\n");
  REQUIRE(cfg.schedules.beta_lambda.size() == 2);
  CHECK(cfg.schedules.beta_lambda[1].C == 50.0);
  REQUIRE(cfg.schedules.h_grad.has_value());
  CHECK(cfg.schedules.h_grad->e == 0.125);
}

TEST_CASE("presets resolve into runnable components") {
  for (const char* name : {"case1-cost1", "case3-cost2", "portfolio"}) {
    RunConfig cfg = preset_config(name);
    CHECK(cfg.problem_name == name);
    RunComponents rc = make_components(cfg);
    CHECK(rc.problem.name == name);
    CHECK(!rc.metrics.empty());
    CHECK(rc.kernel);
    CHECK(!rc.checkpoints.empty());
    CHECK(rc.checkpoints.back() == cfg.n_iters);
    // preset configs round-trip like any other
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  RunConfig pf = preset_config("portfolio");
  CHECK(pf.mode == RunMode::Estimate);
  CHECK_THROWS(preset_config("case9-cost9"));
}

TEST_CASE("component validation") {
  RunConfig cfg = preset_config("portfolio");
  cfg.schedules.beta_lambda.pop_back();
  CHECK_THROWS(make_components(cfg));
  cfg = preset_config("case1-cost1");
  cfg.kernel_type = "high-order";
  cfg.kernel_r = 4;
  RunComponents rc = make_components(cfg);
  CHECK(rc.kernel->evaluate(0.0) ==
        doctest::Approx(4.0 * 0.3989422804014327).epsilon(1e-13));
}
