#include "kbsa/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

namespace kbsa {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_schedule(std::ostringstream& out, const std::string& prefix,
                   const PowerSchedule& s) {
  out << prefix << ".C = " << fmt_double(s.C) << "\n";
  out << prefix << ".n0 = " << fmt_double(s.n0) << "\n";
  out << prefix << ".e = " << fmt_double(s.e) << "\n";
}

struct Entry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

class KeyMap {
public:
  void insert(const std::string& key, std::string value, int line) {
    auto [it, fresh] = map_.try_emplace(key, Entry{std::move(value), line});
    if (!fresh) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": duplicate key '" + key + "' (first at line " +
                               std::to_string(it->second.line) + ")");
    }
  }

  bool has(const std::string& key) const { return map_.count(key) != 0; }

  const Entry* find(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const Entry* e = find(key);
    return e ? e->value : dflt;
  }

  double get_double(const std::string& key, double dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    const char* s = e->value.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0') {
      throw std::runtime_error("line " + std::to_string(e->line) + ": key '" +
                               key + "': invalid number '" + e->value + "'");
    }
    return v;
  }

  long get_long(const std::string& key, long dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    const char* s = e->value.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0') {
      throw std::runtime_error("line " + std::to_string(e->line) + ": key '" +
                               key + "': invalid integer '" + e->value + "'");
    }
    return v;
  }

  uint64_t get_u64(const std::string& key, uint64_t dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    const char* s = e->value.c_str();
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') {
      throw std::runtime_error("line " + std::to_string(e->line) + ": key '" +
                               key + "': invalid integer '" + e->value + "'");
    }
    return static_cast<uint64_t>(v);
  }

  bool get_bool(const std::string& key, bool dflt) const {
    const Entry* e = find(key);
    if (!e) return dflt;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    throw std::runtime_error("line " + std::to_string(e->line) + ": key '" +
                             key + "': expected true or false, got '" +
                             e->value + "'");
  }

  PowerSchedule get_schedule(const std::string& prefix) const {
    PowerSchedule s;
    s.C = get_double(prefix + ".C", s.C);
    s.n0 = get_double(prefix + ".n0", s.n0);
    s.e = get_double(prefix + ".e", s.e);
    return s;
  }

  // Reads prefix.<j>.{C,n0,e} for j = 1,2,... until no key with that index
  // exists.
  std::vector<PowerSchedule> get_indexed_schedules(
      const std::string& prefix) const {
    std::vector<PowerSchedule> out;
    for (int j = 1;; ++j) {
      std::string p = prefix + "." + std::to_string(j);
      if (!has(p + ".C") && !has(p + ".n0") && !has(p + ".e")) break;
      out.push_back(get_schedule(p));
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, entry] : map_) {
      if (!entry.used) {
        throw std::runtime_error("line " + std::to_string(entry.line) +
                                 ": unknown key '" + key + "'");
      }
    }
  }

private:
  std::map<std::string, Entry> map_;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<long> parse_checkpoints(const std::string& value, int line) {
  std::vector<long> out;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    const char* s = tok.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 1) {
      throw std::runtime_error("line " + std::to_string(line) +
                               ": invalid checkpoint '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  KeyMap keys;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": empty key");
    }
    keys.insert(key, value, lineno);
  }

  RunConfig cfg;
  cfg.problem_name = keys.get_string("problem", cfg.problem_name);

  std::string mode = keys.get_string("mode", "optimize");
  if (mode == "optimize") {
    cfg.mode = RunMode::Optimize;
  } else if (mode == "estimate") {
    cfg.mode = RunMode::Estimate;
  } else {
    throw std::runtime_error("mode must be 'optimize' or 'estimate', got '" +
                             mode + "'");
  }

  cfg.kernel_type = keys.get_string("kernel.type", cfg.kernel_type);
  cfg.kernel_r = static_cast<int>(keys.get_long("kernel.r", cfg.kernel_r));
  if (cfg.kernel_type != "gaussian" && cfg.kernel_type != "high-order") {
    throw std::runtime_error("kernel.type must be 'gaussian' or 'high-order'");
  }

  ScheduleSet& s = cfg.schedules;
  s.alpha = keys.get_schedule("schedule.alpha");
  s.beta_nu = keys.get_schedule("schedule.beta.nu");
  s.beta_lambda = keys.get_indexed_schedules("schedule.beta.lambda");
  s.beta_g_nu = keys.get_schedule("schedule.beta.g.nu");
  s.beta_g_lambda = keys.get_indexed_schedules("schedule.beta.g.lambda");
  s.c = keys.get_schedule("schedule.c");
  s.h = keys.get_schedule("schedule.h");
  if (keys.has("schedule.h_grad.C") || keys.has("schedule.h_grad.n0") ||
      keys.has("schedule.h_grad.e")) {
    s.h_grad = keys.get_schedule("schedule.h_grad");
  }

  cfg.n_iters = keys.get_long("run.iters", cfg.n_iters);
  cfg.replications =
      static_cast<int>(keys.get_long("run.replications", cfg.replications));
  cfg.base_seed = keys.get_u64("run.base_seed", cfg.base_seed);
  if (const Entry* e = keys.find("run.checkpoints")) {
    cfg.checkpoints = parse_checkpoints(e->value, e->line);
  }
  cfg.output_path = keys.get_string("output.path", cfg.output_path);
  cfg.override_validation =
      keys.get_bool("validation.override", cfg.override_validation);

  keys.check_all_used();

  if (cfg.n_iters < 1) throw std::runtime_error("run.iters must be >= 1");
  if (cfg.replications < 1) {
    throw std::runtime_error("run.replications must be >= 1");
  }

  if (!cfg.override_validation) {
    std::vector<std::string> violations = validate(cfg.schedules, cfg.mode);
    if (!violations.empty()) {
      std::string msg = "schedule constraints violated:";
      for (const std::string& v : violations) msg += "\n  " + v;
      msg += "\nset validation.override = true to run anyway";
      throw std::runtime_error(msg);
    }
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "problem = " << cfg.problem_name << "\n";
  out << "mode = " << (cfg.mode == RunMode::Optimize ? "optimize" : "estimate")
      << "\n";
  out << "kernel.type = " << cfg.kernel_type << "\n";
  out << "kernel.r = " << cfg.kernel_r << "\n";

  const ScheduleSet& s = cfg.schedules;
  emit_schedule(out, "schedule.alpha", s.alpha);
  emit_schedule(out, "schedule.beta.nu", s.beta_nu);
  for (size_t j = 0; j < s.beta_lambda.size(); ++j) {
    emit_schedule(out, "schedule.beta.lambda." + std::to_string(j + 1),
                  s.beta_lambda[j]);
  }
  emit_schedule(out, "schedule.beta.g.nu", s.beta_g_nu);
  for (size_t j = 0; j < s.beta_g_lambda.size(); ++j) {
    emit_schedule(out, "schedule.beta.g.lambda." + std::to_string(j + 1),
                  s.beta_g_lambda[j]);
  }
  emit_schedule(out, "schedule.c", s.c);
  emit_schedule(out, "schedule.h", s.h);
  if (s.h_grad) emit_schedule(out, "schedule.h_grad", *s.h_grad);

  out << "run.iters = " << cfg.n_iters << "\n";
  out << "run.replications = " << cfg.replications << "\n";
  out << "run.base_seed = " << cfg.base_seed << "\n";
  if (!cfg.checkpoints.empty()) {
    out << "run.checkpoints = ";
    for (size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      if (i) out << ",";
      out << cfg.checkpoints[i];
    }
    out << "\n";
  }
  out << "output.path = " << cfg.output_path << "\n";
  out << "validation.override = "
      << (cfg.override_validation ? "true" : "false") << "\n";
  return out.str();
}

uint64_t config_fingerprint(const RunConfig& cfg) {
  return fnv1a(serialize_config(cfg));
}

RunConfig preset_config(const std::string& name) {
  ReferenceBenchmark b = reference_benchmark(name);
  RunConfig cfg;
  cfg.problem_name = name;
  cfg.mode = b.mode;
  cfg.schedules = b.schedules;
  cfg.n_iters = 1000000;
  cfg.replications = 40;
  cfg.base_seed = 12345;
  cfg.output_path = name;
  // The experiment step sizes are tuned multipliers, not the rate-optimal
  // exponent family; run them as published.
  cfg.override_validation = !validate(cfg.schedules, cfg.mode).empty();
  return cfg;
}

RunComponents make_components(const RunConfig& cfg) {
  RunComponents rc;
  ReferenceBenchmark b = reference_benchmark(cfg.problem_name);
  rc.problem = b.problem;
  rc.metrics = b.metrics;
  rc.schedules = cfg.schedules;
  rc.mode = cfg.mode;

  size_t p = static_cast<size_t>(rc.problem.p);
  if (rc.schedules.beta_lambda.size() != p ||
      rc.schedules.beta_g_lambda.size() != p) {
    throw std::runtime_error(
        "schedule.beta.lambda and schedule.beta.g.lambda must have one entry "
        "per contextual measure (problem has " + std::to_string(p) + ")");
  }

  if (cfg.kernel_type == "gaussian") {
    rc.kernel = gaussian_kernel();
  } else {
    rc.kernel = make_high_order(gaussian_kernel(), cfg.kernel_r);
  }
  rc.checkpoints =
      cfg.checkpoints.empty() ? default_checkpoints(cfg.n_iters)
                              : cfg.checkpoints;
  return rc;
}

}  // namespace kbsa
