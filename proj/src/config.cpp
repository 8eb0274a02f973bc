#include "cadens/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cadens {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

ConfigMap::Value parse_value(const std::string& raw, int lineno) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config: empty value at line " + std::to_string(lineno));
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw ConfigError("config: unterminated string at line " + std::to_string(lineno));
    }
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') {
      throw ConfigError("config: unterminated array at line " + std::to_string(lineno));
    }
    std::vector<double> arr;
    std::istringstream ss(v.substr(1, v.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const std::string t = trim(tok);
      if (t.empty()) continue;
      try {
        std::size_t pos = 0;
        arr.push_back(std::stod(t, &pos));
        if (pos != t.size()) throw std::invalid_argument(t);
      } catch (...) {
        throw ConfigError("config: bad array element '" + t + "' at line " +
                          std::to_string(lineno));
      }
    }
    return arr;
  }
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (...) {
  }
  return v;  // bare string
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config: malformed section header at line " +
                          std::to_string(lineno));
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw ConfigError("config: empty section name at line " + std::to_string(lineno));
      }
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config: empty key at line " + std::to_string(lineno));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    out.values_[full] = parse_value(t.substr(eq + 1), lineno);
  }
  return out;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) > 0; }

double ConfigMap::get_number(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("config: " + key + " must be a number");
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
  const double d = get_number(key, static_cast<double>(fallback));
  return static_cast<std::int64_t>(d);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const bool* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("config: " + key + " must be a boolean");
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("config: " + key + " must be a string");
}

std::vector<double> ConfigMap::get_array(const std::string& key,
                                         const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  throw ConfigError("config: " + key + " must be an array");
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.grid.gx = make_grid(90, 0.0, 1.0, 2.0);
  cfg.grid.gy = make_grid(128, 3.8, 0.04, 2.0);
  return cfg;
}

namespace {

MaternHyperPrior prior_from(const ConfigMap& c, const std::string& key,
                            const MaternHyperPrior& fallback) {
  MaternHyperPrior p = fallback;
  const auto a = c.get_array(key + ".a", {p.a.mean, p.a.stddev});
  const auto k0 = c.get_array(key + ".k0", {p.k0.mean, p.k0.stddev});
  const auto gamma = c.get_array(key + ".gamma", {p.gamma.mean, p.gamma.stddev});
  if (a.size() != 2 || k0.size() != 2 || gamma.size() != 2) {
    throw ConfigError("config: " + key + " priors must be [mean, std] pairs");
  }
  p.a = LogNormalPrior{a[0], a[1]};
  p.k0 = LogNormalPrior{k0[0], k0[1]};
  p.gamma = NormalPrior{gamma[0], gamma[1]};
  return p;
}

}  // namespace

RunConfig resolve_run_config(const ConfigMap& c) {
  RunConfig cfg = default_run_config();

  cfg.data_path = c.get_string("data.path", cfg.data_path);
  cfg.dataset_label = c.get_string("data.label", cfg.dataset_label);
  cfg.threshold = c.get_number("data.threshold", cfg.threshold);
  cfg.strict_parse = c.get_bool("data.strict_parse", cfg.strict_parse);

  const double y_start = c.get_number("grid.y.start", cfg.threshold);
  cfg.grid.gx = make_grid(static_cast<int>(c.get_int("grid.x.n_pixels", 90)),
                          c.get_number("grid.x.start", 0.0),
                          c.get_number("grid.x.step", 1.0),
                          c.get_number("grid.x.pad_factor", 2.0));
  cfg.grid.gy = make_grid(static_cast<int>(c.get_int("grid.y.n_pixels", 128)),
                          y_start, c.get_number("grid.y.step", 0.04),
                          c.get_number("grid.y.pad_factor", 2.0));

  cfg.rho0 = c.get_number("model.rho0", 0.0);
  const std::string indep = c.get_string("model.independent_mode", "removed");
  if (indep == "removed") {
    cfg.suppressed_coupling = false;
  } else if (indep == "suppressed") {
    cfg.suppressed_coupling = true;
  } else {
    throw ConfigError("config: model.independent_mode must be 'removed' or 'suppressed'");
  }

  FieldPriors defaults = default_field_priors();
  cfg.priors.f = prior_from(c, "prior.f", defaults.f);
  cfg.priors.g = prior_from(c, "prior.g", cfg.priors.f);
  cfg.priors.h_x = prior_from(c, "prior.h.x", cfg.priors.f);
  cfg.priors.h_y = prior_from(c, "prior.h.y", cfg.priors.g);
  cfg.priors.zero_mode =
      UniformPrior{c.get_number("prior.zero_mode.lo", defaults.zero_mode.lo),
                   c.get_number("prior.zero_mode.hi", defaults.zero_mode.hi)};
  if (!(cfg.priors.zero_mode.lo > 0.0) ||
      !(cfg.priors.zero_mode.lo < cfg.priors.zero_mode.hi)) {
    throw ConfigError("config: prior.zero_mode needs 0 < lo < hi");
  }

  cfg.inference.n_samples = static_cast<int>(c.get_int("inference.n_samples", 6));
  cfg.inference.n_global_iterations =
      static_cast<int>(c.get_int("inference.n_global_iterations", 15));
  cfg.inference.cg_tolerance = c.get_number("inference.cg_tolerance", 1e-6);
  cfg.inference.cg_max_iter = static_cast<int>(c.get_int("inference.cg_max_iter", 500));
  cfg.inference.optimizer_steps =
      static_cast<int>(c.get_int("inference.optimizer_steps", 25));
  if (cfg.inference.n_samples < 2 || cfg.inference.n_samples % 2 != 0) {
    throw ConfigError("config: inference.n_samples must be even and >= 2");
  }

  cfg.evidence.probes = static_cast<int>(c.get_int("evidence.probes", 8));
  cfg.evidence.lanczos_order =
      static_cast<int>(c.get_int("evidence.lanczos_order", 50));
  cfg.permutations = static_cast<int>(c.get_int("evidence.permutations", 10));

  cfg.probit_mu = c.get_number("infectivity.mu", 0.0);
  cfg.probit_sigma = c.get_number("infectivity.sigma", 1.0);
  cfg.probit_shift = c.get_number("infectivity.shift", 0.0);
  cfg.curve_file = c.get_string("infectivity.curve_file", "");

  cfg.out_dir = c.get_string("output.directory", "out");
  cfg.plots = c.get_bool("output.plots", false);
  cfg.threads = static_cast<int>(c.get_int("output.threads", 0));
  cfg.seed = static_cast<std::uint64_t>(c.get_int("seed", 42));
  if (c.has("inference.seed")) {
    cfg.seed = static_cast<std::uint64_t>(c.get_int("inference.seed", 42));
  }
  if (const char* env = std::getenv("CAUSAL_DENSITY_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }
  cfg.inference.seed = cfg.seed;
  cfg.inference.threads = cfg.threads;
  return cfg;
}

}  // namespace cadens
