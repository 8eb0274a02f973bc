#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cadens/evidence.hpp"
#include "cadens/generative.hpp"
#include "cadens/inference.hpp"

namespace cadens {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key/value view of a TOML-style config file: `[section.sub]` headers,
// `key = value` lines, values are numbers, booleans, quoted strings or
// arrays of numbers. Keys are exposed dotted (`prior.f.a`).
class ConfigMap {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text);

  bool has(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_array(const std::string& key,
                                const std::vector<double>& fallback) const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

// Fully resolved run configuration.
struct RunConfig {
  // data
  std::string data_path;
  std::string dataset_label;
  double threshold = 3.8;
  bool strict_parse = false;

  // grids (y start tracks the threshold unless set explicitly)
  Grid2D grid;

  // model
  double rho0 = 0.0;  // 0 = N/100 after thresholding
  bool suppressed_coupling = false;
  FieldPriors priors = default_field_priors();

  InferenceConfig inference;
  EvidenceConfig evidence;
  int permutations = 10;

  // infectivity
  double probit_mu = 0.0;  // 0 = anchor at I(5.4) = 0.05
  double probit_sigma = 1.0;
  double probit_shift = 0.0;
  std::string curve_file;

  // output
  std::string out_dir = "out";
  bool plots = false;
  int threads = 0;
  std::uint64_t seed = 42;
};

// Defaults, overlaid with the config file when given. The CAUSAL_DENSITY_SEED
// environment variable overrides the configured seed.
RunConfig resolve_run_config(const ConfigMap& file_values);
RunConfig default_run_config();

}  // namespace cadens
