#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dlra/core/truncation.hpp"
#include "dlra/integrators/step.hpp"
#include "dlra/ode/solvers.hpp"

namespace dlra {

/// Configuration problems map to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// key = value text file; '#' starts a comment, keys are unique.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    KeyValueFile kv;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        std::istringstream rest(line);
        std::string stray;
        if (rest >> stray)
          throw ConfigError("malformed config line: " + line);
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("empty key in config line: " + line);
      if (!kv.values_.emplace(key, value).second)
        throw ConfigError("duplicate config key: " + key);
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number: " +
                        it->second);
    }
  }

  long long get_integer(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not an integer: " +
                        it->second);
    }
  }

  std::vector<std::string> get_list(const std::string& key,
                                    const std::string& fallback) const {
    const std::string joined = get_string(key, fallback);
    std::vector<std::string> items;
    std::string item;
    std::istringstream iss(joined);
    while (std::getline(iss, item, ',')) {
      item = trim(item);
      if (!item.empty()) items.push_back(item);
    }
    return items;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
  }

  std::map<std::string, std::string> values_;
};

inline IntegratorVariant variant_from_string(const std::string& name) {
  if (name == "parallel1") return IntegratorVariant::parallel1;
  if (name == "parallel2_v1") return IntegratorVariant::parallel2_v1;
  if (name == "parallel2_v2") return IntegratorVariant::parallel2_v2;
  if (name == "augmented_bug") return IntegratorVariant::augmented_bug;
  throw ConfigError("unknown integrator variant: " + name);
}

/// Benchmark run description shared by the study runners.
struct ExperimentConfig {
  std::string problem = "schrodinger";
  // schrodinger
  Index grid_size = 100;
  // lattice
  Index cells_per_dim = 70;
  int moment_degree = 9;
  double cfl = 0.5;
  std::string lattice_overrides;  // optional override file
  // synthetic problems
  Index rows = 20;
  Index cols = 20;
  double rate = -1.0;

  std::vector<IntegratorVariant> variants;
  std::vector<Index> ranks;
  double h_max = 1e-1;
  double h_min = 1e-3;
  int h_points = 8;
  double final_time = 1.0;
  TruncationMode truncation = TruncationMode::fixed_rank;
  double theta = 1e-6;
  SolverConfig solver;
  double ref_rtol = 1e-10;
  double ref_atol = 1e-10;
  std::uint64_t seed = 42;
  int threads = 1;

  void validate() const {
    if (problem != "schrodinger" && problem != "lattice" &&
        problem != "synthetic_skew" && problem != "synthetic_two_sided" &&
        problem != "synthetic_scalar")
      throw ConfigError("unknown problem: " + problem);
    if (final_time <= 0.0) throw ConfigError("final_time must be > 0");
    if (h_points < 1) throw ConfigError("h_points must be >= 1");
    if (h_points > 1 && !(h_max > h_min))
      throw ConfigError("h grid must be strictly decreasing (h_max > h_min)");
    if (h_min <= 0.0) throw ConfigError("h_min must be > 0");
    if (variants.empty()) throw ConfigError("no integrator variants given");
    if (ranks.empty()) throw ConfigError("no ranks given");
    if (theta < 0.0) throw ConfigError("theta must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }

  /// strictly decreasing geometric grid from h_max to h_min
  std::vector<double> h_grid() const {
    std::vector<double> grid(static_cast<std::size_t>(h_points));
    if (h_points == 1) {
      grid[0] = h_max;
      return grid;
    }
    const double ratio =
        std::pow(h_min / h_max, 1.0 / static_cast<double>(h_points - 1));
    double h = h_max;
    for (int i = 0; i < h_points; ++i) {
      grid[static_cast<std::size_t>(i)] = h;
      h *= ratio;
    }
    grid.back() = h_min;
    return grid;
  }
};

inline ExperimentConfig parse_experiment_config(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::parse(path);
  ExperimentConfig cfg;
  cfg.problem = kv.get_string("problem", cfg.problem);
  cfg.grid_size = kv.get_integer("n", cfg.grid_size);
  cfg.cells_per_dim = kv.get_integer("cells_per_dim", cfg.cells_per_dim);
  cfg.moment_degree =
      static_cast<int>(kv.get_integer("moment_degree", cfg.moment_degree));
  cfg.cfl = kv.get_double("cfl", cfg.cfl);
  cfg.lattice_overrides =
      kv.get_string("lattice_overrides", cfg.lattice_overrides);
  cfg.rows = kv.get_integer("rows", cfg.rows);
  cfg.cols = kv.get_integer("cols", cfg.cols);
  cfg.rate = kv.get_double("rate", cfg.rate);

  for (const auto& name :
       kv.get_list("variants", "parallel1,parallel2_v1,parallel2_v2"))
    cfg.variants.push_back(variant_from_string(name));
  for (const auto& r : kv.get_list("ranks", "10")) {
    try {
      cfg.ranks.push_back(std::stoll(r));
    } catch (const std::exception&) {
      throw ConfigError("bad rank value: " + r);
    }
  }

  cfg.h_max = kv.get_double("h_max", cfg.h_max);
  cfg.h_min = kv.get_double("h_min", cfg.h_min);
  cfg.h_points = static_cast<int>(kv.get_integer("h_points", cfg.h_points));
  cfg.final_time = kv.get_double("final_time", cfg.final_time);

  const std::string mode = kv.get_string("truncation", "fixed_rank");
  if (mode == "fixed_rank") cfg.truncation = TruncationMode::fixed_rank;
  else if (mode == "tolerance") cfg.truncation = TruncationMode::tolerance;
  else throw ConfigError("unknown truncation mode: " + mode);
  cfg.theta = kv.get_double("theta", cfg.theta);

  const std::string method = kv.get_string("solver", "embedded45");
  if (method == "embedded45") cfg.solver.method = OdeMethod::embedded45;
  else if (method == "heun") cfg.solver.method = OdeMethod::heun;
  else if (method == "rk4") cfg.solver.method = OdeMethod::rk4;
  else throw ConfigError("unknown solver method: " + method);
  cfg.solver.substeps =
      static_cast<int>(kv.get_integer("substeps", cfg.solver.substeps));
  cfg.solver.rtol = kv.get_double("rtol", cfg.solver.rtol);
  cfg.solver.atol = kv.get_double("atol", cfg.solver.atol);
  cfg.ref_rtol = kv.get_double("ref_rtol", cfg.ref_rtol);
  cfg.ref_atol = kv.get_double("ref_atol", cfg.ref_atol);

  cfg.seed = static_cast<std::uint64_t>(kv.get_integer("seed", 42));
  cfg.threads = static_cast<int>(kv.get_integer("threads", cfg.threads));

  cfg.validate();
  return cfg;
}

}  // namespace dlra
