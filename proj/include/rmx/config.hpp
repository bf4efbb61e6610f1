#ifndef RMX_CONFIG_HPP_
#define RMX_CONFIG_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rmx/ensembles.hpp"
#include "rmx/errors.hpp"
#include "rmx/extremes.hpp"

namespace rmx {

inline constexpr std::string_view kCommands[] = {"sample-gaps", "couple",  "observable",
                                                 "tw-build",    "edge-rate", "fluctuations"};

/// Every setting of an experiment run. Each field has a default; values from
/// a config file override the defaults, RMX_SEED / RMX_WORKERS override the
/// file, and command-line flags override everything.
struct ExperimentConfig {
  std::string command = "sample-gaps";

  // ensemble
  std::string symmetry_class = "symmetric";
  std::size_t n = 200;
  std::string entry_law = "gaussian";
  double sigma = 0.5;  // smoothing scale of smoothed_rademacher
  std::string profile = "flat";

  // statistics
  std::size_t samples = 100;
  Interval interval{-1.0, 1.0};
  std::size_t k = 1;
  double kappa = 0.1;
  Interval box{0.0, 1.0};  // gap range A of the counted box A x I
  std::vector<double> t_grid{0.05, 0.1, 0.2, 0.4};
  std::vector<double> e_grid{0.2};
  std::vector<double> eta_grid{0.01};
  std::vector<std::size_t> n_list{100, 200, 400};
  std::vector<std::size_t> indices{30};
  double w = 2.0;                        // polylog proxy of the edge-bound curve
  std::string coupling = "auto";         // auto | particle | exact
  std::string lambda_start = "invariant";  // invariant | ensemble
  double tolerance = 1e-12;

  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output;  // empty: rmx-<command>.<format>
  std::string format = "csv";

  std::string output_path() const { return output.empty() ? "rmx-" + command + "." + format : output; }

  SymmetryClass symmetry() const {
    return symmetry_class == "hermitian" ? SymmetryClass::hermitian : SymmetryClass::symmetric;
  }
  int beta() const { return beta_of(symmetry()); }

  /// Ensemble of size `size` (defaults to n). The variance profile, if not
  /// flat, is drawn from a dedicated substream of the seed.
  EnsembleSpec ensemble(std::size_t size = 0) const {
    EnsembleSpec s;
    s.symmetry = symmetry();
    s.n = size ? size : n;
    s.entry_law.kind = entry_law_kind();
    s.entry_law.smoothing_scale = sigma;
    if (profile != "flat") {
      const ProfileKind kind = profile == "two_band" ? ProfileKind::two_band : ProfileKind::random_doubly_stochastic;
      s.profile = std::make_shared<const VarianceProfile>(
          build_variance_profile(kind, s.n, RandomStream(seed, ~std::uint64_t{0})));
    }
    s.validate();
    return s;
  }

  EntryLawKind entry_law_kind() const {
    if (entry_law == "uniform") return EntryLawKind::uniform;
    if (entry_law == "rademacher") return EntryLawKind::rademacher;
    if (entry_law == "smoothed_rademacher") return EntryLawKind::smoothed_rademacher;
    return EntryLawKind::gaussian;
  }

  /// Applies one key = value setting. Throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);

  /// Checks cross-field consistency. Throws ConfigError.
  void validate() const;

  /// Effective configuration; the worker count is left out on request since it
  /// never influences results.
  nlohmann::json to_json(bool with_workers = true) const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  double x = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(x))
    throw ConfigError("config: '" + key + "' expects a real number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size() || t.empty())
    throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return x;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma separated list");
  return out;
}

inline std::vector<std::size_t> parse_uints(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : split_list(v)) out.push_back(parse_uint(key, s));
  if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma separated list");
  return out;
}

inline Interval parse_interval(const std::string& key, const std::string& v) {
  const auto d = parse_doubles(key, v);
  if (d.size() != 2 || !(d[0] <= d[1]))
    throw ConfigError("config: '" + key + "' expects two increasing reals 'a,b', got '" + v + "'");
  return {d[0], d[1]};
}

inline std::string parse_choice(const std::string& key, const std::string& v,
                                std::initializer_list<std::string_view> allowed) {
  const std::string t = trim(v);
  for (auto a : allowed)
    if (t == a) return t;
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
  throw ConfigError("config: '" + key + "' must be one of " + list + ", got '" + v + "'");
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
  std::string key = detail::trim(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  using namespace detail;
  if (key == "command") {
    command = parse_choice(key, value, {"sample-gaps", "couple", "observable", "tw-build", "edge-rate", "fluctuations"});
  } else if (key == "class") {
    symmetry_class = parse_choice(key, value, {"symmetric", "hermitian"});
  } else if (key == "n") {
    n = parse_uint(key, value);
  } else if (key == "law") {
    entry_law = parse_choice(key, value, {"gaussian", "uniform", "rademacher", "smoothed_rademacher"});
  } else if (key == "sigma") {
    sigma = parse_double(key, value);
  } else if (key == "profile") {
    profile = parse_choice(key, value, {"flat", "two_band", "random_doubly_stochastic"});
  } else if (key == "samples") {
    samples = parse_uint(key, value);
  } else if (key == "interval") {
    interval = parse_interval(key, value);
  } else if (key == "k") {
    k = parse_uint(key, value);
  } else if (key == "kappa") {
    kappa = parse_double(key, value);
  } else if (key == "box") {
    box = parse_interval(key, value);
  } else if (key == "t-grid") {
    t_grid = parse_doubles(key, value);
  } else if (key == "e-grid") {
    e_grid = parse_doubles(key, value);
  } else if (key == "eta-grid") {
    eta_grid = parse_doubles(key, value);
  } else if (key == "n-list") {
    n_list = parse_uints(key, value);
  } else if (key == "indices") {
    indices = parse_uints(key, value);
  } else if (key == "w") {
    w = parse_double(key, value);
  } else if (key == "coupling") {
    coupling = parse_choice(key, value, {"auto", "particle", "exact"});
  } else if (key == "lambda-start") {
    lambda_start = parse_choice(key, value, {"invariant", "ensemble"});
  } else if (key == "tolerance") {
    tolerance = parse_double(key, value);
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "workers") {
    const auto v = parse_uint(key, value);
    if (v == 0 || v > 1024) throw ConfigError("config: 'workers' must lie in [1, 1024]");
    workers = static_cast<unsigned>(v);
  } else if (key == "output") {
    output = trim(value);
  } else if (key == "format") {
    format = parse_choice(key, value, {"csv", "json"});
  } else {
    throw ConfigError("config: unknown key '" + raw_key + "'");
  }
}

inline void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (n < 2) fail("'n' must be at least 2");
  if (samples == 0) fail("'samples' must be positive");
  if (!(sigma >= 0.0)) fail("'sigma' must be nonnegative");
  if (!(kappa > 0.0 && kappa < 2.0)) fail("'kappa' must lie in (0, 2)");
  if (k == 0) fail("'k' must be at least 1");
  if (!(interval.lo > -2.0 && interval.hi < 2.0 && interval.lo < interval.hi))
    fail("'interval' must be a nondegenerate subset of (-2, 2)");
  if (box.lo < 0.0) fail("'box' must lie in [0, inf)");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0 && t_grid[i] <= 1.0)) fail("'t-grid' values must lie in (0, 1]");
    if (i && !(t_grid[i] > t_grid[i - 1])) fail("'t-grid' must be strictly increasing");
  }
  for (double e : e_grid)
    if (!(std::abs(e) < 2.0)) fail("'e-grid' values must lie in (-2, 2)");
  for (double eta : eta_grid)
    if (!(eta > 0.0 && eta < 1.0)) fail("'eta-grid' values must lie in (0, 1)");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) fail("'n-list' values must be at least 2");
    if (i && !(n_list[i] > n_list[i - 1])) fail("'n-list' must be increasing");
  }
  if (command == "fluctuations")
    for (std::size_t i : indices)
      if (i < 2 || 2 * i > n) fail("'indices' must satisfy 2 <= i <= n/2");
  if (!(w > 0.0)) fail("'w' must be positive");
  if (!(tolerance > 0.0 && tolerance < 1e-4)) fail("'tolerance' must lie in (0, 1e-4)");
}

inline nlohmann::json ExperimentConfig::to_json(bool with_workers) const {
  nlohmann::json j;
  j["command"] = command;
  j["class"] = symmetry_class;
  j["n"] = n;
  j["law"] = entry_law;
  j["sigma"] = sigma;
  j["profile"] = profile;
  j["samples"] = samples;
  j["interval"] = {interval.lo, interval.hi};
  j["k"] = k;
  j["kappa"] = kappa;
  j["box"] = {box.lo, box.hi};
  j["t_grid"] = t_grid;
  j["e_grid"] = e_grid;
  j["eta_grid"] = eta_grid;
  j["n_list"] = n_list;
  j["indices"] = indices;
  j["w"] = w;
  j["coupling"] = coupling;
  j["lambda_start"] = lambda_start;
  j["tolerance"] = tolerance;
  j["seed"] = seed;
  if (with_workers) j["workers"] = workers;
  j["output"] = output_path();
  j["format"] = format;
  return j;
}

/// Reads `key = value` lines; blank lines and lines starting with '#' are skipped.
inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    cfg.set(t.substr(0, eq), t.substr(eq + 1));
  }
}

/// RMX_SEED and RMX_WORKERS, when set.
inline void apply_environment(ExperimentConfig& cfg) {
  if (const char* s = std::getenv("RMX_SEED"); s && *s) cfg.set("seed", s);
  if (const char* w = std::getenv("RMX_WORKERS"); w && *w) cfg.set("workers", w);
}

}  // namespace rmx

#endif  // RMX_CONFIG_HPP_
