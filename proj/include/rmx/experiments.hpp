#ifndef RMX_EXPERIMENTS_HPP_
#define RMX_EXPERIMENTS_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"

#include "rmx/config.hpp"
#include "rmx/dbm.hpp"
#include "rmx/ensembles.hpp"
#include "rmx/errors.hpp"
#include "rmx/extremes.hpp"
#include "rmx/io.hpp"
#include "rmx/observable.hpp"
#include "rmx/parallel.hpp"
#include "rmx/spectral.hpp"
#include "rmx/stats.hpp"
#include "rmx/tracy_widom.hpp"

namespace rmx {

using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Cell>;

/// Per-sample record stream: RFC 4180 CSV with a header, or one JSON object per line.
class RecordWriter {
 public:
  RecordWriter(std::ostream& os, std::string format, std::vector<std::string> columns)
      : os_(os), format_(std::move(format)), columns_(std::move(columns)) {
    if (format_ == "csv") CsvWriter(os_).header(columns_);
  }

  void write(const Row& row) {
    detail::require(row.size() == columns_.size(), "record writer: row width does not match the header");
    if (format_ == "csv") {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os_ << ',';
        os_ << csv_cell(row[i]);
      }
      os_ << "\r\n";
    } else {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < row.size(); ++i) j[columns_[i]] = json_cell(row[i]);
      os_ << j.dump() << '\n';
    }
    ++count_;
  }

  std::size_t count() const { return count_; }
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  static std::string csv_cell(const Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
    if (std::holds_alternative<std::string>(c)) return csv_field(std::get<std::string>(c));
    return {};
  }
  static nlohmann::ordered_json json_cell(const Cell& c) {
    if (std::holds_alternative<std::int64_t>(c)) return std::get<std::int64_t>(c);
    if (std::holds_alternative<double>(c)) return std::get<double>(c);
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return nullptr;
  }

  std::ostream& os_;
  std::string format_;
  std::vector<std::string> columns_;
  std::size_t count_ = 0;
};

inline Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }
inline Cell cell(double v) { return v; }
inline Cell cell(std::string v) { return v; }

/// Stream of sample `id`: substream index equal to the sample id.
inline RandomStream sample_stream(const ExperimentConfig& cfg, std::size_t id) {
  return RandomStream(cfg.seed, static_cast<std::uint64_t>(id));
}

// ---------------------------------------------------------------- coupling

/// Bulk indices of the gap field: k in [N/3, 2N/3], 1-based.
inline std::pair<std::size_t, std::size_t> bulk_range(std::size_t n) {
  return {(n + 2) / 3, (2 * n) / 3};
}

/// Median over bulk k of |gap_error_k(t)|.
inline double bulk_gap_error(const CoupledTrajectory& traj, double t) {
  const auto f = coupling_fields(traj, t);
  const auto [lo, hi] = bulk_range(traj.n());
  std::vector<double> v;
  for (std::size_t k = lo; k <= hi && k <= f.gap_error.size(); ++k) v.push_back(std::abs(f.gap_error[k - 1]));
  return median(v);
}

/// |lambda_1(t) - mu_1(t)|.
inline double edge_difference(const CoupledTrajectory& traj, double t) {
  const std::size_t i = traj.index_of(t);
  return std::abs(traj.lambda[i][0] - traj.mu[i][0]);
}

inline bool use_particle_coupling(const ExperimentConfig& cfg) {
  if (cfg.coupling == "particle") return true;
  if (cfg.coupling == "exact") return false;
  return cfg.n <= 400;
}

/// One coupled run for sample `id`: lambda starts from the configured ensemble
/// (or an independent invariant Gaussian draw), mu from an invariant Gaussian draw.
inline CoupledTrajectory coupled_run(const ExperimentConfig& cfg, const EnsembleSpec& spec, std::size_t id,
                                     const std::vector<double>& grid) {
  const RandomStream s = sample_stream(cfg, id);
  const MatrixSample h0 = cfg.lambda_start == "ensemble" ? sample_matrix(spec, s.split(0))
                                                        : sample_invariant_gaussian(spec.symmetry, spec.n, s.split(0));
  const MatrixSample g0 = sample_invariant_gaussian(spec.symmetry, spec.n, s.split(1));
  if (use_particle_coupling(cfg)) return couple_particle(eigenvalues(h0), eigenvalues(g0), spec.beta(), grid, s);
  return couple_exact(h0, g0, grid, s);
}

inline std::vector<double> with_origin(const std::vector<double>& t_grid) {
  std::vector<double> g{0.0};
  g.insert(g.end(), t_grid.begin(), t_grid.end());
  return g;
}

struct DecaySummary {
  std::vector<double> times;
  std::vector<double> medians;
  LinearFit fit;
  bool fitted = false;
};

/// Median over runs of per-run values, and the log-log slope against t.
inline DecaySummary decay_summary(const std::vector<double>& times, const std::vector<std::vector<double>>& per_run) {
  DecaySummary d;
  d.times = times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> v;
    for (const auto& run : per_run) v.push_back(run[i]);
    d.medians.push_back(median(v));
  }
  if (times.size() >= 2) {
    d.fit = log_log_fit(d.times, d.medians);
    d.fitted = true;
  }
  return d;
}

inline nlohmann::ordered_json to_json(const DecaySummary& d) {
  nlohmann::ordered_json j;
  j["t"] = d.times;
  j["median"] = d.medians;
  if (d.fitted) {
    j["slope"] = d.fit.slope;
    j["slope_stderr"] = d.fit.slope_stderr;
  }
  return j;
}

// ------------------------------------------------------------- commands

struct CommandOutput {
  nlohmann::ordered_json summary;
  std::string reference;
};

inline CommandOutput run_sample_gaps(const ExperimentConfig& cfg, RecordWriter* out) {
  const EnsembleSpec spec = cfg.ensemble();
  const Interval iv = cfg.interval;
  if (!(iv.lo > -2.0 + cfg.kappa && iv.hi < 2.0 - cfg.kappa))
    throw ConfigError("config: 'interval' must lie inside (-2 + kappa, 2 - kappa)");
  const bool herm = spec.symmetry == SymmetryClass::hermitian;
  struct Sample {
    double tau = 0, tau_star = 0;
    std::size_t count = 0;
  };
  const auto samples = parallel_map(cfg.samples, cfg.workers, [&](std::size_t id) {
    const Spectrum s = eigenvalues(sample_matrix(spec, sample_stream(cfg, id)));
    Sample r;
    r.tau = k_smallest_rescaled(s, iv, cfg.k);
    if (herm) r.tau_star = k_largest_rescaled(s, iv, cfg.k);
    const auto pts = gap_process(s, cfg.kappa);
    r.count = count_points(pts, cfg.box, iv);
    return r;
  });
  std::vector<double> tau, tau_star, counts;
  std::vector<std::int64_t> icounts;
  for (std::size_t id = 0; id < samples.size(); ++id) {
    const auto& r = samples[id];
    if (out)
      out->write({cell(id), cell(cfg.k), cell(r.tau), herm ? cell(r.tau_star) : Cell{}, cell(r.count)});
    tau.push_back(r.tau);
    tau_star.push_back(r.tau_star);
    counts.push_back(static_cast<double>(r.count));
    icounts.push_back(static_cast<std::int64_t>(r.count));
  }
  const int beta = spec.beta();
  const double p = beta + 1.0, kk = static_cast<double>(cfg.k);
  nlohmann::ordered_json stats = nlohmann::ordered_json::array();
  auto entry = [&](const std::string& name, double value, double ref, double distance, double se) {
    nlohmann::ordered_json j;
    j["statistic"] = name;
    j["N"] = spec.n;
    j["beta"] = beta;
    j["samples"] = cfg.samples;
    j["value"] = value;
    j["reference_value"] = ref;
    j["distance"] = distance;
    j["stderr"] = se;
    j["seed"] = cfg.seed;
    return j;
  };
  const KsResult ks = ks_test(tau, [&](double x) { return limit_cdf_smallest(cfg.k, beta, x); });
  stats.push_back(entry("tau_k_ks", mean(tau), std::exp(std::lgamma(kk + 1.0 / p) - std::lgamma(kk)), ks.distance,
                        ks.stderr_binomial));
  const double lambda = intensity(cfg.box, iv, beta);
  const double se_count = cfg.samples >= 2 ? standard_error(counts) : 0.0;
  auto cnt = entry("gap_count", mean(counts), lambda, std::abs(mean(counts) - lambda), se_count);
  if (cfg.samples >= 2) cnt["dispersion_ratio"] = poisson_dispersion(icounts).ratio;
  stats.push_back(cnt);
  if (herm) {
    const double c = gumbel_constant(iv);
    double psi = -std::numbers::egamma;
    for (std::size_t j = 1; j < cfg.k; ++j) psi += 1.0 / static_cast<double>(j);
    const KsResult ks2 = ks_test(tau_star, [&](double x) { return limit_cdf_largest(cfg.k, c, x); });
    auto e = entry("tau_star_k_ks", mean(tau_star), c - psi, ks2.distance, ks2.stderr_binomial);
    e["gumbel_constant"] = c;
    stats.push_back(e);
  }
  return {stats, "k-th smallest bulk gap vs 1 - exp(-x^(beta+1)) sum_{j<k} x^(j(beta+1))/j!; "
                 "box counts vs the Poisson intensity; k-th largest gap (hermitian) vs the Gumbel law "
                 "exp(-e^(c-x)) sum_{j<k} e^(j(c-x))/j!"};
}

inline CommandOutput run_couple(const ExperimentConfig& cfg, RecordWriter* out) {
  const EnsembleSpec spec = cfg.ensemble();
  const auto grid = with_origin(cfg.t_grid);
  const auto trajs = parallel_map(cfg.samples, cfg.workers, [&](std::size_t id) { return coupled_run(cfg, spec, id, grid); });
  std::vector<std::vector<double>> bulk, edge;
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const auto& tr = trajs[id];
    std::vector<double> b, e;
    for (double t : cfg.t_grid) {
      b.push_back(bulk_gap_error(tr, t));
      e.push_back(edge_difference(tr, t));
    }
    bulk.push_back(b);
    edge.push_back(e);
    if (!out) continue;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double t = tr.times[i];
      const auto f = coupling_fields(tr, t);
      for (std::size_t k = 0; k < tr.n(); ++k)
        out->write({cell(id), cell(t), cell(k + 1), cell(tr.lambda[i][k]), cell(tr.mu[i][k]), cell(f.delta[k]),
                    k + 1 < tr.n() ? cell(f.gap_error[k]) : Cell{}});
    }
  }
  const double t_edge = std::pow(static_cast<double>(cfg.n), -1.0 / 3.0);
  std::vector<double> late_t;
  std::vector<std::vector<double>> late(edge.size());
  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i)
    if (cfg.t_grid[i] >= t_edge) {
      late_t.push_back(cfg.t_grid[i]);
      for (std::size_t r = 0; r < edge.size(); ++r) late[r].push_back(edge[r][i]);
    }
  nlohmann::ordered_json s;
  s["N"] = cfg.n;
  s["beta"] = spec.beta();
  s["samples"] = cfg.samples;
  s["seed"] = cfg.seed;
  s["coupling"] = use_particle_coupling(cfg) ? "particle" : "exact";
  s["bulk_gap_error"] = to_json(decay_summary(cfg.t_grid, bulk));
  s["edge_difference"] = to_json(decay_summary(late_t, late));
  s["edge_time_threshold"] = t_edge;
  return {s, "median bulk |gap_error| and median |lambda_1 - mu_1| against t, expected to decay like 1/t"};
}

inline CommandOutput run_observable(const ExperimentConfig& cfg, RecordWriter* out) {
  const EnsembleSpec spec = cfg.ensemble();
  const auto grid = with_origin(cfg.t_grid);
  const double nn = static_cast<double>(cfg.n);
  using Key = std::tuple<std::string, double, double, double>;
  const auto rows = parallel_map(cfg.samples, cfg.workers, [&](std::size_t id) {
    const CoupledTrajectory tr = coupled_run(cfg, spec, id, grid);
    std::vector<std::pair<Key, std::pair<double, double>>> r;
    for (double e : cfg.e_grid)
      for (double t : cfg.t_grid) {
        if (t < 1.0)
          for (double eta : cfg.eta_grid)
            r.push_back({{"advection", e, eta, t}, {advection_residual(tr, {e, eta}, t), nn * eta}});
        const EdgeBoundResult b = edge_bound_statistic(tr, e, t, cfg.w);
        r.push_back({{"edge_bound", e, b.z.imag(), t}, {b.statistic, b.normalization}});
      }
    return r;
  });
  std::map<Key, std::vector<double>> groups;
  for (std::size_t id = 0; id < rows.size(); ++id)
    for (const auto& [key, val] : rows[id]) {
      if (out)
        out->write({cell(id), cell(std::get<0>(key)), cell(std::get<1>(key)), cell(std::get<2>(key)),
                    cell(std::get<3>(key)), cell(val.first), cell(val.second)});
      groups[key].push_back(val.first);
    }
  nlohmann::ordered_json s = nlohmann::ordered_json::array();
  for (auto& [key, v] : groups) {
    std::sort(v.begin(), v.end());
    nlohmann::ordered_json j;
    j["kind"] = std::get<0>(key);
    j["E"] = std::get<1>(key);
    j["eta"] = std::get<2>(key);
    j["t"] = std::get<3>(key);
    j["samples"] = v.size();
    j["median"] = median(v);
    j["q99"] = v[std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * v.size())) - 1)];
    j["max"] = v.back();
    s.push_back(j);
  }
  return {s, "advection: N Im z |f_t(z) - f_0(z_t)|; edge_bound: Im f~_t(E + i w^2/(N kappa^(1/2))) "
             "divided by kappa^(1/2)/max(kappa^(1/2), t)"};
}

inline CommandOutput run_tw_build(const ExperimentConfig& cfg, std::ostream* raw) {
  TwBuildOptions o;
  o.tolerance = cfg.tolerance;
  const TwTable t1 = build_tw_table(1, o), t2 = build_tw_table(2, o);
  if (raw) {
    if (cfg.format == "csv") {
      write_tw_csv(*raw, t1, t2);
    } else {
      for (std::size_t i = 0; i < t1.grid.size(); ++i) {
        nlohmann::ordered_json j;
        j["s"] = t1.grid[i];
        j["F1"] = t1.cdf[i];
        j["F2"] = t2.cdf[i];
        j["f1"] = t1.density[i];
        j["f2"] = t2.density[i];
        *raw << j.dump() << '\n';
      }
    }
  }
  nlohmann::ordered_json s;
  s["tolerance"] = cfg.tolerance;
  s["hash"] = tw_build_hash(t1) + tw_build_hash(t2);
  s["nodes"] = t1.grid.size();
  s["mean_tw1"] = t1.mean();
  s["mean_tw2"] = t2.mean();
  s["variance_tw1"] = t1.variance();
  s["variance_tw2"] = t2.variance();
  s["accuracy_tw1"] = t1.accuracy;
  s["accuracy_tw2"] = t2.accuracy;
  return {s, "Tracy-Widom CDFs from the Hastings-McLeod solution of Painleve II"};
}

inline CommandOutput run_edge_rate(const ExperimentConfig& cfg, RecordWriter* out) {
  if (cfg.profile != "flat") throw ConfigError("config: edge-rate supports only the flat profile");
  const EnsembleSpec base = EnsembleSpec::wigner(cfg.symmetry(), cfg.n_list.front(),
                                                 EntryLaw{cfg.entry_law_kind(), cfg.sigma});
  const auto rows = edge_rate_experiment(base, cfg.n_list, cfg.samples, cfg.seed, cfg.workers);
  nlohmann::ordered_json s = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    if (out)
      for (std::size_t id = 0; id < r.statistics.size(); ++id)
        out->write({cell(id), cell(r.n), cell(r.statistics[id])});
    nlohmann::ordered_json j;
    j["N"] = r.n;
    j["d_K"] = r.d_k;
    j["stderr"] = r.stderr_binomial;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    s.push_back(j);
  }
  return {s, "Kolmogorov distance of N^(2/3)(lambda_N - 2) to TW_beta"};
}

inline CommandOutput run_fluctuations(const ExperimentConfig& cfg, RecordWriter* out) {
  const EnsembleSpec spec = cfg.ensemble();
  const auto xs = parallel_map(cfg.samples, cfg.workers, [&](std::size_t id) {
    const Spectrum s = eigenvalues(sample_matrix(spec, sample_stream(cfg, id)));
    std::vector<double> x;
    for (std::size_t i : cfg.indices) x.push_back(edge_fluctuation(s, i));
    return x;
  });
  std::vector<std::vector<double>> by_index(cfg.indices.size());
  for (std::size_t id = 0; id < xs.size(); ++id)
    for (std::size_t j = 0; j < cfg.indices.size(); ++j) {
      if (out) out->write({cell(id), cell(cfg.indices[j]), cell(xs[id][j])});
      by_index[j].push_back(xs[id][j]);
    }
  nlohmann::ordered_json s;
  s["N"] = cfg.n;
  s["beta"] = spec.beta();
  s["samples"] = cfg.samples;
  s["seed"] = cfg.seed;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < cfg.indices.size(); ++j) {
    nlohmann::ordered_json e;
    e["i"] = cfg.indices[j];
    e["mean"] = mean(by_index[j]);
    e["variance"] = cfg.samples >= 2 ? variance(by_index[j]) : 0.0;
    e["stderr"] = cfg.samples >= 2 ? standard_error(by_index[j]) : 0.0;
    per.push_back(e);
  }
  s["indices"] = per;
  nlohmann::ordered_json corr = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j + 1 < cfg.indices.size() && cfg.samples >= 2; ++j)
    corr.push_back({{"i", cfg.indices[j]}, {"j", cfg.indices[j + 1]},
                    {"correlation", correlation(by_index[j], by_index[j + 1])}});
  s["correlations"] = corr;
  return {s, "X_i = c (lambda_i - gamma_i)/((log i)^(1/2) N^(-2/3) i^(-1/3)), c = (3/2)^(1/3) pi beta^(1/2), "
             "expected approximately N(0, 1)"};
}

inline std::vector<std::string> record_columns(const std::string& command) {
  if (command == "sample-gaps") return {"sample_id", "k", "tau_k", "tau_star_k", "count"};
  if (command == "couple") return {"sample_id", "t", "k", "lambda_k", "mu_k", "delta_k", "gap_error_k"};
  if (command == "observable") return {"sample_id", "kind", "E", "eta", "t", "statistic", "normalization"};
  if (command == "edge-rate") return {"sample_id", "N", "statistic"};
  if (command == "fluctuations") return {"sample_id", "i", "X_i"};
  return {"s", "F1", "F2", "f1", "f2"};
}

struct RunResult {
  std::string records_path;
  std::string meta_path;
  std::size_t records = 0;
  nlohmann::ordered_json meta;
};

/// Runs the configured command. Records go to the output path, the effective
/// configuration and the summary to "<output>.meta.json". Both files are
/// written under temporary names and renamed at the end, so a failed run
/// leaves nothing behind.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  RunResult res;
  res.records_path = cfg.output_path();
  res.meta_path = res.records_path + ".meta.json";
  const std::string tmp_records = res.records_path + ".partial";
  const std::string tmp_meta = res.meta_path + ".partial";
  auto cleanup = [&] {
    std::error_code ec;
    fs::remove(tmp_records, ec);
    fs::remove(tmp_meta, ec);
  };
  try {
    CommandOutput co;
    {
      std::ofstream os(tmp_records, std::ios::binary);
      if (!os) throw ConfigError("output: cannot open '" + tmp_records + "' for writing");
      if (cfg.command == "tw-build") {
        co = run_tw_build(cfg, &os);
      } else {
        RecordWriter w(os, cfg.format, record_columns(cfg.command));
        if (cfg.command == "sample-gaps") co = run_sample_gaps(cfg, &w);
        else if (cfg.command == "couple") co = run_couple(cfg, &w);
        else if (cfg.command == "observable") co = run_observable(cfg, &w);
        else if (cfg.command == "edge-rate") co = run_edge_rate(cfg, &w);
        else if (cfg.command == "fluctuations") co = run_fluctuations(cfg, &w);
        else throw ConfigError("config: unknown command '" + cfg.command + "'");
        res.records = w.count();
      }
      os.flush();
      if (!os) throw NumericalError("output: write to '" + tmp_records + "' failed");
    }
    res.meta["config"] = nlohmann::ordered_json::parse(cfg.to_json(true).dump());
    res.meta["records"] = {{"path", res.records_path}, {"format", cfg.format}, {"count", res.records},
                           {"columns", record_columns(cfg.command)}};
    res.meta["summary"] = co.summary;
    res.meta["reference"] = co.reference;
    {
      std::ofstream ms(tmp_meta, std::ios::binary);
      if (!ms) throw ConfigError("output: cannot open '" + tmp_meta + "' for writing");
      ms << res.meta.dump(2) << '\n';
      if (!ms) throw NumericalError("output: write to '" + tmp_meta + "' failed");
    }
    fs::rename(tmp_records, res.records_path);
    fs::rename(tmp_meta, res.meta_path);
  } catch (...) {
    cleanup();
    throw;
  }
  return res;
}

}  // namespace rmx

#endif  // RMX_EXPERIMENTS_HPP_
