#ifndef RMX_IO_HPP_
#define RMX_IO_HPP_

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rmx/dbm.hpp"
#include "rmx/errors.hpp"
#include "rmx/spectral.hpp"
#include "rmx/tracy_widom.hpp"

namespace rmx {

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }
inline std::string format_number(std::uint64_t x) { return std::to_string(x); }

/// RFC 4180 field quoting.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Minimal RFC 4180 writer (CRLF line ends).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(names[i]);
    }
    os_ << "\r\n";
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(values), first = false), ...);
    os_ << "\r\n";
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(float v) { return format_number(static_cast<double>(v)); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(unsigned v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return csv_field(v); }
  static std::string cell(const std::string& v) { return csv_field(v); }
  static std::string cell(const char* v) { return csv_field(v); }

  std::ostream& os_;
};

/// One row per eigenvalue: k, lambda, gamma_k, rigidity_r_k.
inline void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  CsvWriter w(os);
  w.header({"k", "lambda", "gamma_k", "rigidity_r_k"});
  const auto r = rigidity_profile(s);
  for (std::size_t k = 0; k < s.size(); ++k)
    w.row(static_cast<std::uint64_t>(k + 1), s[k], classical_location(k + 1, s.size()), r[k]);
}

/// Columns t, k, lambda_k, mu_k, delta_k, gap_error_k; gap_error is empty for k = N.
inline void write_trajectory_csv(std::ostream& os, const CoupledTrajectory& traj, bool with_header = true) {
  CsvWriter w(os);
  if (with_header) w.header({"t", "k", "lambda_k", "mu_k", "delta_k", "gap_error_k"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const auto f = coupling_fields(traj, t);
    const std::size_t n = traj.n();
    for (std::size_t k = 0; k < n; ++k) {
      const std::string gap = k + 1 < n ? format_number(f.gap_error[k]) : std::string();
      w.row(t, static_cast<std::uint64_t>(k + 1), traj.lambda[i][k], traj.mu[i][k], f.delta[k], gap);
    }
  }
}

/// FNV-1a over the bytes of the table values; identifies a build.
inline std::string tw_build_hash(const TwTable& t) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](double v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    mix(t.grid[i]);
    mix(t.cdf[i]);
    mix(t.density[i]);
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// CSV (s, F1, F2, f1, f2) preceded by one comment line with tolerance and
/// build hash. Both tables must share the grid.
inline void write_tw_csv(std::ostream& os, const TwTable& t1, const TwTable& t2) {
  detail::require(t1.beta == 1 && t2.beta == 2 && t1.grid == t2.grid, "write_tw_csv: need matching beta 1 and 2 tables");
  os << "# tolerance=" << format_number(t1.tolerance) << " hash=" << tw_build_hash(t1) << tw_build_hash(t2)
     << "\r\n";
  CsvWriter w(os);
  w.header({"s", "F1", "F2", "f1", "f2"});
  for (std::size_t i = 0; i < t1.grid.size(); ++i) w.row(t1.grid[i], t1.cdf[i], t2.cdf[i], t1.density[i], t2.density[i]);
}

/// Reads a table written by write_tw_csv for the requested beta.
inline TwTable read_tw_csv(std::istream& is, int beta) {
  detail::require(beta == 1 || beta == 2, "read_tw_csv: beta must be 1 or 2");
  TwTable t;
  t.beta = beta;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("tolerance=");
      if (p != std::string::npos) t.tolerance = std::stod(line.substr(p + 10));
      continue;
    }
    if (!header_seen) {
      if (line != "s,F1,F2,f1,f2") throw ConfigError("read_tw_csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 5) throw ConfigError("read_tw_csv: malformed row '" + line + "'");
    t.grid.push_back(v[0]);
    t.cdf.push_back(beta == 1 ? v[1] : v[2]);
    t.density.push_back(beta == 1 ? v[3] : v[4]);
  }
  if (t.grid.size() < 2) throw ConfigError("read_tw_csv: table has fewer than two rows");
  return t;
}

}  // namespace rmx

#endif  // RMX_IO_HPP_
