#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "rmx/config.hpp"
#include "rmx/experiments.hpp"
#include "rmx/io.hpp"
#include "rmx/parallel.hpp"
#include "rmx/stats.hpp"

using namespace rmx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rmx_unit";
  fs::create_directories(dir);
  return dir / name;
}

struct CliResult {
  int code;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const fs::path err = scratch("stderr.txt");
  const std::string cmd = std::string(RMX_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err.string())};
}

}  // namespace

TEST(Io, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(format_number(x)), x);
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  CsvWriter w(os);
  w.header({"x", "y"});
  w.row(1, std::string("a\nb"));
  EXPECT_EQ(os.str(), "x,y\r\n1,\"a\nb\"\r\n");
}

TEST(Io, RecordWriterFormats) {
  std::ostringstream csv, js;
  RecordWriter a(csv, "csv", {"id", "v", "name"}), b(js, "json", {"id", "v", "name"});
  for (RecordWriter* w : {&a, &b}) w->write({cell(std::size_t{3}), Cell{}, cell(std::string("x,y"))});
  EXPECT_EQ(csv.str(), "id,v,name\r\n3,,\"x,y\"\r\n");
  EXPECT_EQ(js.str(), "{\"id\":3,\"v\":null,\"name\":\"x,y\"}\n");
  EXPECT_THROW(a.write({cell(1.0)}), DomainError);
}

TEST(Io, TwTableRoundTrip) {
  TwTable t1, t2;
  t1.beta = 1;
  t2.beta = 2;
  t1.grid = t2.grid = {-1.0, 0.0, 1.0};
  t1.cdf = {0.1, 0.5, 0.9};
  t2.cdf = {0.2, 0.6, 0.95};
  t1.density = {0.3, 0.4, 0.2};
  t2.density = {0.35, 0.45, 0.1};
  t1.tolerance = t2.tolerance = 1e-12;
  std::stringstream ss;
  write_tw_csv(ss, t1, t2);
  const TwTable back = read_tw_csv(ss, 2);
  EXPECT_EQ(back.grid, t2.grid);
  EXPECT_EQ(back.cdf, t2.cdf);
  EXPECT_EQ(back.density, t2.density);
  EXPECT_EQ(back.tolerance, 1e-12);
  EXPECT_NE(tw_build_hash(t1), tw_build_hash(t2));
}

TEST(Stats, Basics) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_DOUBLE_EQ(variance(x), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(median(x), 2.5);
  EXPECT_NEAR(correlation(x, y), 1.0, 1e-15);
  const LinearFit f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.slope_stderr, 0.0, 1e-14);
  const std::vector<double> t{0.1, 0.2, 0.4}, v{10.0, 5.0, 2.5};
  EXPECT_NEAR(log_log_fit(t, v).slope, -1.0, 1e-14);
}

TEST(Parallel, OrderAndErrors) {
  const auto a = parallel_map(1000, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], i * i);
  EXPECT_THROW(parallel_map(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw NumericalError("boom");
                              return i;
                            }),
               NumericalError);
}

TEST(Config, SetParseAndValidate) {
  ExperimentConfig c;
  c.set("t_grid", "0.05, 0.1,0.2");
  c.set("interval", "-1.5,0.5");
  c.set("class", "hermitian");
  EXPECT_EQ(c.t_grid.size(), 3u);
  EXPECT_EQ(c.interval.lo, -1.5);
  EXPECT_EQ(c.beta(), 2);
  EXPECT_THROW(c.set("class", "orthogonal"), ConfigError);
  EXPECT_THROW(c.set("bogus", "1"), ConfigError);
  EXPECT_THROW(c.set("n", "-4"), ConfigError);
  EXPECT_THROW(c.set("workers", "0"), ConfigError);
  c.set("t-grid", "0.2,0.1");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, FileThenEnvironmentThenFlags) {
  const fs::path p = scratch("cfg.txt");
  std::ofstream(p) << "# comment\nn = 50\nseed = 9\nworkers = 3\n\nsamples=7\n";
  ExperimentConfig c;
  apply_config_file(c, p.string());
  EXPECT_EQ(c.n, 50u);
  EXPECT_EQ(c.samples, 7u);
  ::setenv("RMX_SEED", "11", 1);
  apply_environment(c);
  ::unsetenv("RMX_SEED");
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.workers, 3u);
  c.set("seed", "12");
  EXPECT_EQ(c.seed, 12u);
  std::ofstream(p) << "n 50\n";
  EXPECT_THROW(apply_config_file(c, p.string()), ConfigError);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/rmx.cfg"), ConfigError);
}

TEST(Experiments, RecordsDoNotDependOnWorkers) {
  for (const char* command : {"sample-gaps", "fluctuations"}) {
    std::string records[2];
    for (unsigned w : {1u, 4u}) {
      ExperimentConfig c;
      c.set("command", command);
      c.n = 80;
      c.samples = 12;
      c.seed = 3;
      c.workers = w;
      c.indices = {5, 10};
      c.output = scratch(std::string(command) + std::to_string(w) + ".csv").string();
      run_experiment(c);
      records[w == 1 ? 0 : 1] = slurp(c.output);
      EXPECT_TRUE(fs::exists(c.output + ".meta.json"));
    }
    EXPECT_EQ(records[0], records[1]) << command;
  }
}

TEST(Experiments, MetaFileCarriesConfigAndSummary) {
  ExperimentConfig c;
  c.set("command", "couple");
  c.n = 30;
  c.samples = 3;
  c.set("t-grid", "0.1,0.2");
  c.output = scratch("couple.json").string();
  c.format = "json";
  const RunResult r = run_experiment(c);
  EXPECT_EQ(r.records, 3u * 3u * 30u);
  const auto meta = nlohmann::json::parse(slurp(r.meta_path));
  EXPECT_EQ(meta["config"]["n"], 30);
  EXPECT_EQ(meta["summary"]["coupling"], "particle");
  EXPECT_EQ(meta["summary"]["bulk_gap_error"]["median"].size(), 2u);
  std::ifstream in(r.records_path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(nlohmann::json::parse(line)["k"], 1);
}

TEST(Experiments, FailureLeavesNoFiles) {
  ExperimentConfig c;
  c.set("command", "sample-gaps");
  c.n = 10;
  c.samples = 2;
  c.k = 50;  // more gaps than the interval holds
  c.output = scratch("fail.csv").string();
  fs::remove(c.output);
  EXPECT_THROW(run_experiment(c), DomainError);
  EXPECT_FALSE(fs::exists(c.output));
  EXPECT_FALSE(fs::exists(c.output + ".partial"));
  EXPECT_FALSE(fs::exists(c.output + ".meta.json"));
}

TEST(Cli, ExitCodesAndErrorLine) {
  const std::string out = scratch("cli.csv").string();
  const CliResult ok = run_cli("sample-gaps --n 40 --samples 3 --output " + out);
  EXPECT_EQ(ok.code, 0) << ok.err;
  const CliResult bad = run_cli("sample-gaps --class orthogonal --output " + out);
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(std::count(bad.err.begin(), bad.err.end(), '\n'), 1);
  EXPECT_EQ(nlohmann::json::parse(bad.err)["exit_code"], 2);
  EXPECT_EQ(run_cli("no-such-command").code, 2);
  EXPECT_EQ(run_cli("sample-gaps --n").code, 2);
}
