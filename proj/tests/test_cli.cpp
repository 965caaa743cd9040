#include "doctest.h"

#include "mmdlab/cli.hpp"
#include "mmdlab/report_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace mmdlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mmdlab_test_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch(name);
  std::ofstream(p) << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("bound subcommand") {
  const auto r = cli({"bound", "gretton", "--nu", "1", "--n", "100", "--delta", "0.05"});
  CHECK(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(0.7682582).epsilon(1e-7));
  CHECK(r.out.find("0.7682582") != std::string::npos);

  const auto t = cli({"bound", "theorem1", "--l", "1", "--nu", "1", "--n", "100", "--delta", "0.1", "--gc-fg", "0.06",
                      "--gc-f", "0.04"});
  CHECK(t.code == 0);
  CHECK(Json::parse(t.out)["value"].get<double>() == doctest::Approx(5.605236).epsilon(1e-7));
  CHECK(Json::parse(t.out)["expectation_bound"].get<double>() == doctest::Approx(5.671852).epsilon(1e-7));

  const auto k = cli({"bound", "corollary1", "--kernel", R"({"kind":"gaussian","sigma":1})", "--n", "100", "--gc-g",
                      "0.05"});
  CHECK(k.code == 0);
  CHECK(Json::parse(k.out)["value"].get<double>() == doctest::Approx(10.40373).epsilon(1e-6));

  const auto f = cli({"bound", "fukumizu", "--nu", "1", "--n", "100", "--chaos", "0.04", "--chaos-y", "0.04"});
  CHECK(Json::parse(f.out)["value"].get<double>() == doctest::Approx(2 * 1.334324).epsilon(1e-6));
  CHECK(cli({"bound", "empirical-measure", "--nu", "1", "--n", "200", "--delta", "0.05"}).code == 0);
}

TEST_CASE("usage errors exit 2") {
  const auto r = cli({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"bound", "gretton", "--nu", "1", "--n", "100", "--bogus", "1"}).code == 2);
  CHECK(cli({"bound", "gretton", "--n", "100"}).code == 2);
  CHECK(cli({"bound", "theorem1", "--l", "1", "--nu", "1", "--n", "100", "--gc-fg", "0.1"}).code == 2);
  CHECK(cli({"bound", "theorem1", "--l", "1", "--kernel", R"({"kind":"gaussian","sigma":1})", "--n", "10"}).code == 2);
  CHECK(cli({"bound", "gretton", "--nu", "1", "--n", "100", "--delta", "1.5"}).code == 2);
  CHECK(cli({"experiment", "run", "coverage"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("mmd subcommand") {
  const auto x = write_file("x.csv", "0\n1\n");
  const auto y = write_file("y.csv", "2\n3\n");
  const auto r = cli({"mmd", "u", "--x", x.string(), "--y", y.string(), "--kernel", R"({"kind":"gaussian","sigma":1})"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["value"].get<double>() == doctest::Approx(0.3677560).epsilon(1e-7));
  const auto v = cli({"mmd", "v", "--x", x.string(), "--y", y.string(), "--kernel", R"({"kind":"gaussian","sigma":1})"});
  CHECK(Json::parse(v.out)["estimator"] == "v_statistic");

  const auto bad = write_file("bad.csv", "0\nzz\n");
  CHECK(cli({"mmd", "u", "--x", bad.string(), "--y", y.string(), "--kernel", R"({"kind":"gaussian","sigma":1})"})
            .code != 0);
  const auto k = cli({"mmd", "u", "--x", x.string(), "--y", y.string(), "--kernel", R"({"kind":"gaussian"})"});
  CHECK(k.code == 2);
  CHECK(k.err.find("$.sigma") != std::string::npos);
}

TEST_CASE("malformed experiment config names the JSON path") {
  const auto cfg = write_file("bad_cov.json", R"({"kernel": {"kind": "gaussian", "sigma": 1},
    "P": {"kind": "standard_normal", "dim": 1}, "Q": {"kind": "standard_normal", "dim": 1},
    "trials": 0})");
  const auto r = cli({"experiment", "run", "coverage", "--config", cfg.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("$.trials") != std::string::npos);

  const auto broken = write_file("broken.json", "{\"kernel\": ");
  CHECK(cli({"experiment", "run", "coverage", "--config", broken.string()}).code == 2);

  const std::string data = MMDLAB_TEST_DATA_DIR;
  const auto mismatch = cli({"experiment", "run", "decay", "--config", data + "/coverage_small.json"});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("$.experiment") != std::string::npos);
}

TEST_CASE("experiment output files") {
  const std::string cfg = std::string(MMDLAB_TEST_DATA_DIR) + "/coverage_small.json";
  const auto a = scratch("a.json");
  const auto b = scratch("b.json");
  CHECK(cli({"experiment", "run", "coverage", "--config", cfg, "--seed", "7", "--threads", "1", "--out", a.string()})
            .code == 0);
  CHECK(cli({"experiment", "run", "coverage", "--config", cfg, "--seed", "7", "--threads", "2", "--out", b.string()})
            .code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(scratch("a.trials.csv")) == slurp(scratch("b.trials.csv")));
  const Json j = Json::parse(slurp(a));
  CHECK(j["config"]["seed"] == 7);
  CHECK(j["trial_count"] == 40);

  const auto other = cli({"experiment", "run", "coverage", "--config", cfg, "--seed", "8", "--threads", "1"});
  CHECK(other.code == 0);
  CHECK(Json::parse(other.out)["config"]["seed"] == 8);

  const auto unwritable = cli({"experiment", "run", "coverage", "--config", cfg, "--out", "/nonexistent/dir/r.json"});
  CHECK(unwritable.code == 1);
  CHECK(unwritable.err.find("No such file") != std::string::npos);
}

TEST_CASE("MMDLAB_THREADS fallback") {
  ::setenv("MMDLAB_THREADS", "two", 1);
  CHECK(cli({"bound", "gretton", "--nu", "1", "--n", "100"}).code == 2);
  ::setenv("MMDLAB_THREADS", "2", 1);
  CHECK(cli({"bound", "gretton", "--nu", "1", "--n", "100"}).code == 0);
  ::unsetenv("MMDLAB_THREADS");
}

TEST_CASE("complexity and fit subcommands") {
  write_file("s.csv", "3\n4\n");
  const auto cfg = write_file("cx.json", R"({"data": {"csv": "s.csv"}, "replicates": 1})");
  const auto r = cli({"complexity", "rademacher", "--config", cfg.string()});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["mean"].get<double>() == doctest::Approx(2.0));
  CHECK(Json::parse(r.out)["exact"].get<bool>());

  const auto gcfg = write_file("gx.json", R"({"data": {"distribution": {"kind": "standard_normal", "dim": 2}, "n": 20},
    "class": {"family": "shift", "grid": [[0, 0], [1, 1]]}, "replicates": 200})");
  const auto g = cli({"complexity", "gaussian", "--config", gcfg.string(), "--seed", "3"});
  CHECK(g.code == 0);
  CHECK(Json::parse(g.out)["mean"].get<double>() > 0.0);

  const auto ccfg = write_file("ch.json", R"({"data": {"csv": "s.csv"}, "kernel": {"kind": "gaussian", "sigma": 1},
    "replicates": 10})");
  const auto ch = cli({"complexity", "chaos", "--config", ccfg.string()});
  CHECK(ch.code == 0);
  CHECK(Json::parse(ch.out)["mean"].get<double>() == doctest::Approx(std::exp(-1.0)));

  const auto fcfg = write_file("fit.json", R"({"kernel": {"kind": "gaussian", "sigma": 1},
    "X": {"distribution": {"kind": "standard_normal", "dim": 1}, "n": 100},
    "Y": {"distribution": {"kind": "gaussian", "mean": [1.0]}, "n": 100},
    "G": {"family": "shift", "grid": [0, 1, 2]}})");
  const auto fit = cli({"fit", "minmmd", "--config", fcfg.string()});
  CHECK(fit.code == 0);
  const Json fj = Json::parse(fit.out);
  CHECK(fj["per_member_values"].size() == 1);
  CHECK(fj["per_member_values"][0].size() == 3);
  CHECK(fj.contains("excess_risk"));

  const auto mcfg = write_file("minimax.json", R"({"kernel": {"kind": "gaussian", "sigma": 1},
    "X": {"distribution": {"kind": "standard_normal", "dim": 1}, "n": 50},
    "Y": {"distribution": {"kind": "gaussian", "mean": [1.0]}, "n": 50},
    "F": [{"kind": "affine", "A": [[1.0]]}, {"kind": "affine", "A": [[2.0]]}],
    "G": {"family": "shift", "grid": [0, 1, 2]}, "orientation": "min_g_max_f"})");
  const auto mm = cli({"fit", "minimax", "--config", mcfg.string()});
  CHECK(mm.code == 0);
  CHECK(Json::parse(mm.out)["orientation"] == "min_g_max_f");
}

TEST_CASE("kernel-audit subcommand") {
  const auto cfg = write_file("audit.json", R"({"audit": {"dims": [2], "trials": 500}})");
  const auto r = cli({"kernel-audit", "--config", cfg.string()});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.out)["summary"]["pass"].get<bool>());
}

TEST_CASE("report writing") {
  CHECK(trials_csv({}) == "trial,sub_seed,deviation,bound,covered,excess_risk,g_index,f_index\n");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");

  ExperimentReport report;
  report.summary = {{"coverage", 0.123456789}, {"label", "x,y"}, {"flag", true}};
  report.config_echo = {{"seed", 4}};
  report.trials.push_back({0, 99, 0.5, 1.0, true, std::nullopt, 2, std::nullopt});
  const auto p = scratch("report.json");
  write_report(report, p);
  const Json back = Json::parse(slurp(p));
  CHECK(back["summary"]["coverage"].get<double>() == 0.1234568);
  CHECK(back["summary"]["label"] == "x,y");
  CHECK(back["config"]["seed"] == 4);
  CHECK(slurp(scratch("report.trials.csv")) ==
        "trial,sub_seed,deviation,bound,covered,excess_risk,g_index,f_index\n0,99,0.5,1,true,,2,\n");

  // Distinct paths written concurrently keep their own content.
  std::vector<std::jthread> writers;
  for (int w = 0; w < 8; ++w)
    writers.emplace_back([w] {
      const std::string body(100000, static_cast<char>('a' + w));
      for (int rep = 0; rep < 5; ++rep) write_atomic(scratch("w" + std::to_string(w) + ".txt"), body);
    });
  writers.clear();
  for (int w = 0; w < 8; ++w) CHECK(slurp(scratch("w" + std::to_string(w) + ".txt")) == std::string(100000, static_cast<char>('a' + w)));
  for (const auto& e : fs::directory_iterator(scratch("").parent_path()))
    CHECK(e.path().string().find(".tmp.") == std::string::npos);
}
