#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "replica_mud/errors.hpp"
#include "replica_mud/replica_solvers.hpp"
#include "replica_mud/sweep.hpp"

using namespace rmud;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string part; std::getline(in, part, sep);) v.push_back(part);
  return v;
}

std::string body(const std::string& text) { return text.substr(text.find('\n') + 1); }

}  // namespace

TEST_CASE("ranges") {
  CHECK(parse_range("0:0.4:9").values().size() == 9);
  CHECK(parse_range("0:0.4:9").values()[8] == 0.4);
  CHECK(parse_range("0.25").values() == std::vector<double>{0.25});
  CHECK(parse_range(format_range({0.1, 0.7, 4})) == Range{0.1, 0.7, 4});
  CHECK_THROWS_AS(parse_range("0:1:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("a:b:c"), InvalidArgument);
}

TEST_CASE("echo line reconstructs the sweep") {
  const std::vector<std::vector<std::string>> cases{
      {"replica-sweep", "--beta", "0.3", "--sigma2", "0.15", "--delta-h2", "0.1:0.3:3",
       "--mode", "compensated", "--estimator", "mmse", "--cmmse-form", "as-printed"},
      {"mc-sweep", "--users", "4", "--chips", "40", "--delay-spread", "8", "--seed", "99",
       "--detector", "mf", "--code-model", "independent", "--trials", "1000"},
      {"training-sweep", "--coherence-times", "50,100", "--betas", "0.5,2", "--bits"},
      {"pic-sweep", "--delta-b2", "0.3", "--filter", "oracle", "--power-law", "two-level"},
      {"fading-sweep", "--snr-db", "0:20:6", "--power-points", "32", "--threads", "3"}};
  for (const auto& args : cases) {
    const SweepSpec spec = parse_sweep_args(args);
    CHECK(parse_sweep_args(to_args(spec)) == spec);
  }
  const SweepSpec odd = parse_sweep_args({"linear-sweep", "--beta", "0.1", "--sigma-n2", "0.30000000000000004"});
  CHECK(parse_sweep_args(to_args(odd)) == odd);

  const auto run = cli({"linear-sweep", "--delta-h2", "0:0.2:3", "--beta", "0.7"});
  REQUIRE(run.code == 0);
  const std::string echo = lines(run.out).front();
  REQUIRE(echo.rfind("# replica-mud ", 0) == 0);
  auto tokens = split(echo.substr(14), ' ');
  CHECK(parse_sweep_args(tokens) == parse_sweep_args({"linear-sweep", "--delta-h2", "0:0.2:3", "--beta", "0.7"}));
  const auto again = cli(tokens);
  CHECK(again.out == run.out);
}

TEST_CASE("single-point replica sweep equals the library call") {
  const auto run = cli({"replica-sweep", "--delta-h2", "0.1:0.1:1", "--estimator", "mmse", "--mode", "compensated"});
  REQUIRE(run.code == 0);
  const auto ls = lines(run.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[1] == "delta_h2,estimator,mode,m,q,E,F,ber,sinr,free_energy,branches");
  const auto cells = split(ls[2], ',');
  const SystemParams params{0.5, 0.2, 0.1, 0.2};
  const ReceiverSpec rs{Estimator::kMmse, Mode::kCompensated};
  const auto set = solve_all_branches(params, rs);
  const auto& s = set.best();
  CHECK(cells[1] == "mmse");
  CHECK(cells[2] == "compensated");
  CHECK(std::stod(cells[3]) == s.m);
  CHECK(std::stod(cells[4]) == s.q);
  CHECK(std::stod(cells[5]) == s.E);
  CHECK(std::stod(cells[6]) == s.F);
  CHECK(std::stod(cells[7]) == ber(s));
  CHECK(std::stod(cells[8]) == sinr(params, rs, s));
}

TEST_CASE("training sweep grid") {
  const auto run = cli({"training-sweep", "--coherence-times", "50,100,200,400,800", "--betas", "0.5,1,2"});
  REQUIRE(run.code == 0);
  const auto ls = lines(run.out);
  REQUIRE(ls.size() == 17);
  CHECK(ls[1] == "M,beta,snr_db,alpha_star,spectral_efficiency");
  CHECK(split(ls[2], ',')[2] == "5");
}

TEST_CASE("output is deterministic across thread counts") {
  const std::vector<std::string> base{"mc-sweep", "--users", "3", "--chips", "30", "--delay-spread", "6",
                                      "--delta-h2", "0:0.2:2", "--redraws", "3", "--seed", "5"};
  auto with_threads = [&](const char* n) {
    auto args = base;
    args.push_back("--threads");
    args.push_back(n);
    return cli(args);
  };
  const auto a = with_threads("1");
  const auto b = with_threads("4");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(body(a.out) == body(b.out));
  CHECK(a.out == with_threads("1").out);

  const auto c = cli({"pic-sweep", "--threads", "1"});
  const auto d = cli({"pic-sweep", "--threads", "4"});
  CHECK(body(c.out) == body(d.out));
}

TEST_CASE("rows are ordered by parameter value") {
  const auto run = cli({"linear-sweep", "--delta-h2", "0:0.8:9", "--threads", "4"});
  REQUIRE(run.code == 0);
  const auto ls = lines(run.out);
  double prev = -1.0;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const double d = std::stod(split(ls[i], ',')[0]);
    CHECK(d > prev);
    prev = d;
  }
  CHECK(run.err.find("[9/9]") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"replica-sweep", "--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"no-such-command"}).code == 2);
  CHECK(cli({"replica-sweep", "--bogus", "1"}).code == 2);
  CHECK(cli({"replica-sweep", "--estimator", "lmmse"}).code == 2);
  CHECK(cli({"replica-sweep", "--delta-h2", "0:1:0"}).code == 2);
  CHECK(cli({"replica-sweep", "--beta", "-1"}).code == 2);
  CHECK(cli({"mc-sweep", "--trials", "10"}).code == 2);

  const auto bad = cli({"linear-sweep", "--out", "/nonexistent-dir/x.csv"});
  CHECK(bad.code == 1);
  CHECK(bad.out.empty());
}

TEST_CASE("solver failure names the failing point") {
  const auto run = cli({"training-sweep", "--coherence-times", "100,1", "--betas", "1", "--snr-db", "-10"});
  CHECK(run.code == 1);
  CHECK(run.out.empty());
  CHECK(run.err.find("failed at M=1 beta=1 snr_db=-10") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags") {
  const auto path = std::filesystem::temp_directory_path() / "replica_mud_cli_test.cfg";
  {
    std::ofstream f(path);
    f << "beta = 0.8\nsigma-n2 = 0.1\ndelta-h2 = \"0.2\"\nestimator = \"mmse\"\n";
  }
  const SweepSpec spec = parse_sweep_args({"linear-sweep", "--config", path.string(), "--beta", "0.4"});
  CHECK(spec.beta == 0.4);
  CHECK(spec.sigma_n2 == 0.1);
  CHECK(spec.estimator == Estimator::kMmse);
  CHECK(spec.delta_h2 == Range{0.2, 0.2, 1});
  std::filesystem::remove(path);
}

TEST_CASE("file output") {
  const auto path = std::filesystem::temp_directory_path() / "replica_mud_cli_test.csv";
  const auto run = cli({"fading-sweep", "--out", path.string()});
  REQUIRE(run.code == 0);
  CHECK(run.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(lines(ss.str()).size() == 8);
  CHECK(lines(ss.str())[1] == "snr_db,beta,eta_equal,eta_known,eta_mismatched");
  std::filesystem::remove(path);
}
