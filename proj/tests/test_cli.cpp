#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynbc/cli.hpp"

using namespace dynbc;
namespace fs = std::filesystem;

namespace
{

struct TempDir
{
  fs::path path;

  explicit TempDir(const std::string &name)
    : path(fs::temp_directory_path() / ("dynbc_cli_" + name))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }

  std::string operator/(const std::string &file) const { return (path / file).string(); }
  std::size_t entries() const
  {
    return static_cast<std::size_t>(std::distance(fs::directory_iterator(path), {}));
  }
};

struct Result
{
  int status;
  std::string out, err;
};

Result invoke(const std::vector<std::string> &args)
{
  std::ostringstream out, err;
  const int status = cli_main(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string &text)
{
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
  {
    out.push_back(line);
  }
  return out;
}

std::string without_timestamp(const std::string &meta)
{
  std::string kept;
  for (const auto &line : lines(meta))
  {
    if (line.rfind("timestamp=", 0) != 0)
    {
      kept += line + "\n";
    }
  }
  return kept;
}

}  // namespace

TEST_CASE("invalid geometry is rejected before any file is written")
{
  TempDir dir("invalid");
  const Result r = invoke({"simulate", "--r0", "2", "--r1", "1", "--trace-out", dir / "t.csv",
                           "--mesh-out", dir / "m.txt"});
  CHECK(r.status == 2);
  CHECK(r.err.find("r1 must exceed r0") != std::string::npos);
  CHECK(dir.entries() == 0);
}

TEST_CASE("other validation failures")
{
  CHECK(invoke({}).status == 2);
  CHECK(invoke({"launch"}).status == 2);
  CHECK(invoke({"sweep", "--no-such-flag"}).status == 2);
  CHECK(invoke({"sweep", "--omega-min", "0.5"}).status == 2);
  CHECK(invoke({"sweep", "--samples", "3"}).status == 2);
  CHECK(invoke({"simulate", "--alpha", "-1"}).status == 2);
  CHECK(invoke({"check-h", "--field", "spiral"}).status == 2);
  CHECK(invoke({"simulate", "--trace-out", "/nonexistent/dir/t.csv"}).status == 2);
  CHECK(invoke({"simulate", "--config", "/nonexistent/config.json"}).status == 2);
  CHECK(invoke({"--help"}).status == 0);
  CHECK(invoke({"--version"}).out.find(kToolVersion) != std::string::npos);
}

TEST_CASE("computation errors map to status 1")
{
  TempDir dir("compute");
  const Result r = invoke({"spectrum", "--n-r", "2", "--n-theta", "8", "--count", "1000",
                           "--spectrum-out", dir / "s.csv"});
  CHECK(r.status == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("simulate writes a contracting trace with a meta sidecar")
{
  TempDir dir("simulate");
  const Result r = invoke({"simulate", "--n-r", "4", "--n-theta", "16", "-T", "10",
                           "--trace-out", dir / "trace.csv", "--state-out", dir / "state.csv"});
  REQUIRE(r.status == 0);
  CHECK(r.err.find("decay fit") != std::string::npos);
  const auto rows = lines(slurp(dir / "trace.csv"));
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "t,E,D");
  double previous = 1e300, E0 = 0.0;
  for (std::size_t i = 1; i < rows.size(); i++)
  {
    const double E = std::stod(rows[i].substr(rows[i].find(',') + 1));
    if (i == 1)
    {
      E0 = E;
    }
    CHECK(E <= previous + 1e-10 * E0);
    previous = E;
  }
  const std::string meta = slurp(dir / "trace.csv.meta");
  CHECK(meta.find(std::string("tool=") + kToolVersion) != std::string::npos);
  CHECK(meta.find("\"command\":\"simulate\"") != std::string::npos);
  CHECK(meta.find("timestamp=") != std::string::npos);
  CHECK(fs::exists(dir / "state.csv.meta"));
  CHECK(lines(slurp(dir / "state.csv")).size() == 65);
}

TEST_CASE("sweep on the default annulus")
{
  TempDir dir("sweep");
  const Result r = invoke({"sweep", "--omega-min", "1", "--omega-max", "20", "--samples", "40",
                           "--sweep-out", dir / "sweep.csv"});
  REQUIRE(r.status == 0);
  CHECK(r.err.find("slope=") != std::string::npos);
  const auto rows = lines(slurp(dir / "sweep.csv"));
  CHECK(rows.size() == 41);
  CHECK(rows[0] == "omega,norm,scaled,iters");
}

TEST_CASE("identical configs reproduce identical artifacts")
{
  TempDir dir("repro");
  auto run_once = [&](const std::string &tag, const std::string &jobs) {
    const Result r = invoke({"sweep", "--n-r", "4", "--n-theta", "16", "--samples", "10",
                             "--jobs", jobs, "--sweep-out", dir / ("s" + tag + ".csv")});
    REQUIRE(r.status == 0);
    return slurp(dir / ("s" + tag + ".csv"));
  };
  const std::string a = run_once("a", "1");
  const std::string b = run_once("b", "2");
  CHECK(a == b);

  auto simulate_random = [&](const std::string &seed) {
    const Result r = invoke({"simulate", "--n-r", "3", "--n-theta", "12", "-T", "2", "--init",
                             "random", "--seed", seed, "--trace-out", dir / "r.csv"});
    REQUIRE(r.status == 0);
    return std::pair{slurp(dir / "r.csv"), without_timestamp(slurp(dir / "r.csv.meta"))};
  };
  const auto x = simulate_random("11");
  const auto y = simulate_random("11");
  const auto z = simulate_random("12");
  CHECK(x.first == y.first);
  CHECK(x.second == y.second);
  CHECK(x.first != z.first);
}

TEST_CASE("JSON config with flag overrides")
{
  TempDir dir("config");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"command": "sweep", "n_r": 4, "n_theta": 16, "samples": 12, "omega_max": 1.5,
               "sweep_out": ")"
        << dir / "from_file.csv" << "\"}";
  }
  const Result r =
      invoke({"--config", dir / "run.json", "--samples", "9", "--sweep-out", dir / "flag.csv"});
  REQUIRE(r.status == 0);
  CHECK_FALSE(fs::exists(dir / "from_file.csv"));
  CHECK(lines(slurp(dir / "flag.csv")).size() == 10);
  CHECK(slurp(dir / "flag.csv.meta").find("\"samples\":9") != std::string::npos);

  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"samples": "many"})";
  }
  CHECK(invoke({"sweep", "--config", dir / "bad.json"}).status == 2);
  {
    std::ofstream unknown(dir / "unknown.json");
    unknown << R"({"colour": 1})";
  }
  CHECK(invoke({"sweep", "--config", dir / "unknown.json"}).status == 2);
}

TEST_CASE("check-h, spectrum, mesh and matrix dumps")
{
  TempDir dir("misc");
  const Result h = invoke({"check-h", "--field", "radial", "--report-out", dir / "report.txt",
                           "--samples-out", dir / "samples.csv"});
  REQUIRE(h.status == 0);
  CHECK(h.out.find("verdict=pass") != std::string::npos);
  CHECK(slurp(dir / "report.txt") == h.out);
  CHECK(fs::exists(dir / "samples.csv.meta"));

  CHECK(invoke({"check-h", "--field", "rotation"}).out.find("verdict_a=fail") !=
        std::string::npos);
  CHECK(invoke({"check-h", "--field", "levelset", "--ax", "1.3", "--ay", "0.9"})
            .out.find("verdict=pass") != std::string::npos);

  const Result s = invoke({"spectrum", "--n-r", "4", "--n-theta", "16", "--count", "6",
                           "--shift-im", "5", "--spectrum-out", dir / "spec.csv",
                           "--dump-matrices", dir / "matrices"});
  REQUIRE(s.status == 0);
  CHECK(lines(slurp(dir / "spec.csv")).size() == 7);
  CHECK(fs::exists(dir / "matrices/K_tot.txt"));
  CHECK(fs::exists(dir / "matrices/K_tot.txt.meta"));

  const Result m = invoke({"mesh", "--n-r", "2", "--n-theta", "8", "--mesh-out", dir / "m.txt"});
  REQUIRE(m.status == 0);
  CHECK(m.out.find("nodes=16") != std::string::npos);
  CHECK(slurp(dir / "m.txt").rfind("nodes 16 triangles 16", 0) == 0);
}

TEST_CASE("undamped simulation is allowed")
{
  TempDir dir("undamped");
  const Result r = invoke({"simulate", "--alpha", "0", "--n-r", "3", "--n-theta", "12", "-T",
                           "5", "--trace-out", dir / "t.csv"});
  CHECK(r.status == 0);
}
