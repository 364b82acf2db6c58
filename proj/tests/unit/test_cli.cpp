#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bnslab/io.hpp"
#include "bnslab_cli/commands.hpp"
#include "bnslab_cli/config.hpp"
#include "doctest.h"

using namespace bnslab::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bnslab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bnslab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Header row of a CSV written by write_csv (first non-comment line).
std::string header_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  return {};
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto v = parse_config_text("# comment\n[data]\nsigma0_sq = 2.5 ; trailing\n\n[sampler]\ngamma=3\n", "t");
  CHECK(v.at("data.sigma0_sq") == "2.5");
  CHECK(v.at("sampler.gamma") == "3");
  CHECK_THROWS_AS(parse_config_text("gamma = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[a]\nx = 1\nx = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[a]\njust words\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[a\n", "t"), ConfigError);
  try {
    parse_config_text("[a]\nok = 1\nbad line\n", "file.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("file.ini:3") != std::string::npos);
  }
}

TEST_CASE("experiment config resolution") {
  ExperimentConfig cfg("demo", {{"run.seed", "0", ""}, {"a.x", "1.5", ""}, {"a.list", "1,2, 3", ""},
                               {"a.flag", "true", ""}, {"a.empty", "", ""}});
  CHECK(cfg.get_double("a.x") == 1.5);
  CHECK(cfg.get_ints("a.list") == std::vector<int>{1, 2, 3});
  CHECK(cfg.get_bool("a.flag"));
  CHECK_FALSE(cfg.has_value("a.empty"));
  cfg.merge(parse_config_text("[a]\nx = 2\n", "file"), "file");
  CHECK(cfg.get_double("a.x") == 2.0);
  cfg.set("a.x", "3", "flag");
  CHECK(cfg.get_double("a.x") == 3.0);
  CHECK_THROWS_AS(cfg.set("a.nope", "1", "flag"), ConfigError);
  cfg.set("a.x", "3abc", "flag");
  CHECK_THROWS_AS(cfg.get_double("a.x"), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("a.list"), ConfigError);
  CHECK(cfg.entries().size() == 5);
}

TEST_CASE("every subcommand has a seed and unique keys") {
  for (const Command& c : commands()) {
    std::vector<std::string> keys;
    for (const KeyDef& k : c.schema) keys.push_back(k.key);
    std::sort(keys.begin(), keys.end());
    CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
    CHECK(std::binary_search(keys.begin(), keys.end(), "run.seed"));
  }
}

TEST_CASE("command line errors exit with 1") {
  const fs::path dir = scratch("errors");
  CHECK(invoke({}).code == kExitError);
  CHECK(invoke({"no-such-command", "--out", dir.string()}).code == kExitError);
  const Result unknown = invoke({"spectral", "--out", dir.string(), "--field.colour=red"});
  CHECK(unknown.code == kExitError);
  CHECK(unknown.err.find("field.colour") != std::string::npos);
  CHECK(invoke({"spectral"}).code == kExitError);  // --out is required
  std::ofstream(dir / "bad.ini") << "[field]\nbogus = 1\n";
  CHECK(invoke({"spectral", "--config", (dir / "bad.ini").string(), "--out", dir.string()}).code == kExitError);
  CHECK(invoke({"verify-gaussian", "--out", dir.string(), "--sampler.dynamics=langevin"}).code == kExitError);
}

TEST_CASE("verify-gaussian passes, writes the comparison table and is reproducible") {
  const fs::path dir = scratch("verify");
  std::ofstream(dir / "cfg.ini") << "[sampler]\nn_samples = 20000\ngamma_sq = 9\n";
  const std::vector<std::string> args = {"verify-gaussian", "--config", (dir / "cfg.ini").string(),
                                         "--sampler.gamma_sq=4", "--out", (dir / "a").string()};
  const Result r = invoke(args);
  CHECK(r.code == kExitOk);
  const fs::path csv = dir / "a" / "comparison.csv";
  CHECK(header_of(csv) == "quantity,predicted,empirical,mc_stderr,z_score");
  const std::string text = slurp(csv);
  CHECK(text.find("# sampler.gamma_sq=4\n") != std::string::npos);  // flag beats file
  CHECK(text.find("var_0,6.93") != std::string::npos);

  auto again = args;
  again.back() = (dir / "b").string();
  CHECK(invoke(again).code == kExitOk);
  CHECK(slurp(dir / "b" / "comparison.csv") == text);
}

TEST_CASE("verify-gaussian neutral and fixed-point configurations") {
  const fs::path dir = scratch("verify_neutral");
  CHECK(invoke({"verify-gaussian", "--out", (dir / "n").string(), "--sampler.gamma_sq=1",
                "--sampler.delta_skip=0", "--sampler.n_samples=20000"})
            .code == kExitOk);
  CHECK(invoke({"verify-gaussian", "--out", (dir / "m").string(), "--sampler.init=matched",
                "--sampler.dynamics=ode", "--sampler.n_samples=20000", "--data.dim=2"})
            .code == kExitOk);
  // A wrong prediction target must trip the z check.
  const Result bad = invoke({"verify-gaussian", "--out", (dir / "z").string(), "--check.z_max=0.0001",
                             "--sampler.n_samples=2000"});
  CHECK(bad.code == kExitCheckFailed);
  CHECK(bad.out.find("check failed") != std::string::npos);
}

TEST_CASE("corollary-scan boundaries agree with the curves") {
  const fs::path dir = scratch("corollary");
  const Result r = invoke({"corollary-scan", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(header_of(dir / "regions.csv") == "gamma,region,kappa,boundary_index,first_crossing,mismatches");
  CHECK(fs::exists(dir / "corollary_scan.svg"));
  CHECK(slurp(dir / "regions.csv").find("0.5,empty") != std::string::npos);
}

TEST_CASE("spectral and contraction run clean") {
  const fs::path dir = scratch("spectral");
  CHECK(invoke({"spectral", "--out", dir.string(), "--field.n_draws=50", "--field.height=16", "--field.width=16"}).code ==
        kExitOk);
  CHECK(header_of(dir / "bands.csv").rfind("gamma,cutoff,low_bins", 0) == 0);
  const fs::path c = scratch("contraction");
  const Result r = invoke({"contraction", "--out", c.string(), "--contraction.n_pairs=500",
                           "--contraction.n_pilot=100", "--sampler.delta_skip=500"});
  CHECK(r.code == kExitOk);
  CHECK(header_of(c / "contraction.csv") ==
        "gamma,i,mean_sq_error,stderr_sq_error,bound,floor_term,decay_term,lambda");
}

TEST_CASE("toy studies with the mixture oracle") {
  const fs::path dir = scratch("toy");
  const std::vector<std::string> common = {"--model.kind=mixture", "--model.mixture_components=16",
                                           "--data.n_points=500"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), common.begin(), common.end());
    return a;
  };
  const Result toy = invoke(with({"toy2d", "--out", (dir / "toy").string(), "--sampler.n_samples=300"}));
  CHECK((toy.code == kExitOk || toy.code == kExitCheckFailed));
  for (const char* f : {"report.csv", "metrics.csv", "toy2d.svg", "checks.csv", "samples_a.csv", "samples_f.csv"}) {
    CHECK(fs::exists(dir / "toy" / f));
  }
  CHECK(header_of(dir / "toy" / "metrics.csv") == "metric,k,mean,p50,p90,n");

  const Result tr = invoke(with({"trajectory", "--out", (dir / "traj").string(), "--sampler.n_trajectories=8",
                                 "--sampler.gammas=1,3"}));
  CHECK((tr.code == kExitOk || tr.code == kExitCheckFailed));
  CHECK(header_of(dir / "traj" / "trajectory_standard.csv") == "traj_id,i,norm,err,denoise_norm");
  CHECK(fs::exists(dir / "traj" / "trajectory.svg"));

  // gamma = 1 with no skip follows the standard trajectories exactly.
  const Result same = invoke(with({"trajectory", "--out", (dir / "same").string(), "--sampler.n_trajectories=4",
                                   "--sampler.gammas=1", "--sampler.delta_skip=0", "--sampler.taus=",
                                   "--sampler.ode_gamma="}));
  CHECK((same.code == kExitOk || same.code == kExitCheckFailed));
  auto body = [](const std::string& text) { return text.substr(text.find("traj_id")); };
  CHECK(body(slurp(dir / "same" / "trajectory_standard.csv")) == body(slurp(dir / "same" / "trajectory_bns_1.csv")));

  const Result ab = invoke(with({"ablation", "--out", (dir / "abl").string(), "--sampler.n_samples=200",
                                 "--ablation.gamma_sq=1,4", "--ablation.delta_skip=0,700,5000"}));
  CHECK((ab.code == kExitOk || ab.code == kExitCheckFailed));
  const std::string abl = slurp(dir / "abl" / "ablation.csv");
  CHECK(abl.find("combined,4,700,") != std::string::npos);
  CHECK(abl.find("delta_skip must lie") != std::string::npos);  // failed cell recorded, run continued
}
