#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "dephasim_test_cli";

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result cli(const std::string& args, const std::string& env = "") {
  fs::create_directories(kWork);
  const auto out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = "cd '" + kWork.string() + "' && " + env + " '" DEPHASIM_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

struct Fresh {
  Fresh() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Fresh() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("run writes csv and summary") {
  Fresh f;
  const auto r = cli("run fig2_diffusive --out res/");
  CHECK(r.code == 0);
  CHECK(fs::exists(kWork / "res/fig2_diffusive.csv"));
  CHECK(fs::exists(kWork / "res/fig2_diffusive.summary.json"));
  CHECK(slurp(kWork / "res/fig2_diffusive.csv").rfind("t,n_0,n_1,n_2,n_3,n_4,n_5,n_6,W,M,D\n", 0) == 0);
}

TEST_CASE("existing outputs need --force") {
  Fresh f;
  REQUIRE(cli("run fig2_ballistic --out o").code == 0);
  const auto again = cli("run fig2_ballistic --out o");
  CHECK(again.code == 1);
  CHECK(again.err.find("--force") != std::string::npos);
  CHECK(cli("run fig2_ballistic --out o --force").code == 0);
}

TEST_CASE("missing config exits 1 and names the file") {
  Fresh f;
  const auto r = cli("run missing.conf");
  CHECK(r.code == 1);
  CHECK(r.err.find("missing.conf") != std::string::npos);
}

TEST_CASE("bad config field exits 1 and names the field") {
  Fresh f;
  std::ofstream(kWork / "bad.json") << R"({"name": "x", "lattice": {"quasiperiodic": {"sites": 4}},
    "gamma_over_J": -3, "initial_states": [{"label": "a", "site": 0}], "time": {"t_max": 1}})";
  const auto r = cli("run bad.json");
  CHECK(r.code == 1);
  CHECK(r.err.find("gamma_over_J") != std::string::npos);
}

TEST_CASE("config file runs") {
  Fresh f;
  std::ofstream(kWork / "pair.json") << R"({"name": "pair", "lattice": {"explicit":
    {"detunings_mhz": [0, 0], "couplings_mhz": [8.3]}}, "initial_states": [{"label": "a", "site": 0}],
    "time": {"unit": "us", "t_max": 0.1, "n_snapshots": 11}})";
  CHECK(cli("run pair.json --out p").code == 0);
  CHECK(fs::exists(kWork / "p/pair.csv"));
}

TEST_CASE("unknown flags and invalid values fail") {
  Fresh f;
  CHECK(cli("run fig2_ballistic --bogus").code == 1);
  CHECK(cli("run fig2_ballistic --engine quantum").code == 1);
  CHECK(cli("run fig2_ballistic --format pdf").code == 1);
  CHECK(cli("").code == 1);
  CHECK(cli("validate list-scenarios").code == 1);
}

TEST_CASE("help documents every flag") {
  const auto run = cli("run --help");
  CHECK(run.code == 0);
  for (const char* flag : {"--out", "--seed", "--engine", "--ntraj", "--force", "--format", "DEPHASIM_OUT"}) {
    CAPTURE(flag);
    CHECK(run.out.find(flag) != std::string::npos);
  }
  for (const char* sub : {"sweep", "validate", "plot", "list-scenarios"}) {
    CAPTURE(sub);
    CHECK(cli(std::string(sub) + " --help").code == 0);
  }
}

TEST_CASE("identical invocations give identical files") {
  Fresh f;
  const std::string args = " fig3_k07_noise --engine both --ntraj 100 --seed 11";
  REQUIRE(cli("run" + args + " --out a").code == 0);
  REQUIRE(cli("run" + args + " --out b").code == 0);
  for (const char* name : {"fig3_k07_noise_center_lindblad.csv", "fig3_k07_noise_center_traj.csv",
                           "fig3_k07_noise.summary.json"}) {
    CAPTURE(name);
    CHECK(slurp(kWork / "a" / name) == slurp(kWork / "b" / name));
  }
  REQUIRE(cli("run fig3_k07_noise --engine traj --ntraj 100 --seed 12 --out c").code == 0);
  CHECK(slurp(kWork / "a/fig3_k07_noise_center_traj.csv") != slurp(kWork / "c/fig3_k07_noise.csv"));
}

TEST_CASE("output directory from the environment") {
  Fresh f;
  CHECK(cli("run fig2_ballistic", "DEPHASIM_OUT=envdir").code == 0);
  CHECK(fs::exists(kWork / "envdir/fig2_ballistic.csv"));
}

TEST_CASE("plot and svg output") {
  Fresh f;
  REQUIRE(cli("run fig4_mpemba --out m --format both").code == 0);
  CHECK(fs::exists(kWork / "m/fig4_mpemba_rho1_lindblad_D.svg"));
  CHECK(fs::exists(kWork / "m/fig4_mpemba_rho2_lindblad.csv"));
  REQUIRE(cli("plot m/fig4_mpemba_rho3_lindblad.csv --out plots").code == 0);
  const auto svg = slurp(kWork / "plots/fig4_mpemba_rho3_lindblad_M.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(cli("plot nothing.csv").code == 1);
}

TEST_CASE("list-scenarios and validate") {
  const auto list = cli("list-scenarios");
  CHECK(list.code == 0);
  for (const char* name : {"fig2_ballistic", "fig2_diffusive", "fig3_k03", "fig3_k03_noise", "fig3_k07",
                           "fig3_k07_noise", "fig3b_sweep", "fig4_mpemba"}) {
    CHECK(list.out.find(name) != std::string::npos);
  }
  const auto v = cli("validate");
  CHECK(v.code == 0);
  CHECK(v.out.find("FAIL") == std::string::npos);
  CHECK(v.out.find("PASS") != std::string::npos);
}

TEST_CASE("sweep writes a table") {
  Fresh f;
  std::ofstream(kWork / "sw.json") << R"({"name": "sw", "lattice": {"quasiperiodic": {"sites": 7}},
    "gamma_over_J": 30, "initial_states": [{"label": "c", "site": 3}], "time": {"t_max": 5, "n_snapshots": 51},
    "sweep": {"kappas": [0.3, 0.7]}})";
  const auto r = cli("sweep sw.json --out s");
  CHECK(r.code == 0);
  const auto csv = slurp(kWork / "s/sw_sweep.csv");
  CHECK(csv.rfind("kappa,M_coherent,M_dephased,ratio\n0.3,", 0) == 0);
  CHECK(cli("sweep sw.json --out s --kappas 1.5 --force").code == 1);
}
