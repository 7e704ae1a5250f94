#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "ipalm/datasets.hpp"
#include "ipalm/ipalm.hpp"

using namespace ipalm;

namespace {

struct CmdResult {
  int exit_code;
  std::string out;
};

CmdResult run_cmd(const std::string& args) {
  std::string cmd = std::string(IPALM_BENCH_BIN) + " " + args + " 2>&1";
  std::array<char, 4096> buf;
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.is_open());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string grep_value(const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  return "";
}

const char* kQpArgs =
    "--problem qp:n=6,m=2,seed=7 --solver apg --rho 0.8 --eta 0.6 "
    "--max-outer 25 --eps 1e-10 --no-timing";

}  // namespace

TEST_CASE("run: equality QP converges with exit code 0") {
  CmdResult r = run_cmd(std::string("run ") + kQpArgs);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("status converged") != std::string::npos);
}

TEST_CASE("run: iteration limit gives exit code 2") {
  CmdResult r = run_cmd(
      "run --problem qp:n=6,m=2,seed=7 --solver apg --rho 0.8 --eta 0.6 "
      "--max-outer 2 --eps 1e-14");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("status iteration-limit") != std::string::npos);
}

TEST_CASE("run: invalid eta/rho pair names the violated constraint") {
  CmdResult r = run_cmd(
      "run --problem qp:n=6,m=2,seed=7 --solver apg --rho 0.8 --eta 0.9");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("eta < rho") != std::string::npos);
}

TEST_CASE("run: every invariant violation class is a config error") {
  // rho outside (1/2,1)
  CHECK(run_cmd("run --problem qp:n=6,m=2 --rho 0.4 --eta 0.2").exit_code == 1);
  // kkt mode with eta above rho^3
  CHECK(run_cmd("run --problem qp:n=6,m=2 --kkt --rho 0.9 --eta 0.8").exit_code == 1);
  // unknown solver
  CHECK(run_cmd("run --problem qp:n=6,m=2 --solver sgd").exit_code == 1);
  // unknown problem kind
  CHECK(run_cmd("run --problem nosuch").exit_code == 1);
  // dataset kind without --data
  CHECK(run_cmd("run --problem lad").exit_code == 1);
  // unreadable input
  CHECK(run_cmd("run --problem lad --data /nonexistent.libsvm").exit_code == 1);
  // L-Katyusha batch size above floor(sqrt(m))
  CHECK(run_cmd("run --problem qp:n=6,m=2 --solver lkatyusha --tau 5 --rho 0.8 "
                "--eta 0.6").exit_code == 1);
}

TEST_CASE("trace schema: fixed header and golden file") {
  std::string out = "/tmp/ipalm_cli_trace.csv";
  CmdResult r = run_cmd(std::string("run ") + kQpArgs + " --out " + out);
  REQUIRE(r.exit_code == 0);
  std::string trace = slurp(out);
  CHECK(trace.rfind("s,beta_s,eps_s,K_s,m_s,M_s,F,infeas,kkt_x_bound,"
                    "kkt_lam_bound,inner_cum,wall_ms\n",
                    0) == 0);
  std::string golden = slurp(std::string(IPALM_TEST_DATA_DIR) + "/golden_qp_trace.csv");
  CHECK(trace == golden);
}

TEST_CASE("reproducibility: same config and seed give byte-identical traces") {
  std::string a = "/tmp/ipalm_cli_a.csv", b = "/tmp/ipalm_cli_b.csv";
  std::string args =
      "run --problem qp:n=6,m=2,seed=7 --solver approx --seed 123 --rho 0.8 "
      "--eta 0.6 --max-outer 40 --eps 1e-8 --no-timing --out ";
  REQUIRE(run_cmd(args + a).exit_code == 0);
  REQUIRE(run_cmd(args + b).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("API and CLI agree bit-for-bit on a round-tripped dataset") {
  // build a small LAD dataset, write it out, solve through both paths
  Rng rng(808);
  LabeledDataset d;
  std::vector<SparseMatrix::Triplet> entries;
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 4; ++c)
      if (rng.uniform() < 0.8) entries.push_back({r, c, rng.normal()});
  d.X = SparseMatrix::from_triplets(8, 4, std::move(entries));
  d.labels = Vector::Zero(8);
  for (Index r = 0; r < 8; ++r) d.labels[r] = rng.normal();

  std::string path = "/tmp/ipalm_cli_lad.libsvm";
  {
    std::ofstream f(path);
    serialize_libsvm(d, f);
  }

  // CLI route
  CmdResult r = run_cmd("run --problem lad --data " + path +
                        " --solver apg --beta0 1 --rho 0.8 --eta 0.6 "
                        "--max-outer 20 --eps 1e-9 --no-timing");
  REQUIRE(r.exit_code == 0);
  std::string cli_F = grep_value(r.out, "final_F");

  // API route: the CLI normalizes rows before building
  LabeledDataset reparsed = load_libsvm(path);
  reparsed.X = normalize_rows(reparsed.X);
  CompositeProblem prob = build_problem(BenchmarkKind::lad(0.01), reparsed);
  InnerSolverConfig cfg;
  cfg.kind = SolverKind::APG;
  OuterParams params;
  params.rho = 0.8;
  params.eta = 0.6;
  params.max_outer = 20;
  params.target_eps = 1e-9;
  SolveResult res = ipalm_solve(prob, cfg, params);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", prob.objective(res.x));
  CHECK(cli_F == buf);
}

TEST_CASE("config file drives the run and flags override it") {
  std::string cfg_path = "/tmp/ipalm_cli_cfg.txt";
  {
    std::ofstream f(cfg_path);
    f << "problem.kind = qp:n=6,m=2,seed=7\n"
      << "solver.kind = apg\n"
      << "outer.rho = 0.8\n"
      << "outer.eta = 0.6\n"
      << "outer.max_outer = 25\n"
      << "outer.target_eps = 1e-10\n"
      << "output.timing = off\n";
  }
  CmdResult r = run_cmd("run --config " + cfg_path);
  CHECK(r.exit_code == 0);

  // flag overrides the file: an invalid eta must now be rejected
  CmdResult r2 = run_cmd("run --config " + cfg_path + " --eta 0.9");
  CHECK(r2.exit_code == 1);

  // unknown keys are config errors
  {
    std::ofstream f(cfg_path, std::ios::app);
    f << "outer.bogus = 1\n";
  }
  CHECK(run_cmd("run --config " + cfg_path).exit_code == 1);
}

TEST_CASE("compare: sweep on the planted basis pursuit reaches the optimum") {
  CmdResult r = run_cmd(
      "compare --problem bp-planted:m=20,n=50,k=5,seed=3 --solver apg "
      "--rho 0.7 --eta 0.55 --max-outer 60 --eps 1e-10 --no-timing");
  REQUIRE(r.exit_code == 0);
  std::string best = grep_value(r.out, "best_beta0");
  REQUIRE(!best.empty());
  // the selected run must reach log relative error <= -6
  std::istringstream table(r.out);
  std::string row;
  bool good = false;
  while (std::getline(table, row)) {
    if (row.rfind(best + ",", 0) == 0) {
      // columns: beta0,status,F,infeas,log_rel_error,inner_total
      std::size_t start = 0, c = 0;
      std::string err;
      for (int k = 0; k < 5; ++k) {
        c = row.find(',', start);
        if (k == 4) err = row.substr(start, c - start);
        start = c + 1;
      }
      good = err == "below" || std::stod(err) <= -6.0;
    }
  }
  CHECK(good);
}

TEST_CASE("compare: identical sweep rows for identical configs") {
  std::string args =
      "compare --problem qp:n=5,m=2,seed=9 --solver apg --rho 0.8 --eta 0.6 "
      "--max-outer 15 --eps 1e-9 --no-timing";
  CmdResult a = run_cmd(args);
  CmdResult b = run_cmd(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
}
