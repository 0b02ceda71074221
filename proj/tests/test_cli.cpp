#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <doctest.h>

#include "polybubble/cli_commands.hpp"
#include "polybubble/report.hpp"
#include "polybubble/run_config.hpp"

using namespace polybubble;
namespace fs = std::filesystem;

namespace {

std::string base61() { return "N=6\nm=1\ncase=1\n"; }
std::string base102() { return "N=10\nm=2\ncase=2\na=0.3\n"; }

const ReportRow* find_row(const Report& r, const std::string& name) {
  for (const auto& row : r.rows)
    if (row.name == name) return &row;
  return nullptr;
}

// every check appears exactly once per run
void require_unique_names(const Report& r) {
  std::set<std::string> names;
  for (const auto& row : r.rows) names.insert(row.name);
  REQUIRE(names.size() == r.rows.size());
}

std::string config_message(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(bool(f));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct CliRun {
  int code = -1;
  std::string output;
};

// run the real driver binary; stdout+stderr captured to a scratch file
CliRun run_cli(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "last_run.log";
  const std::string cmd =
      std::string(CLI_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  CliRun out;
  out.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  out.output = slurp(log);
  return out;
}

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("pb_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p;
  }
};

}  // namespace

TEST_CASE("config parsing fills defaults and roundtrips canonically") {
  const RunConfig c = parse_run_config(base61());
  CHECK(c.N == 6);
  CHECK(c.m == 1);
  CHECK(c.case_id == 1);
  CHECK(c.iota == 0.5);
  CHECK(c.seed == 20260816u);
  CHECK(c.lattice_k == 4096);
  CHECK(c.h_bar == 0.05);
  CHECK(c.ansatz_k == 2);
  CHECK(c.y20 == Vec(3, 0.0));
  CHECK(c.sweep_k.empty());
  CHECK(c.out_dir == "reports");

  // comments, blank lines and spacing are cosmetic
  const RunConfig c2 = parse_run_config(
      "# a comment\n\n  N = 6  # trailing\n\tm=1\ncase = 1\n");
  CHECK(c2.canonical() == c.canonical());

  // the canonical text is itself a valid config describing the same run
  const RunConfig c3 = parse_run_config(c.canonical());
  CHECK(c3.canonical() == c.canonical());

  const RunConfig full = parse_run_config(
      base61() +
      "iota=0.25\nM1=2\nL0=0.01\nL1=10\ntheta=0.2\ndelta=0.05\nr0=1.5\n"
      "y20=0.1,-0.2,0.3\npreset=peak\nwidth=0.3\namplitude=1.5\n"
      "sweep_k=4,8\nsweep_t=0.5,1\nlattice_k=512\nh_bar=0.1\nr_bar=2\n"
      "ansatz_k=3\nlambda=40\nmass_samples=50000\nwindow_rho=0.3\n"
      "seed=7\njobs=2\nout_dir=out\n");
  CHECK(full.y20 == Vec{0.1, -0.2, 0.3});
  CHECK(full.sweep_k == std::vector<int>{4, 8});
  CHECK(full.sweep_t == std::vector<double>{0.5, 1.0});
  CHECK(full.seed == 7u);
  const RunConfig full2 = parse_run_config(full.canonical());
  CHECK(full2.canonical() == full.canonical());
}

TEST_CASE("config rejections name the offending key") {
  CHECK(config_message(base61() + "sweep_q=3\n").find("sweep_q") !=
        std::string::npos);
  CHECK(config_message(base61() + "N=7\n").find("duplicate") !=
        std::string::npos);
  CHECK(config_message("N=6\nm=1\n").find("'case'") != std::string::npos);
  CHECK(config_message("N=abc\nm=1\ncase=1\n").find("'N'") !=
        std::string::npos);
  CHECK(config_message(base61() + "L0=0.5x\n").find("'L0'") !=
        std::string::npos);
  CHECK(config_message(base61() + "y20=1,2\n").find("y20") !=
        std::string::npos);
  CHECK(config_message("N=6\nm=1\ncase=4\n").find("'case'") !=
        std::string::npos);
  CHECK(config_message(base61() + "h_bar=1.5\n").find("h_bar") !=
        std::string::npos);
  CHECK(config_message(base61() + "L0=2\nL1=1\n").find("L0") !=
        std::string::npos);
  CHECK(config_message(base61() + "sweep_k=4,1\n").find("sweep_k") !=
        std::string::npos);
  CHECK(config_message(base61() + "no equals here\n").find("key=value") !=
        std::string::npos);
  CHECK(config_message("N=6\nm=3\ncase=1\n").find("N > 2m") !=
        std::string::npos);
  CHECK(config_message(base61() + "iota=3\n").find("iota") !=
        std::string::npos);
  CHECK_THROWS_AS(load_run_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("provenance hash tracks every effective value") {
  const RunConfig a = parse_run_config(base61());
  RunConfig b = a;
  b.seed = 1;
  RunConfig c = a;
  c.h_bar = 0.1;
  const uint64_t ha = fnv1a64(a.canonical());
  CHECK(ha != fnv1a64(b.canonical()));
  CHECK(ha != fnv1a64(c.canonical()));
  CHECK(hex64(ha).size() == 16);
}

TEST_CASE("constants command verifies every pairing on both spaces") {
  const RunConfig c61 = parse_run_config(base61());
  const Report r = cmd_constants(c61);
  require_unique_names(r);
  CHECK(r.status == 0);
  CHECK(r.rows.size() >= 12);
  CHECK(r.command == "constants");

  const ReportRow* p = find_row(r, "normalization product");
  REQUIRE(p != nullptr);
  CHECK(p->value == doctest::Approx(24.0).epsilon(1e-12));
  const ReportRow* ws = find_row(r, "pohozaev ratio");
  REQUIRE(ws != nullptr);
  CHECK(std::fabs(ws->value - 1.0) <= 1e-6);
  CHECK(find_row(r, "bubble mass, closed reference") != nullptr);

  // identical run, identical bytes
  CHECK(report_csv(cmd_constants(c61)) == report_csv(r));
  CHECK(report_json(cmd_constants(c61)) == report_json(r));

  const Report r2 = cmd_constants(parse_run_config(base102()));
  require_unique_names(r2);
  CHECK(r2.status == 0);
  const ReportRow* p2 = find_row(r2, "normalization product");
  REQUIRE(p2 != nullptr);
  CHECK(p2->value == doctest::Approx(5760.0).epsilon(1e-12));
  // the 96 pi^3 reference row is specific to the six-dimensional space
  CHECK(find_row(r2, "bubble mass, closed reference") == nullptr);
}

TEST_CASE("lattice command certifies the deviation rates") {
  for (const std::string& text : {base61(), base102()}) {
    const Report r = cmd_lattice(parse_run_config(text));
    require_unique_names(r);
    CHECK(r.status == 0);
    const ReportRow* cross = find_row(r, "cross deviation rate");
    REQUIRE(cross != nullptr);
    CHECK(std::fabs(cross->value + 1.0) <= 0.2);
    const ReportRow* same = find_row(r, "same deviation rate");
    REQUIRE(same != nullptr);
    CHECK(std::fabs(same->value + 2.0) <= 0.25);
    const ReportRow* top = find_row(r, "same-circle ratio");
    REQUIRE(top != nullptr);
    CHECK(std::fabs(top->value - 1.0) <= 0.01);
  }
}

TEST_CASE("lattice command flags a too-coarse run honestly") {
  const Report r =
      cmd_lattice(parse_run_config(base61() + "lattice_k=16\nh_bar=0.5\n"));
  require_unique_names(r);
  CHECK(r.status == 1);
  CHECK(!r.all_pass());
  const ReportRow* top = find_row(r, "same-circle ratio");
  REQUIRE(top != nullptr);
  CHECK(!top->pass);
}

TEST_CASE("norms command bounds the remainder and the shell mass") {
  const Report r61 =
      cmd_norms(parse_run_config(base61() + "ansatz_k=2\nlambda=128\n"));
  require_unique_names(r61);
  CHECK(r61.status == 0);
  const ReportRow* band = find_row(r61, "nonlinear remainder band");
  REQUIRE(band != nullptr);
  CHECK(band->value >= 1.0);
  CHECK(band->value < 4.0);
  const ReportRow* quad = find_row(r61, "shell mass quadrupling");
  REQUIRE(quad != nullptr);
  CHECK(std::fabs(quad->value - 4.0) <= 0.08);

  const Report r102 = cmd_norms(
      parse_run_config(base102() + "ansatz_k=3\nlambda=13.5\n"));
  require_unique_names(r102);
  CHECK(r102.status == 0);

  // the remainder order switches once m* - 1 drops below 2
  const ReportRow* ord = find_row(r102, "nonlinear remainder order");
  REQUIRE(ord != nullptr);
  CHECK(ord->value == doctest::Approx(2.0));
  CHECK(report_csv(cmd_norms(parse_run_config(
            base102() + "ansatz_k=3\nlambda=13.5\n"))) == report_csv(r102));
}

TEST_CASE("residual scan emits the slope, the cells and the artifact") {
  const std::string text = base61() +
                           "preset=gaussian_well\nwidth=0.5\namplitude=2\n"
                           "sweep_k=2,3\nsweep_t=0.5,1,2\n";
  const Report r = cmd_residual_scan(parse_run_config(text));
  require_unique_names(r);
  CHECK(r.status == 0);
  const ReportRow* cells = find_row(r, "cells evaluated");
  REQUIRE(cells != nullptr);
  CHECK(cells->value == 6.0);
  const ReportRow* slope = find_row(r, "residual decay slope");
  REQUIRE(slope != nullptr);
  CHECK(slope->one_sided);
  CHECK(slope->value <= -(2.0 + 1.0 - 0.375) / 2.0 + 0.15);
  CHECK(slope->value == doctest::Approx(-1.80).epsilon(0.05));
  CHECK(r.artifact_name == "residual_scan_cells.csv");
  CHECK(count_lines(r.artifact_csv) == 8);  // header + 6 cells + slope line

  CHECK_THROWS_AS(
      cmd_residual_scan(parse_run_config(base61() + "sweep_t=1\n")),
      ConfigError);
  CHECK_THROWS_AS(
      cmd_residual_scan(parse_run_config(base61() + "sweep_k=4\n")),
      ConfigError);
}

TEST_CASE("solve command tracks wells, saddles and the balance point") {
  const std::string well = base61() +
                           "L0=0.0001\npreset=gaussian_well\nwidth=0.5\n"
                           "amplitude=2\nsweep_k=6,10\n";
  const Report r = cmd_solve(parse_run_config(well));
  require_unique_names(r);
  CHECK(r.status == 0);
  for (int k : {6, 10}) {
    const ReportRow* drift =
        find_row(r, "radial drift, k=" + std::to_string(k));
    REQUIRE(drift != nullptr);
    CHECK(drift->value <= 1e-3);
    const ReportRow* axial =
        find_row(r, "axial drift, k=" + std::to_string(k));
    REQUIRE(axial != nullptr);
    CHECK(axial->value <= 1e-3);
  }
  const ReportRow* deg = find_row(r, "gradient degree");
  REQUIRE(deg != nullptr);
  CHECK(deg->value == 1.0);
  CHECK(r.artifact_name == "solve_trajectory.csv");
  CHECK(count_lines(r.artifact_csv) == 3);  // header + one row per k

  const Report rs = cmd_solve(parse_run_config(
      base61() + "L0=0.0001\npreset=saddle2d\nwidth=0.5\namplitude=2\n"
                 "sweep_k=6,10\n"));
  const ReportRow* sdeg = find_row(rs, "gradient degree");
  REQUIRE(sdeg != nullptr);
  CHECK(sdeg->value == -1.0);
  CHECK(rs.status == 0);

  // flat potential: the solved balance point meets its closed form
  const Report rp = cmd_solve(parse_run_config(
      base61() + "preset=plateau\namplitude=0.05\nsweep_k=6,12\n"));
  require_unique_names(rp);
  CHECK(rp.status == 0);
  for (int k : {6, 12}) {
    const ReportRow* bal =
        find_row(rp, "balance point, k=" + std::to_string(k));
    REQUIRE(bal != nullptr);
    CHECK(bal->pass);
    CHECK(std::fabs(bal->value - bal->predicted) <=
          1e-6 * std::fabs(bal->predicted));
  }

  // window that excludes the balance point: nonconvergence, not a throw
  const Report rn = cmd_solve(parse_run_config(
      base61() + "L0=5\npreset=gaussian_well\nwidth=0.5\namplitude=2\n"
                 "sweep_k=6\n"));
  CHECK(rn.status == 3);
}

TEST_CASE("pohozaev command wraps the identity battery") {
  const Report r = cmd_pohozaev(parse_run_config(base61()));
  require_unique_names(r);
  CHECK(r.status == 0);
  CHECK(r.rows.size() == 7);
  CHECK_THROWS_AS(cmd_pohozaev(parse_run_config(base61() + "y20=0,0.2,0\n")),
                  ConfigError);
}

TEST_CASE("driver exit codes follow the contract") {
  Sandbox sb;
  const fs::path good = sb.write("good.cfg", base61());
  const fs::path out1 = sb.dir / "run1";
  const fs::path out2 = sb.dir / "run2";

  const CliRun ok = run_cli(
      sb.dir, "constants --config " + good.string() + " --out " +
                  out1.string());
  CHECK(ok.code == 0);
  CHECK(ok.output.find("status 0") != std::string::npos);
  const std::string csv1 = slurp(out1 / "constants_report.csv");
  const std::string json1 = slurp(out1 / "constants_report.json");
  CHECK(csv1.find("name,inputs,value,predicted,tolerance,bound,pass\n") !=
        std::string::npos);
  CHECK(count_lines(csv1) >= 17);

  // identical run into a fresh directory: byte-identical artifacts
  const CliRun ok2 = run_cli(
      sb.dir, "constants --config " + good.string() + " --out " +
                  out2.string());
  CHECK(ok2.code == 0);
  CHECK(slurp(out2 / "constants_report.csv") == csv1);
  CHECK(slurp(out2 / "constants_report.json") == json1);

  // a different seed shows up in the provenance hash
  const CliRun seeded = run_cli(
      sb.dir, "constants --config " + good.string() + " --out " +
                  out2.string() + " --seed 1");
  CHECK(seeded.code == 0);
  CHECK(slurp(out2 / "constants_report.csv") != csv1);

  // config errors: exit 2 and the offending key in the message
  const fs::path typo = sb.write("typo.cfg", base61() + "sweep_q=3\n");
  const CliRun bad = run_cli(
      sb.dir, "constants --config " + typo.string() + " --out " +
                  out1.string());
  CHECK(bad.code == 2);
  CHECK(bad.output.find("sweep_q") != std::string::npos);

  const fs::path missing = sb.write("missing.cfg", "N=6\nm=1\n");
  const CliRun miss = run_cli(
      sb.dir, "constants --config " + missing.string());
  CHECK(miss.code == 2);
  CHECK(miss.output.find("'case'") != std::string::npos);

  const CliRun nosub = run_cli(sb.dir, "frobnicate --config " + good.string());
  CHECK(nosub.code == 2);
  const CliRun noconf = run_cli(sb.dir, "constants");
  CHECK(noconf.code == 2);
  const CliRun nofile =
      run_cli(sb.dir, "constants --config " + (sb.dir / "absent.cfg").string());
  CHECK(nofile.code == 2);

  // a failing check drives exit 1
  const fs::path coarse =
      sb.write("coarse.cfg", base61() + "lattice_k=16\nh_bar=0.5\n");
  const CliRun fail = run_cli(
      sb.dir, "lattice --config " + coarse.string() + " --out " +
                  out1.string());
  CHECK(fail.code == 1);
  CHECK(fail.output.find("FAIL") != std::string::npos);

  // solver nonconvergence drives exit 3
  const fs::path stuck = sb.write(
      "stuck.cfg", base61() + "L0=5\npreset=gaussian_well\nwidth=0.5\n"
                              "amplitude=2\nsweep_k=6\n");
  const CliRun non = run_cli(
      sb.dir, "solve --config " + stuck.string() + " --out " + out1.string());
  CHECK(non.code == 3);

  // regime violation inside the run maps to a config error
  const fs::path narrow = sb.write(
      "narrow.cfg", base61() + "preset=gaussian_well\nwidth=0.5\n"
                               "amplitude=2\nsweep_k=2\n");
  const CliRun reg = run_cli(
      sb.dir, "solve --config " + narrow.string() + " --out " + out1.string());
  CHECK(reg.code == 2);

  // the worker count must not change the bytes
  const fs::path scan = sb.write(
      "scan.cfg", base61() + "preset=gaussian_well\nwidth=0.5\namplitude=2\n"
                             "sweep_k=2,3\nsweep_t=0.5,1,2\n");
  const CliRun j1 = run_cli(
      sb.dir, "residual-scan --config " + scan.string() + " --out " +
                  out1.string() + " --jobs 1");
  const std::string cells1 = slurp(out1 / "residual_scan_cells.csv");
  const CliRun j4 = run_cli(
      sb.dir, "residual-scan --config " + scan.string() + " --out " +
                  out2.string() + " --jobs 4");
  CHECK(j1.code == 0);
  CHECK(j4.code == 0);
  CHECK(slurp(out2 / "residual_scan_cells.csv") == cells1);
  CHECK(slurp(out2 / "residual_scan_report.csv") ==
        slurp(out1 / "residual_scan_report.csv"));
}
