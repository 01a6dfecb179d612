#include "sthp/study.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sthp;

namespace {

StudyConfig parse(const std::string &text)
{
  std::istringstream in(text);
  return parse_config(in);
}

int error_line(const std::string &text)
{
  try {
    parse(text);
  } catch (const ConfigError &e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string &text)
{
  try {
    parse(text);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

std::string slurp(const std::filesystem::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char *hp_text = "# hp study\n"
                      "[study]\n"
                      "name = u1hp\n"
                      "problem = u1\n"
                      "first_level = 3\n"
                      "last_level = 4\n"
                      "\n"
                      "[time]\n"
                      "scheme = hp   ; geometric\n"
                      "sigma = 0.31\n"
                      "mu_hp = 2\n"
                      "m1_log = 1.4\n"
                      "m2 = 1\n";

} // namespace

TEST_CASE("config parsing")
{
  const auto c = parse(hp_text);
  CHECK(c.name == "u1hp");
  CHECK(c.time == TimeScheme::hp);
  CHECK(c.sigma == 0.31);
  CHECK(c.mu_hp == 2.0);
  CHECK(c.m1_log == 1.4);
  CHECK(c.first_level == 3);
  CHECK(c.strategy.kind == SolverKind::bartels_stewart);

  const auto d = parse("[study]\nproblem = u2\n[space]\nscheme = graded\n[solver]\nstrategy = reference-dense\n");
  CHECK(d.space == SpaceScheme::graded);
  CHECK(d.strategy.kind == SolverKind::reference_dense);
}

TEST_CASE("config diagnostics name the line and field")
{
  const std::string bad_sigma = "[study]\nproblem = u1\n[time]\nscheme = hp\nsigma = 1.2\n";
  CHECK(error_line(bad_sigma) == 5);
  CHECK(error_message(bad_sigma).find("time.sigma") != std::string::npos);
  CHECK(error_message(bad_sigma).find("sigma must lie in (0,1)") != std::string::npos);

  CHECK(error_line("[study]\nproblem = u1\nfoo = 3\n") == 3);
  CHECK(error_message("[study]\nproblem = u1\nfoo = 3\n").find("unknown key") != std::string::npos);
  CHECK(error_line("[study]\nfirst_level = two\n") == 2);
  CHECK(error_line("[study]\nfirst_level = 2x\n") == 2);
  CHECK(error_line("[nope]\n") == 1);
  CHECK(error_line("[study\n") == 1);
  CHECK(error_line("problem = u1\n") == 1);
  CHECK(error_line("[study]\nproblem u1\n") == 2);
  CHECK(error_line("[study]\nproblem =\n") == 2);
  CHECK(error_line("[study]\nproblem = u1\nproblem = u2\n") == 3);
  CHECK(error_line("[study]\nproblem = u9\n") == 2);
  CHECK(error_line("[study]\nproblem = u1\n[space]\nscheme = graded\n") == 4);
  CHECK(error_line("[time]\nscheme = cubic\n") == 2);
  CHECK(error_line("[solver]\nstrategy = cg\n") == 2);
  CHECK(error_line("[study]\nfirst_level = 4\nlast_level = 2\n") == 3);
  CHECK(error_line("[time]\nmu_hp = 0.5\n") == 2);

  StudyConfig c;
  c.sigma = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("normalized form round-trips")
{
  const auto c = parse(hp_text);
  const auto text = normalized(c);
  const auto c2 = parse(text);
  CHECK(c2 == c);
  CHECK(normalized(c2) == text);

  StudyConfig d;
  d.problem = "u3";
  d.space = SpaceScheme::graded;
  d.beta = 0.6;
  d.R = 0.1 + 0.2; // not representable in short decimal form
  d.quadrature.doubling_tolerance = 1e-3;
  d.strategy.kind = SolverKind::reference_dense;
  CHECK(parse(normalized(d)) == d);
  CHECK(normalized(d).find("R = 0.30000000000000004") != std::string::npos);
}

TEST_CASE("tables and plot data")
{
  const std::string header = "          MN        M          N       h_x     k_max       error    eoc\n";
  CHECK(emit_table({}, 1) == header);
  StudyRecord r{12, 4, 3, 0.25, 0.5, 7.330e-02, 1.0};
  CHECK(emit_table({r}, 1)
        == header + "          12        4          3   0.25000   0.50000   7.330e-02      -\n");
  StudyRecord s{56, 8, 7, 0.125, 0.25, 3.423e-02, 2.0};
  const auto t = emit_table({r, s}, 1);
  CHECK(t.find("   3.423e-02   0.99\n") != std::string::npos);
  CHECK(plot_data({r, s}) == "12 0.073300000000000004\n56 0.034229999999999997\n");
  CHECK(plot_data({}).empty());
}

TEST_CASE("level couplings")
{
  auto c = parse("[study]\nproblem = u1\n");
  auto L = build_level(c, 1);
  CHECK(L.sx.size() == 3);
  CHECK(L.basis.size() == 4);
  CHECK(L.basis.mesh().k_max() == 0.5);
  CHECK(L.h_x == 0.25);
  L = build_level(c, 6);
  CHECK(L.sx.size() * L.basis.size() == 16256);

  c = parse(hp_text);
  // N = 15: m1 = floor(1.4 ln 15) = 3, degrees (1,4,6,6)
  L = build_level(c, 3);
  CHECK(L.sx.size() == 15);
  CHECK(L.basis.mesh().degrees() == std::vector<int>{1, 4, 6, 6});
  CHECK(L.basis.size() == 17);

  c = parse("[study]\nproblem = u2\n[time]\nscheme = pfem\nelements = 4\np_log = 0.5\n[space]\nscheme = graded\n");
  const auto mesh = level_mesh(c, 2);
  const int N = mesh.num_free();
  const auto tm = level_temporal_mesh(c, N, 0.25);
  CHECK(tm.num_elements() == 4);
  CHECK(tm.degree(0) == static_cast<int>(std::floor(std::log(static_cast<double>(N)) / 2)));

  c = parse("[study]\nproblem = u3\n[time]\nscheme = hp\nsigma = 0.17\nmu_hp = 1\nm1_log = 2.2\n");
  const auto hp = level_temporal_mesh(c, 500, 0.125);
  CHECK(hp.num_elements() == static_cast<int>(std::floor(2.2 * std::log(500.0))) + 1);
  CHECK(hp.right(0) == doctest::Approx(std::pow(0.17, hp.num_elements() - 2)));

  // 2D uniform time: k = 2 h
  c = parse("[study]\nproblem = u2\n");
  CHECK(level_temporal_mesh(c, 100, 0.125).num_elements() == 8);
  CHECK(level_mesh(c, 2).hx() == doctest::Approx(0.25));
}

TEST_CASE("memory guard skips a level and keeps the others")
{
  auto c = parse("[study]\nproblem = u1\nfirst_level = 1\nlast_level = 3\n[solver]\nmemory_guard = 100\n");
  std::ostringstream log;
  RunOptions opt;
  opt.log = &log;
  const auto r = run_study(c, opt);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].MN == 12);
  CHECK(r.records[1].MN == 56);
  CHECK(r.outcomes[2].status == LevelOutcome::Status::skipped);
  CHECK(r.outcomes[2].message.find("memory guard") != std::string::npos);
  CHECK(r.exit_code() == 2);
  CHECK(log.str().find("level 3: skipped") != std::string::npos);

  c.strategy.memory_guard = 20000000;
  c.last_level = 2;
  CHECK(run_study(c).exit_code() == 0);
}

TEST_CASE("failing level is isolated")
{
  // m1 = floor(0.8 ln N): 1 at N = 7 (rejected by the mesh builder), 3 at N = 63
  auto c = parse("[study]\nproblem = u1\nfirst_level = 2\nlast_level = 5\n[time]\nscheme = hp\nm1_log = 0.8\n");
  const auto r = run_study(c);
  CHECK(r.outcomes[0].status == LevelOutcome::Status::failed);
  CHECK(r.outcomes[0].message.find("m1") != std::string::npos);
  CHECK(r.outcomes.back().status == LevelOutcome::Status::ok);
  CHECK(r.exit_code() == 2);
}

TEST_CASE("CLI output is deterministic")
{
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sthp_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "c.ini");
    cfg << hp_text;
  }
  const std::string exe = STHP_STUDY_EXE;
  const auto run = [&](const std::string &out, const std::string &extra) {
    const std::string cmd = "\"" + exe + "\" \"" + (dir / "c.ini").string() + "\" --out \"" + (dir / out).string()
                            + "\" " + extra + " > \"" + (dir / (out + ".stdout")).string() + "\" 2> \""
                            + (dir / (out + ".stderr")).string() + "\"";
    return std::system(cmd.c_str());
  };
  CHECK(run("a", "--verify --seed 7") == 0);
  CHECK(run("b", "--verify --seed 7") == 0);
  for (const char *f : {"u1hp.csv", "u1hp.txt", "u1hp.dat"}) {
    const auto a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    CHECK(!a.empty());
    CHECK(a == b);
  }
  CHECK(slurp(dir / "a.stdout") == slurp(dir / "b.stdout"));
  CHECK(slurp(dir / "a.stderr").find("FAIL") == std::string::npos);

  // override flags and exit codes
  CHECK(run("c", "--levels 3-3 --strategy reference-dense") == 0);
  CHECK(slurp(dir / "c" / "u1hp.dat").find('\n') == slurp(dir / "c" / "u1hp.dat").size() - 1);
  CHECK(run("d", "--levels x") != 0);
  CHECK(slurp(dir / "d.stderr").find("--levels") != std::string::npos);
  {
    std::ofstream cfg(dir / "bad.ini");
    cfg << "[time]\nsigma = 1.2\n";
  }
  const std::string bad = "\"" + exe + "\" \"" + (dir / "bad.ini").string() + "\" > /dev/null 2> \""
                          + (dir / "bad.stderr").string() + "\"";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 1);
  CHECK(slurp(dir / "bad.stderr").find("line 2: time.sigma") != std::string::npos);
  fs::remove_all(dir);
}
