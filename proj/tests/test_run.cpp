#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spinprobe/io.hpp"
#include "spinprobe/run.hpp"

using namespace spinprobe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("spinprobe_test_run_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

run::RunConfig small_exact(const fs::path& out) {
  run::RunConfig c;
  c.backend = run::Backend::Exact;
  c.t_max = 10.0;
  c.dt = 0.1;
  c.axes.L = {6, 8};
  c.axes.delta = {0.0, 1.0};
  c.axes.g = {0.25};
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("axis parsing") {
  CHECK(run::parse_axis("0.5") == std::vector<double>{0.5});
  CHECK(run::parse_axis("1,2,4") == std::vector<double>{1, 2, 4});
  const auto r = run::parse_axis("0.0:3.0:0.25");
  REQUIRE(r.size() == 13);
  CHECK(r.back() == doctest::Approx(3.0));
  CHECK_THROWS_AS(run::parse_axis("1:2"), std::invalid_argument);
  CHECK_THROWS_AS(run::parse_axis("2:1:0.5"), std::invalid_argument);
  CHECK_THROWS_AS(run::parse_axis("1:2:0"), std::invalid_argument);
  CHECK_THROWS_AS(run::parse_axis("1,x"), std::invalid_argument);
}

TEST_CASE("backend names round trip") {
  for (auto b : {run::Backend::Exact, run::Backend::Tdvp, run::Backend::TclExact, run::Backend::TclTdvp,
                 run::Backend::AnalyticPbc, run::Backend::AnalyticObcDet, run::Backend::Ising}) {
    CHECK(run::backend_from_string(run::to_string(b)) == b);
  }
  CHECK_THROWS_AS(run::backend_from_string("dmrg"), std::invalid_argument);
}

TEST_CASE("worker count override") {
  ::setenv("SPINPROBE_WORKERS", "3", 1);
  CHECK(run::resolve_workers(8) == 3);
  ::setenv("SPINPROBE_WORKERS", "zero", 1);
  CHECK_THROWS(run::resolve_workers(1));
  ::unsetenv("SPINPROBE_WORKERS");
  CHECK(run::resolve_workers(0) == 1);
  CHECK(run::resolve_workers(4) == 4);
}

TEST_CASE("capability gating rejects before any output") {
  const auto out = scratch("gate");
  auto c = small_exact(out);
  c.axes.L = {8, 16};
  CHECK_THROWS_AS(run::run_sweep(c, true), run::CapabilityError);
  CHECK_FALSE(fs::exists(out));

  c = small_exact(out);
  c.backend = run::Backend::AnalyticObcDet;
  CHECK_THROWS_AS(run::check_capability(c, run::expand_points(c)[1]), run::CapabilityError);
  CHECK_NOTHROW(run::check_capability(c, run::expand_points(c)[0]));

  c.backend = run::Backend::Ising;
  auto p = c.base;
  p.L = 8;
  p.delta = 0.5;
  CHECK_THROWS_AS(run::check_capability(c, p), run::CapabilityError);
  p.delta = 5.0;
  CHECK_NOTHROW(run::check_capability(c, p));

  c.backend = run::Backend::Tdvp;
  c.tn.tdvp.dt = 0.03;
  CHECK_THROWS_AS(run::check_capability(c, p), run::CapabilityError);

  c = small_exact(out);
  c.t_max = 0.0;
  CHECK_THROWS_AS(run::check_capability(c, run::expand_points(c)[0]), run::CapabilityError);
  c = small_exact(out);
  p.L = 7;
  CHECK_THROWS_AS(run::check_capability(c, p), run::CapabilityError);
}

TEST_CASE("sweep artifacts") {
  const auto out = scratch("artifacts");
  const auto c = small_exact(out);
  const auto res = run::run_sweep(c, true);
  REQUIRE(res.ok);
  CHECK(res.points.size() == 4);
  for (const auto& r : res.points) {
    CHECK(fs::exists(out / ("coherence_" + r.tag + ".csv")));
    const auto rep = io::read_json(out / ("report_" + r.tag + ".json"));
    CHECK(rep["params"]["L"] == r.params.L);
    CHECK_FALSE(rep.contains("wall_seconds"));
  }
  const auto m = io::read_json(out / "manifest.json");
  CHECK(m["config"] == run::to_json(c));
  CHECK(m["config"]["dmrg"]["chi_max"] == c.tn.dmrg.chi_max);
  CHECK(m["config"]["recoherence"]["marker"] == "onset");
  CHECK(m["points"].size() == 4);
  CHECK(m["version"].get<std::string>().rfind("0.", 0) == 0);

  std::ifstream tab(out / "observables.csv");
  std::string header;
  std::getline(tab, header);
  CHECK(header == "L,delta,g,t_r,omega,entropy");
  int rows = 0;
  for (std::string line; std::getline(tab, line);) rows += !line.empty();
  CHECK(rows == 4);

  // The written trace reads back bit for bit.
  const auto back = io::read_coherence_csv(out / ("coherence_" + res.points[0].tag + ".csv"));
  REQUIRE(back.size() == res.points[0].trace.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back.t[k] == res.points[0].trace.t[k]);
    CHECK(back.rho01[k] == res.points[0].trace.rho01[k]);
  }

  const auto self = run::compare_runs(out, out);
  CHECK(self["max_abs_deviation"] == 0.0);
  CHECK(self["points"].size() == 4);
}

TEST_CASE("sweeps are reproducible and independent of the worker count") {
  auto c = small_exact(scratch("w1"));
  c.axes.delta = {-1.5, 0.0, 0.5, 2.0};
  run::run_sweep(c, true);
  auto c2 = c;
  c2.out_dir = scratch("w3");
  c2.workers = 3;
  run::run_sweep(c2, true);
  for (const auto& e : fs::directory_iterator(c.out_dir)) {
    if (e.path().filename() == "manifest.json") continue;
    CHECK_MESSAGE(slurp(e.path()) == slurp(c2.out_dir / e.path().filename()), e.path().filename().string());
  }
}

TEST_CASE("per-group linear fits of t_r against L") {
  auto c = small_exact(scratch("fit"));
  c.axes.L = {6, 8, 10};
  c.axes.delta = {1.0};
  c.t_max = 20.0;
  const auto res = run::run_sweep(c, true);
  bool all_tr = true;
  for (const auto& r : res.points) all_tr = all_tr && r.report.t_r.has_value();
  REQUIRE(all_tr);
  REQUIRE(res.manifest["fits"].size() == 1);
  const auto& f = res.manifest["fits"][0];
  CHECK(f["slope"].get<double>() > 0.0);
  CHECK(f.contains("slope_rel_dev"));
  CHECK(res.points[0].report.fit == f);
}

TEST_CASE("compare_runs reports mismatched sweeps") {
  auto a = small_exact(scratch("ma"));
  run::run_sweep(a, false);
  auto b = a;
  b.out_dir = scratch("mb");
  b.axes.delta = {0.0, 0.5};
  run::run_sweep(b, false);
  try {
    run::compare_runs(a.out_dir, b.out_dir);
    FAIL("expected a mismatch");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("L6_delta1_g0.25") != std::string::npos);
    CHECK(msg.find("L6_delta0.5_g0.25") != std::string::npos);
  }
}

TEST_CASE("analytic backends through the run layer") {
  auto c = small_exact(scratch("analytic"));
  c.axes.L = {12};
  c.axes.delta = {0.0};
  c.base.h_z = 0.3;
  const auto ex = run::run_point(c, run::expand_points(c)[0]);
  c.backend = run::Backend::AnalyticObcDet;
  const auto det = run::run_point(c, run::expand_points(c)[0]);
  double dev = 0.0;
  for (std::size_t k = 0; k < ex.trace.size(); ++k) dev = std::max(dev, std::abs(ex.trace.rho01[k] - det.trace.rho01[k]));
  CHECK(dev <= 1e-8);
  CHECK(*det.report.entropy == doctest::Approx(*ex.report.entropy).epsilon(1e-10));

  c.backend = run::Backend::TclExact;
  const auto tcl = run::run_point(c, run::expand_points(c)[0]);
  // h_z only rotates the phase: the TCL result keeps the exact phase.
  CHECK(std::abs(std::arg(tcl.trace.rho01[50]) - std::arg(ex.trace.rho01[50])) <= 1e-2);
}
