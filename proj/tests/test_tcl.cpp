#include "doctest.h"

#include <cmath>

#include "spinprobe/ed/exact.hpp"
#include "spinprobe/tcl.hpp"

using namespace spinprobe;

namespace {

CorrelationTrace make_corr(const TimeGrid& grid, const std::function<cplx(double)>& f) {
  CorrelationTrace c;
  c.backend = "synthetic";
  c.t = grid.times();
  for (double t : c.t) c.c.push_back(f(t));
  return c;
}

// Gamma for C = (1/4) cos(w t): (g^2/2) * (1/2) (1 - cos w t) / w^2.
double cosine_gamma(double g, double w, double t) { return 0.25 * g * g * (1.0 - std::cos(w * t)) / (w * w); }

double max_gamma_error(double dt, double g, double w) {
  const auto grid = TimeGrid::up_to(10.0, dt);
  const auto r = tcl_coherence(make_corr(grid, [&](double t) { return cplx(0.25 * std::cos(w * t), 0.0); }), g);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) err = std::max(err, std::abs(r.gamma[k] - cosine_gamma(g, w, grid.t(k))));
  return err;
}

}  // namespace

TEST_CASE("vanishing correlator leaves the coherence untouched") {
  const auto grid = TimeGrid::up_to(20.0, 0.05);
  const auto r = tcl_coherence(make_corr(grid, [](double) { return cplx(0.0); }), 0.25, cplx(0.5, 0.1));
  for (const auto& x : r.coherence.rho01) CHECK(x == cplx(0.5, 0.1));
  CHECK(markov_diagnostic(make_corr(grid, [](double) { return cplx(0.0); }), 10.0) == 0.0);
}

TEST_CASE("frozen spin gives Gaussian decay and a linearly growing rate") {
  const double g = 0.25;
  const auto grid = TimeGrid::up_to(40.0, 0.05);
  const auto corr = make_corr(grid, [](double) { return cplx(0.25, 0.0); });
  const auto r = tcl_coherence(corr, g);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.t(k);
    CHECK(r.A[k] == doctest::Approx(t / 2.0).epsilon(1e-12));
    CHECK(std::abs(r.coherence.rho01[k] - 0.5 * std::exp(-g * g * t * t / 8.0)) <= 1e-14);
    CHECK(r.coherence.rho01[k] == 0.5 * std::exp(-r.gamma[k]));
  }
  // Mean of T/2 over [30, 40].
  CHECK(markov_diagnostic(corr, 10.0) == doctest::Approx(17.5).epsilon(1e-12));
  const auto m = markov_report(corr, 30.0, 40.0);
  CHECK(m.max_abs_A == doctest::Approx(20.0));
  CHECK(m.ratio == doctest::Approx(17.5 / 20.0));
}

TEST_CASE("quadrature converges at second order") {
  // Trapezoid is exact for the frozen spin, so use an oscillating correlator.
  const double e1 = max_gamma_error(0.1, 0.25, 1.3);
  const double e2 = max_gamma_error(0.05, 0.25, 1.3);
  const double e3 = max_gamma_error(0.025, 0.25, 1.3);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("exponent scales exactly with g squared") {
  const auto grid = TimeGrid::up_to(30.0, 0.05);
  const auto corr = make_corr(grid, [](double t) { return cplx(0.25 * std::exp(-0.1 * t) * std::cos(t), 0.1 * std::sin(t)); });
  const auto a = tcl_coherence(corr, 0.1), b = tcl_coherence(corr, 0.4);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    CHECK(std::abs(b.gamma[k] / a.gamma[k] - 16.0) <= 8 * std::numeric_limits<double>::epsilon() * 16.0);
    CHECK(a.coherence.rho01[k].imag() == 0.0);
  }
}

TEST_CASE("input validation") {
  CorrelationTrace c;
  c.t = {0.0, 0.1, 0.25};
  c.c = {0.25, 0.2, 0.1};
  CHECK_THROWS_AS(tcl_coherence(c, 0.25), std::invalid_argument);
  const auto grid = TimeGrid::up_to(5.0, 0.05);
  const auto ok = make_corr(grid, [](double) { return cplx(0.25); });
  CHECK_THROWS_AS(markov_diagnostic(ok, 6.0), std::invalid_argument);
  CHECK_THROWS_AS(markov_report(ok, 3.0, 7.0), std::invalid_argument);
}

TEST_CASE("second-order TCL against exact dynamics at L = 12") {
  const auto grid = TimeGrid::up_to(20.0, 0.05);
  auto deviation = [&](double delta) {
    ModelParams p;
    p.L = 12;
    p.delta = delta;
    const auto tcl = tcl_coherence(ed::correlation_exact(p, grid), p.g);
    const auto ex = ed::coherence_exact(p, grid);
    double d = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) d = std::max(d, std::abs(tcl.coherence.rho01[k] - ex.rho01[k]));
    return d;
  };
  const double near = deviation(0.5);
  CHECK(near <= 0.02);
  CHECK(deviation(2.5) > near);
}
