#include "doctest.h"

#include <cmath>
#include <numbers>

#include "spinprobe/analytic.hpp"
#include "spinprobe/ed/exact.hpp"
#include "spinprobe/tcl.hpp"

using namespace spinprobe;
using namespace spinprobe::analytic;

namespace {

ModelParams delta0(int L, double g = 0.25) {
  ModelParams p;
  p.L = L;
  p.g = g;
  return p;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("periodic Fermi sea") {
  for (int L : {12, 14, 100, 102}) {
    const auto s = fermion_spectrum_pbc(L, 1.0);
    CHECK(s.occupied_count() == L / 2);
    CHECK(s.zero_modes == (L % 4 == 0 ? 2 : 0));
    for (int i = 0; i < L; ++i) {
      if (s.occupied[i]) CHECK(s.eps[i] <= 0.0);
    }
  }
  const auto s = fermion_spectrum_pbc(100, 1.0);
  CHECK(s.occupied[24]);  // n = 25, k = pi/2
  CHECK_FALSE(s.occupied[74]);
  CHECK_THROWS_AS(fermion_spectrum_pbc(7, 1.0), ModelError);
}

TEST_CASE("periodic free-fermion coherence") {
  const auto grid = TimeGrid::up_to(40.0, 0.05);
  const auto tr = free_fermion_coherence_pbc(100, 1.0, 0.25, grid);
  CHECK(tr.rho01[0] == cplx(0.5, 0.0));
  for (const auto& r : tr.rho01) {
    CHECK(r.real() <= 0.5);
    CHECK(r.imag() == 0.0);
  }
  SUBCASE("zero-mode fill does not matter") {
    PbcOptions upper;
    upper.zero_mode = ZeroModeFill::UpperMomentum;
    CHECK(max_diff(tr.rho01, free_fermion_coherence_pbc(100, 1.0, 0.25, grid, upper).rho01) <= 1e-3);
  }
  SUBCASE("prefactor audit against the exact C(0)") {
    ModelParams p = delta0(12);
    const double ed_c0 = ed::correlation_exact(p, TimeGrid::up_to(0.05, 0.05)).c[0].real();
    PbcOptions printed;
    printed.prefactor = 4.0;
    const auto c1 = free_fermion_correlation_pbc(12, 1.0, grid).c[0].real();
    const auto c4 = free_fermion_correlation_pbc(12, 1.0, grid, printed).c[0].real();
    CHECK(std::abs(c1 - ed_c0) <= 1e-12);
    CHECK(std::abs(c4 - ed_c0) >= 0.5);
    CHECK(PbcOptions{}.prefactor == 1.0);
  }
}

TEST_CASE("closed form equals the TCL integral of the periodic correlator") {
  const auto grid = TimeGrid::up_to(40.0, 0.01);
  for (int L : {12, 100}) {
    for (double c : {1.0, 4.0}) {
      PbcOptions opt;
      opt.prefactor = c;
      const auto closed = free_fermion_coherence_pbc(L, 1.0, 0.1, grid, opt);
      const auto tcl = tcl_coherence(free_fermion_correlation_pbc(L, 1.0, grid, opt), 0.1);
      CHECK(max_diff(closed.rho01, tcl.coherence.rho01) <= 1e-6);
    }
  }
}

TEST_CASE("open-chain free-fermion correlator") {
  const auto grid = TimeGrid::up_to(20.0, 0.05);
  const auto c = free_fermion_correlation_obc(12, 1.0, grid);
  CHECK(std::abs(c.c[0] - 0.25) <= 1e-12);
  CHECK(std::abs(free_fermion_correlation_obc(100, 1.0, grid).c[0] - 0.25) <= 1e-12);
  CHECK(max_diff(c.c, ed::correlation_exact(delta0(12), grid).c) <= 1e-10);
  const TimeGrid back{-0.05, 400};
  const auto cb = free_fermion_correlation_obc(12, 1.0, back);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(cb.c[k] - std::conj(c.c[k])) <= 1e-14);
  SUBCASE("periodic and open correlators approach each other mid-chain") {
    const auto w = TimeGrid::up_to(10.0, 0.05);
    const double d50 = max_diff(free_fermion_correlation_pbc(50, 1.0, w).c, free_fermion_correlation_obc(50, 1.0, w).c);
    const double d200 =
        max_diff(free_fermion_correlation_pbc(200, 1.0, w).c, free_fermion_correlation_obc(200, 1.0, w).c);
    CHECK(d200 < d50);
    PbcOptions quarter;
    quarter.dispersion_scale = 0.25;
    CHECK(max_diff(free_fermion_correlation_pbc(200, 1.0, w, quarter).c, free_fermion_correlation_obc(200, 1.0, w).c) >
          10 * d200);
  }
  CHECK(free_fermion_energy_obc(2, 1.0) == doctest::Approx(-0.5));
  const auto gs = ed::ground_state_exact(delta0(12), 0);
  CHECK(free_fermion_energy_obc(12, 1.0) == doctest::Approx(gs.energy).epsilon(1e-12));
  CHECK(free_fermion_entropy_obc(12, 1.0, 6) == doctest::Approx(ed::entanglement_entropy(gs.state, 6)).epsilon(1e-10));
  CHECK(free_fermion_entropy_obc(12, 1.0, 3) == doctest::Approx(ed::entanglement_entropy(gs.state, 3)).epsilon(1e-10));
}

TEST_CASE("determinant coherence at delta = 0") {
  const auto grid = TimeGrid::up_to(30.0, 0.05);
  const auto det = determinant_coherence_delta0(delta0(12), grid);
  CHECK(max_diff(det.rho01, ed::coherence_exact(delta0(12), grid).rho01) <= 1e-8);
  for (const auto& r : determinant_coherence_delta0(delta0(100), grid).rho01) CHECK(std::abs(r) <= 0.5 + 1e-12);
  for (const auto& r : determinant_coherence_delta0(delta0(12, 0.0), grid).rho01) CHECK(std::abs(r - 0.5) <= 1e-12);
  ModelParams p = delta0(12);
  p.h_z = 0.3;
  CHECK(max_diff(determinant_coherence_delta0(p, grid).rho01, ed::coherence_exact(p, grid).rho01) <= 1e-8);
  p.delta = 0.5;
  CHECK_THROWS_AS(determinant_coherence_delta0(p, grid), ModelError);
}

TEST_CASE("Ising-limit coherence") {
  const auto grid = TimeGrid::up_to(100.0, 0.05);
  const auto eq = ising_coherence({}, 0.25, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(eq.rho01[k] - 0.5 * std::cos(0.125 * grid.t(k))) <= 1e-14);
  }
  const auto pure = ising_coherence({1.0, 0.0}, 0.25, grid);
  for (const auto& r : pure.rho01) CHECK(std::abs(r) == doctest::Approx(0.5));
  const auto skew = ising_coherence({std::sqrt(0.7), std::sqrt(0.3)}, 0.25, grid);
  double im = 0.0;
  for (const auto& r : skew.rho01) im = std::max(im, std::abs(r.imag()));
  CHECK(im > 0.1);
  CHECK_THROWS_AS(ising_coherence({1.0, 1.0}, 0.25, grid), std::invalid_argument);
}

TEST_CASE("spinon velocity") {
  CHECK(spinon_velocity(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spinon_velocity(1.0, 1.0) == doctest::Approx(std::numbers::pi / 2));
  CHECK(spinon_velocity(1.0, 0.5) == doctest::Approx(3.0 * std::sqrt(3.0) / 4.0).epsilon(1e-14));
  CHECK(spinon_velocity(2.0, 0.5) == doctest::Approx(2.0 * spinon_velocity(1.0, 0.5)));
  CHECK(spinon_velocity(1.0, 1.0 - 1e-9) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-4));
  double prev = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double d = -1.0 + i * 1e-3;
    const double u = spinon_velocity(1.0, d);
    CHECK(u > prev);
    prev = u;
  }
  CHECK_THROWS_AS(spinon_velocity(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(spinon_velocity(1.0, 1.5), std::domain_error);
}
