#include "doctest.h"

#include <cmath>
#include <random>

#include "spinprobe/ed/exact.hpp"
#include "spinprobe/tn/dmrg.hpp"
#include "spinprobe/tn/dynamics.hpp"
#include "spinprobe/tn/mpo.hpp"
#include "spinprobe/tn/mps.hpp"
#include "spinprobe/tn/tdvp.hpp"

using namespace spinprobe;
using tn::MPS;

namespace {

ModelParams params(double delta, int L, double g = 0.25) {
  ModelParams p;
  p.delta = delta;
  p.L = L;
  p.g = g;
  return p;
}

// Random normalized vector supported on the sector with total 2 S^z = q.
Eigen::VectorXcd random_sector_vector(int L, int q, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  const auto basis = ed::SectorBasis::with_two_sz(L, q);
  for (const auto s : basis.states()) v(s) = cplx(gauss(rng), gauss(rng));
  return v.normalized();
}

Eigen::VectorXcd flip_dense(const Eigen::VectorXcd& v, int L) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index s = 0; s < v.size(); ++s) out(ed::flip_state(static_cast<ed::State>(s), L)) = v(s);
  return out;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("block matrices agree with their dense images") {
  tn::BondSpace a, b;
  a.add(-1, 2);
  a.add(1, 3);
  b.add(0, 2);
  b.add(2, 1);
  auto m = tn::BlockMatrix::zeros(a, b, 1);
  for (auto& blk : m.blocks) blk.setRandom();
  auto n = tn::BlockMatrix::zeros(b, a, -1);
  for (auto& blk : n.blocks) blk.setRandom();
  const auto prod = tn::multiply(m, n);
  CHECK((prod.to_dense() - m.to_dense() * n.to_dense()).norm() <= 1e-13);
  CHECK((m.adjoint().to_dense() - m.to_dense().adjoint()).norm() == 0.0);
  CHECK(std::abs(m.squared_norm() - m.to_dense().squaredNorm()) <= 1e-12);
}

TEST_CASE("MPS construction and dense round trips") {
  SUBCASE("product state") {
    const MPS psi = MPS::product({0, 1, 1, 0});
    const auto v = psi.to_dense();
    CHECK(std::abs(v(0b1001) - 1.0) == 0.0);
    CHECK(v.norm() == doctest::Approx(1.0));
    CHECK(psi.total_charge() == 0);
    CHECK(psi.max_bond_dim() == 1);
  }
  SUBCASE("exact decomposition of a sector vector") {
    for (int q : {0, 2, -4}) {
      const auto v = random_sector_vector(8, q, 7u + q);
      MPS psi = MPS::from_dense(v, 8);
      CHECK(psi.total_charge() == q);
      CHECK((psi.to_dense() - v).norm() <= 1e-12);
      psi.canonicalize(3);
      CHECK(psi.canonical_error() <= 1e-12);
      CHECK((psi.to_dense() - v).norm() <= 1e-12);
      CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("random MPS is right-canonical and normalized") {
    const MPS psi = MPS::random(10, 0, 3, 5u);
    CHECK(psi.center() == 0);
    CHECK(psi.canonical_error() <= 1e-12);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psi.bond_dims().front() == 1);
    CHECK(psi.bond_dims().back() == 1);
  }
  SUBCASE("mixed sector vectors are rejected") {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(16);
    v(0) = v(1) = 1.0 / std::sqrt(2.0);
    CHECK_THROWS_AS(MPS::from_dense(v, 4), ModelError);
  }
}

TEST_CASE("overlap, flip, addition and compression") {
  const int L = 8;
  const auto va = random_sector_vector(L, 0, 11u);
  const auto vb = random_sector_vector(L, 0, 12u);
  const MPS a = MPS::from_dense(va, L);
  const MPS b = MPS::from_dense(vb, L);
  CHECK(std::abs(tn::overlap(a, b) - va.dot(vb)) <= 1e-12);
  CHECK((a.flipped().to_dense() - flip_dense(va, L)).norm() <= 1e-12);
  const cplx ca(0.3, -0.2), cb(-1.1, 0.4);
  MPS sum = tn::add(a, b, ca, cb);
  CHECK((sum.to_dense() - (ca * va + cb * vb)).norm() <= 1e-12);
  const double before = sum.norm();
  const double discarded = tn::compress(sum, {256, 1e-14});
  CHECK(discarded <= 1e-13);
  CHECK(sum.canonical_error() <= 1e-11);
  CHECK(sum.norm() == doctest::Approx(before).epsilon(1e-10));
  CHECK((sum.to_dense() - (ca * va + cb * vb)).norm() <= 1e-10);
  CHECK(std::abs(tn::overlap(MPS::product({0, 0, 0, 0, 0, 0, 0, 0}), a)) == 0.0);
}

TEST_CASE("truncated two-site splits respect chi_max and report the discarded weight") {
  const int L = 10;
  MPS psi = MPS::from_dense(random_sector_vector(L, 0, 3u), L);
  psi.canonicalize(4);
  const auto theta = tn::contract_two_site(psi.site(4), psi.site(5));
  const auto exact = tn::split_two_site(theta, {1000, 1e-15}, true);
  const auto cut = tn::split_two_site(theta, {8, 1e-15}, true);
  CHECK(cut.left[0].cols.total_dim() == 8);
  CHECK(exact.discarded <= 1e-14);
  const auto sv = psi.schmidt_values(5);
  double tail = 0.0, total = 0.0;
  for (std::size_t k = 0; k < sv.size(); ++k) {
    total += sv[k] * sv[k];
    if (k >= 8) tail += sv[k] * sv[k];
  }
  CHECK(cut.discarded == doctest::Approx(tail / total).epsilon(1e-9));
}

TEST_CASE("entanglement entropy") {
  MPS prod = MPS::product({0, 1, 0, 1});
  CHECK(prod.entanglement_entropy(2) == doctest::Approx(0.0));
  Eigen::VectorXcd singlet = Eigen::VectorXcd::Zero(4);
  singlet(0b01) = 1.0 / std::sqrt(2.0);
  singlet(0b10) = -1.0 / std::sqrt(2.0);
  MPS s = MPS::from_dense(singlet, 2);
  CHECK(s.entanglement_entropy(1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("MPO matrix elements match the dense matrices") {
  const int L = 6;
  auto p = params(1.3, L);
  p.coupled_site = 2;
  for (auto br : {BranchSign::Plus, BranchSign::Minus}) {
    const auto terms = build_branch_terms(p, br);
    const auto h = tn::MPO::from_terms(terms);
    const Eigen::MatrixXd dense = ed::dense_matrix(terms);
    const auto va = random_sector_vector(L, 0, 21u), vb = random_sector_vector(L, 0, 22u);
    const MPS a = MPS::from_dense(va, L), b = MPS::from_dense(vb, L);
    CHECK(std::abs(tn::matrix_element(a, h, b) - va.dot(dense.cast<cplx>() * vb)) <= 1e-12);
    CHECK(std::abs(tn::expectation(a, h) - std::real(va.dot(dense.cast<cplx>() * va))) <= 1e-12);
  }
  SUBCASE("non-local terms are rejected") {
    OperatorTermList h(4);
    h.add(1.0, {{1, LocalOp::Sz}, {3, LocalOp::Sz}});
    CHECK_THROWS_AS(tn::MPO::from_terms(h), ModelError);
    OperatorTermList r(4);
    r.add(1.0, {{1, LocalOp::SPlus}});
    CHECK_THROWS_AS(tn::MPO::from_terms(r), ModelError);
  }
}

TEST_CASE("DMRG against exact diagonalization") {
  tn::DmrgConfig cfg;
  SUBCASE("Heisenberg chain, L = 12") {
    const auto p = params(1.0, 12);
    const auto ed_gs = ed::ground_state_exact(p, 0);
    auto res = tn::dmrg_ground_state(p, cfg);
    CHECK(res.two_sz == 0);
    CHECK(std::abs(res.energy - ed_gs.energy) <= 1e-8 * std::abs(ed_gs.energy));
    CHECK(std::abs(std::abs(res.state.to_dense().dot(ed_gs.state.amplitudes)) - 1.0) <= 1e-8);
    CHECK(res.state.canonical_error() <= 1e-10);
    // Truncation at the default cutoff shifts the entropy by ~1e-8; tighten it here.
    auto tight = cfg;
    tight.cutoff = 1e-14;
    auto fine = tn::dmrg_ground_state(p, tight);
    CHECK(fine.state.entanglement_entropy(6) ==
          doctest::Approx(ed::entanglement_entropy(ed_gs.state, 6)).epsilon(1e-10));
  }
  SUBCASE("ferromagnetic side: polarized product state") {
    const auto p = params(-2.0, 12);
    auto res = tn::dmrg_ground_state(p, cfg);
    CHECK(res.energy == doctest::Approx(-2.0 * 11 / 4.0).epsilon(1e-12));
    for (int d : res.state.bond_dims()) CHECK(d == 1);
  }
  SUBCASE("deep antiferromagnet resolves to a flip eigenstate") {
    const auto p = params(10.0, 12);
    auto res = tn::dmrg_ground_state(p, cfg);
    const auto ed_gs = ed::ground_state_exact(p, 0);
    CHECK(std::abs(res.energy - ed_gs.energy) <= 1e-8 * std::abs(ed_gs.energy));
    CHECK(std::abs(std::abs(res.flip_parity) - 1.0) <= 1e-8);
    CHECK(std::abs(std::abs(tn::overlap(res.state.flipped(), res.state)) - 1.0) <= 1e-8);
  }
  SUBCASE("non-convergence reports the energy history") {
    auto tight = cfg;
    tight.max_sweeps = 2;
    tight.min_sweeps = 2;
    tight.chi_ramp = {2, 2};
    try {
      tn::dmrg_ground_state(params(0.5, 10), tight);
      FAIL("expected DmrgError");
    } catch (const tn::DmrgError& e) {
      CHECK(e.energy_history().size() == 2);
    }
  }
}

TEST_CASE("TDVP basic properties") {
  const auto p = params(0.5, 12);
  tn::DmrgConfig dcfg;
  const auto gs = tn::dmrg_ground_state(p, dcfg);
  tn::TdvpConfig cfg;
  cfg.dt = 0.1;
  SUBCASE("zero Hamiltonian leaves the state unchanged") {
    MPS psi = gs.state;
    const auto zero = tn::MPO::from_terms(OperatorTermList(p.L));
    auto exact = cfg;
    exact.cutoff = 1e-24;
    tn::tdvp_evolve(psi, zero, exact, 5);
    CHECK(std::abs(std::abs(tn::overlap(gs.state, psi)) - 1.0) <= 1e-12);
    CHECK(std::abs(tn::overlap(gs.state, psi) - 1.0) <= 1e-10);
  }
  SUBCASE("ground state is stationary") {
    MPS psi = gs.state;
    const auto h = tn::MPO::from_terms(build_xxz_terms(p));
    double worst = 0.0, drift = 0.0;
    auto log = tn::tdvp_evolve(psi, h, cfg, 200, [&](int, const MPS& s) {
      worst = std::max(worst, std::abs(std::abs(tn::overlap(gs.state, s)) - 1.0));
    });
    for (const auto& s : log) drift = std::max(drift, s.norm_drift);
    CHECK(worst <= 1e-6);
    CHECK(drift <= 1e-8);
  }
  SUBCASE("invalid configuration") {
    auto bad = cfg;
    bad.cutoff = 0.0;
    CHECK_THROWS_AS(tn::TdvpEngine(gs.state, tn::MPO::from_terms(build_xxz_terms(p)), bad), std::invalid_argument);
  }
}

TEST_CASE("TDVP evolution matches Krylov evolution of the same state") {
  const int L = 10;
  const auto p = params(0.7, L);
  const auto terms = build_branch_terms(p, BranchSign::Plus);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << L);
  v(0b0101010101) = 1.0;  // Neel state: bonds must grow from 1
  auto error = [&](tn::TdvpMode mode, double dt, double cutoff) {
    MPS psi = MPS::from_dense(v, L);
    ed::DenseState ref{L, v};
    tn::TdvpConfig cfg;
    cfg.dt = dt;
    cfg.mode = mode;
    cfg.chi_max = 64;
    cfg.cutoff = cutoff;
    const int n = static_cast<int>(std::lround(3.0 / dt));
    ed::propagate_krylov(terms, ref, dt, n);
    tn::tdvp_evolve(psi, tn::MPO::from_terms(terms), cfg, n);
    return (psi.to_dense() - ref.amplitudes).norm();
  };
  for (auto mode : {tn::TdvpMode::TwoSite, tn::TdvpMode::Auto}) {
    const double coarse = error(mode, 0.05, 1e-24);
    const double fine = error(mode, 0.025, 1e-24);
    CHECK(fine <= 1e-6);
    CHECK(fine <= coarse / 4.0);  // at least second order in dt
  }
  // Each split loses ~sqrt(cutoff) in amplitude.
  CHECK(error(tn::TdvpMode::TwoSite, 0.05, 1e-10) <= 1e-3);
}

TEST_CASE("one-site TDVP is exact at full bond dimension") {
  const int L = 8;
  const auto p = params(1.0, L);
  const auto terms = build_branch_terms(p, BranchSign::Minus);
  const auto gs = ed::ground_state_exact(params(0.3, L), 0);
  // Start from a generic state whose bonds already span the sector.
  const Eigen::VectorXcd v = (gs.state.amplitudes + 0.3 * random_sector_vector(L, 0, 4u)).normalized();
  MPS psi = MPS::from_dense(v, L);
  ed::DenseState ref{L, v};
  tn::TdvpConfig cfg;
  cfg.mode = tn::TdvpMode::OneSite;
  ed::propagate_krylov(terms, ref, cfg.dt, 40);
  tn::tdvp_evolve(psi, tn::MPO::from_terms(terms), cfg, 40);
  CHECK((psi.to_dense() - ref.amplitudes).norm() <= 1e-8);
}

TEST_CASE("TDVP coherence against the exact backend") {
  const auto grid = TimeGrid::up_to(20.0, 0.05);
  tn::TnConfig cfg;
  SUBCASE("flip trick reproduces the two-branch evolution") {
    const auto p = params(0.5, 10);
    const auto init = tn::prepare_initial_state(p, cfg);
    auto two = cfg;
    two.flip_symmetry = false;
    const auto short_grid = TimeGrid::up_to(5.0, 0.05);
    const auto a = tn::coherence_tdvp(p, cfg, short_grid, init);
    const auto b = tn::coherence_tdvp(p, two, short_grid, init);
    CHECK(a.meta["components"][0]["flip_symmetry_used"] == true);
    CHECK(b.meta["components"][0]["flip_symmetry_used"] == false);
    CHECK(max_abs_diff(a.rho01, b.rho01) <= 1e-8);
  }
  SUBCASE("L = 12, delta = 0.5") {
    const auto p = params(0.5, 12);
    const auto ex = ed::coherence_exact(p, grid);
    const auto tr = tn::coherence_tdvp(p, cfg, grid);
    CHECK(tr.rho01[0] == cplx(0.5, 0.0));
    CHECK(max_abs_diff(tr.rho01, ex.rho01) <= 1e-3);
    for (const auto& r : tr.rho01) {
      CHECK(std::abs(r) <= 0.5 + 1e-10);
      CHECK(std::abs(r.imag()) <= 1e-5);
    }
  }
  SUBCASE("ferromagnetic cat state") {
    const auto p = params(-1.5, 12);
    const auto tr = tn::coherence_tdvp(p, cfg, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(tr.rho01[k] - 0.5 * std::cos(p.g * grid.t(k) / 2.0)) <= 1e-10);
    }
  }
  SUBCASE("sampling must be a multiple of the step") {
    auto c = cfg;
    c.tdvp.dt = 0.03;
    CHECK_THROWS_AS(tn::coherence_tdvp(params(0.0, 6), c, grid), std::invalid_argument);
  }
}

TEST_CASE("MPS two-time correlator against the exact backend") {
  const auto p = params(0.5, 12);
  const auto grid = TimeGrid::up_to(10.0, 0.05);
  tn::TnConfig cfg;
  const auto c = tn::two_time_correlation_mps(p, cfg, grid);
  const auto ex = ed::correlation_exact(p, grid);
  CHECK(std::abs(c.c[0] - 0.25) <= 1e-8);
  CHECK(max_abs_diff(c.c, ex.c) <= 1e-4);
}
