#include "spinprobe/ed/exact.hpp"

#include <cmath>
#include <random>
#include <string>

namespace spinprobe::ed {

namespace {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

void check_exact_size(const ModelParams& p, const ExactOptions& opt) {
  validate(p);
  if (p.L > opt.max_L) {
    throw ModelError("exact backend limited to L <= " + std::to_string(opt.max_L) + ", got L = " +
                     std::to_string(p.L));
  }
}

Eigen::VectorXcd sparse_apply(const SparseRow& h, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  const Eigen::VectorXd re = v.real();
  const Eigen::VectorXd im = v.imag();
  out.real() = h * re;
  out.imag() = h * im;
  return out;
}

// Fixes the global phase: the largest amplitude becomes real positive.
void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const cplx a = v(imax);
  if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
}

Eigen::VectorXcd flipped(const Eigen::VectorXcd& v, int L) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index s = 0; s < v.size(); ++s) out(flip_state(static_cast<State>(s), L)) = v(s);
  return out;
}

struct SectorResult {
  Eigen::VectorXcd full;
  double energy;
  double residual;
};

SectorResult sector_ground(const OperatorTermList& h_terms, int L, int two_sz,
                           const ExactOptions& opt) {
  const auto basis = SectorBasis::with_two_sz(L, two_sz);
  const auto h = assemble(h_terms, basis);
  Eigen::VectorXd x;
  double energy = 0.0;
  double residual = 0.0;
  if (L <= opt.dense_max_L || basis.size() <= 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(h)};
    x = es.eigenvectors().col(0);
    energy = es.eigenvalues()(0);
  } else {
    std::mt19937_64 rng(opt.seed + static_cast<unsigned>(two_sz + L));
    std::normal_distribution<double> gauss;
    Eigen::VectorXd start(basis.size());
    for (auto& a : start) a = gauss(rng);
    auto res = linalg::lanczos_lowest([&h](const Eigen::VectorXd& v) -> Eigen::VectorXd { return h * v; },
                                      start, opt.lanczos);
    x = res.vector;
    energy = res.value;
    residual = res.residual;
  }
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  for (std::size_t i = 0; i < basis.size(); ++i) full(basis.state(i)) = x(static_cast<Eigen::Index>(i));

  if (two_sz == 0) {
    const double parity = std::real(full.dot(flipped(full, L)));
    if (std::abs(parity) < 1.0 - 1e-8) {
      // Degenerate ground space: keep the flip-even combination unless it vanishes.
      Eigen::VectorXcd even = full + flipped(full, L);
      if (even.norm() > 0.5) {
        full = even;
      } else {
        full -= flipped(full, L);
      }
      full.normalize();
    }
  }
  fix_phase(full);
  return {full, energy, residual};
}

}  // namespace

ExactGroundState ground_state_exact(const ModelParams& p, std::optional<int> two_sz,
                                    const ExactOptions& opt) {
  check_exact_size(p, opt);
  const auto terms = build_xxz_terms(p);
  if (two_sz) {
    auto r = sector_ground(terms, p.L, *two_sz, opt);
    return {{p.L, std::move(r.full)}, r.energy, *two_sz, r.residual};
  }
  std::optional<ExactGroundState> best;
  // E(S^z) = E(-S^z) by spin-flip symmetry, so only S^z >= 0 is scanned.
  for (int q = p.L; q >= 0; q -= 2) {
    auto r = sector_ground(terms, p.L, q, opt);
    const double tol = opt.degeneracy_tol * std::max(1.0, std::abs(r.energy));
    if (!best || r.energy < best->energy - tol) {
      best = ExactGroundState{{p.L, std::move(r.full)}, r.energy, q, r.residual};
    }
  }
  return *best;
}

ExactGroundState initial_chain_state(const ModelParams& p, const ExactOptions& opt) {
  check_exact_size(p, opt);
  if (p.delta > -1.0) return ground_state_exact(p, std::nullopt, opt);

  const Eigen::Index dim = Eigen::Index{1} << p.L;
  const State all_up = static_cast<State>(dim - 1);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  int two_sz = 0;
  switch (opt.ferro_initial) {
    case FerroInitial::Up: v(all_up) = 1.0; two_sz = p.L; break;
    case FerroInitial::Down: v(0) = 1.0; two_sz = -p.L; break;
    case FerroInitial::Cat:
      v(all_up) = v(0) = 1.0 / std::sqrt(2.0);
      break;
  }
  FullSpaceOperator h(build_xxz_terms(p));
  return {{p.L, v}, h.expectation(v), two_sz, 0.0};
}

FullSpaceOperator::FullSpaceOperator(const OperatorTermList& terms)
    : matrix_(assemble(terms, SectorBasis::full(terms.length()))) {}

Eigen::VectorXcd FullSpaceOperator::apply(const Eigen::VectorXcd& v) const {
  return sparse_apply(matrix_, v);
}

double FullSpaceOperator::expectation(const Eigen::VectorXcd& v) const {
  return std::real(v.dot(apply(v))) / v.squaredNorm();
}

PropagationLog propagate_krylov(const OperatorTermList& h, DenseState& state, double dt,
                                int steps, const std::function<void(int, const DenseState&)>& observer,
                                const linalg::KrylovExpOptions& opt) {
  if (state.amplitudes.size() != (Eigen::Index{1} << h.length())) {
    throw ModelError("state dimension does not match the Hamiltonian");
  }
  const FullSpaceOperator op(h);
  PropagationLog log;
  const double n0 = state.norm();
  for (int k = 1; k <= steps; ++k) {
    linalg::KrylovExpInfo info;
    state.amplitudes = linalg::expm_krylov([&op](const Eigen::VectorXcd& v) { return op.apply(v); },
                                           state.amplitudes, dt, opt, &info);
    log.matvecs += info.matvecs;
    log.substeps += info.substeps;
    const double drift = std::abs(state.norm() - n0);
    log.max_norm_error = std::max(log.max_norm_error, drift);
    if (drift > 1e-10) {
      throw linalg::ConvergenceError("Krylov step " + std::to_string(k) + " lost unitarity", drift);
    }
    if (observer) observer(k, state);
  }
  return log;
}

CoherenceTrace coherence_exact(const ModelParams& p, const TimeGrid& grid, const ExactOptions& opt) {
  const auto g0 = initial_chain_state(p, opt);
  const FullSpaceOperator hp(build_branch_terms(p, BranchSign::Plus));
  const FullSpaceOperator hm(build_branch_terms(p, BranchSign::Minus));
  auto step = [&opt](const FullSpaceOperator& op, const Eigen::VectorXcd& v, double dt) {
    return linalg::expm_krylov([&op](const Eigen::VectorXcd& x) { return op.apply(x); }, v, dt,
                               opt.krylov);
  };

  CoherenceTrace tr;
  tr.backend = "exact";
  tr.params = p;
  tr.t = grid.times();
  tr.rho01.resize(grid.size());
  Eigen::VectorXcd plus = g0.state.amplitudes;
  Eigen::VectorXcd minus = g0.state.amplitudes;
  double max_norm_error = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      plus = step(hp, plus, grid.dt);
      minus = step(hm, minus, grid.dt);
      max_norm_error = std::max({max_norm_error, std::abs(plus.norm() - 1.0),
                                 std::abs(minus.norm() - 1.0)});
    }
    const double t = grid.t(k);
    tr.rho01[k] = 0.5 * std::exp(cplx(0.0, -p.h_z * t)) * minus.dot(plus);
  }
  tr.rho01[0] = 0.5;
  tr.meta["ground_energy"] = g0.energy;
  tr.meta["ground_two_sz"] = g0.two_sz;
  tr.meta["ferro_initial"] = p.delta <= -1.0 ? to_string(opt.ferro_initial) : "n/a";
  tr.meta["max_norm_error"] = max_norm_error;
  return tr;
}

namespace {

// Qubit is site L+1; its up state is |0> (sigma^z = +1).
Eigen::VectorXcd evolve_full_space(const ModelParams& p, const TimeGrid& grid, const ExactOptions& opt,
                                   const std::function<void(std::size_t, const Eigen::VectorXcd&)>& obs) {
  const auto g0 = initial_chain_state(p, opt);
  const int L = p.L;
  OperatorTermList h(L + 1);
  const auto chain = build_xxz_terms(p);
  for (const auto& t : chain.terms()) h.add(t.coefficient, t.ops);
  if (p.h_z != 0.0) h.add(p.h_z, {{L + 1, LocalOp::Sz}});
  if (p.g != 0.0) h.add(p.g, {{p.M(), LocalOp::Sz}, {L + 1, LocalOp::Sz}});
  const FullSpaceOperator op(h);

  const Eigen::Index chain_dim = Eigen::Index{1} << L;
  Eigen::VectorXcd psi(2 * chain_dim);
  psi.head(chain_dim) = g0.state.amplitudes / std::sqrt(2.0);  // qubit |1>
  psi.tail(chain_dim) = g0.state.amplitudes / std::sqrt(2.0);  // qubit |0>
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      psi = linalg::expm_krylov([&op](const Eigen::VectorXcd& x) { return op.apply(x); }, psi, grid.dt,
                                opt.krylov);
    }
    obs(k, psi);
  }
  return psi;
}

}  // namespace

CoherenceTrace coherence_full_space(const ModelParams& p, const TimeGrid& grid,
                                    const ExactOptions& opt) {
  check_exact_size(p, opt);
  CoherenceTrace tr;
  tr.backend = "exact-full-space";
  tr.params = p;
  tr.t = grid.times();
  tr.rho01.resize(grid.size());
  const Eigen::Index chain_dim = Eigen::Index{1} << p.L;
  evolve_full_space(p, grid, opt, [&](std::size_t k, const Eigen::VectorXcd& psi) {
    // rho01 = sum_c psi(0, c) conj(psi(1, c))
    tr.rho01[k] = psi.head(chain_dim).dot(psi.tail(chain_dim));
  });
  return tr;
}

std::vector<std::pair<double, double>> qubit_populations_full_space(const ModelParams& p,
                                                                    const TimeGrid& grid,
                                                                    const ExactOptions& opt) {
  check_exact_size(p, opt);
  std::vector<std::pair<double, double>> out(grid.size());
  const Eigen::Index chain_dim = Eigen::Index{1} << p.L;
  evolve_full_space(p, grid, opt, [&](std::size_t k, const Eigen::VectorXcd& psi) {
    out[k] = {psi.tail(chain_dim).squaredNorm(), psi.head(chain_dim).squaredNorm()};
  });
  return out;
}

CorrelationTrace correlation_exact(const ModelParams& p, const TimeGrid& grid,
                                   const ExactOptions& opt) {
  const auto g0 = initial_chain_state(p, opt);
  const FullSpaceOperator hs(build_xxz_terms(p));
  const FullSpaceOperator sz(build_sz_terms(p.L, p.M()));
  const Eigen::VectorXcd phi0 = sz.apply(g0.state.amplitudes);
  Eigen::VectorXcd phi = phi0;

  CorrelationTrace tr;
  tr.backend = "exact";
  tr.t = grid.times();
  tr.c.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      phi = linalg::expm_krylov([&hs](const Eigen::VectorXcd& x) { return hs.apply(x); }, phi, grid.dt,
                                opt.krylov);
    }
    tr.c[k] = std::exp(cplx(0.0, g0.energy * grid.t(k))) * phi0.dot(phi);
  }
  tr.meta["ground_energy"] = g0.energy;
  tr.meta["ground_two_sz"] = g0.two_sz;
  return tr;
}

double entanglement_entropy(const DenseState& s, int cut) {
  if (cut < 0 || cut > s.L) throw ModelError("entropy cut outside [0, L]");
  const Eigen::Index left = Eigen::Index{1} << cut;
  const Eigen::Index right = Eigen::Index{1} << (s.L - cut);
  // Bit i is site i+1, so the low `cut` bits index the left block (column-major reshape).
  const Eigen::Map<const Eigen::MatrixXcd> psi(s.amplitudes.data(), left, right);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(psi);
  const Eigen::VectorXd sv = svd.singularValues();
  const double norm2 = sv.squaredNorm();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double w = sv(i) * sv(i) / norm2;
    if (w > 1e-300) entropy -= w * std::log(w);
  }
  return entropy;
}

Eigen::MatrixXd dense_matrix(const OperatorTermList& terms) {
  return Eigen::MatrixXd(assemble(terms, SectorBasis::full(terms.length())));
}

cplx flip_overlap(const DenseState& a, const DenseState& b) {
  return a.amplitudes.dot(flipped(b.amplitudes, b.L));
}

}  // namespace spinprobe::ed
