#include "spinprobe/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinprobe::analytic {

namespace {

constexpr double zero_tol = 1e-12;

void check_chain(int L, double J) {
  if (L < 2 || L % 2 != 0) throw ModelError("free-fermion formulas need an even L >= 2");
  if (!(J > 0.0)) throw ModelError("J must be positive");
}

const char* to_string(ZeroModeFill z) { return z == ZeroModeFill::LowerMomentum ? "lower_momentum" : "upper_momentum"; }

nlohmann::json pbc_meta(const FermionSpectrum& s, const PbcOptions& opt) {
  return {{"prefactor", opt.prefactor},
          {"dispersion_scale", opt.dispersion_scale},
          {"zero_mode_fill", to_string(opt.zero_mode)},
          {"zero_modes", s.zero_modes},
          {"c0", opt.prefactor * 0.25}};
}

// Distinct (eps_occ - eps_unocc) differences with multiplicities.
std::vector<std::pair<double, int>> pair_frequencies(const FermionSpectrum& s) {
  std::vector<std::pair<double, int>> out;
  for (int a = 0; a < s.L; ++a) {
    if (!s.occupied[a]) continue;
    for (int b = 0; b < s.L; ++b) {
      if (s.occupied[b]) continue;
      const double w = s.eps[a] - s.eps[b];
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return std::abs(e.first - w) <= zero_tol; });
      if (it == out.end()) out.emplace_back(w, 1);
      else ++it->second;
    }
  }
  return out;
}

}  // namespace

int FermionSpectrum::occupied_count() const { return static_cast<int>(std::count(occupied.begin(), occupied.end(), true)); }

FermionSpectrum fermion_spectrum_pbc(int L, double J, const PbcOptions& opt) {
  check_chain(L, J);
  FermionSpectrum s;
  s.L = L;
  s.zero_mode = opt.zero_mode;
  s.k.resize(L);
  s.eps.resize(L);
  s.occupied.assign(L, false);
  std::vector<int> zeros;
  for (int n = 1; n <= L; ++n) {
    const double k = 2.0 * std::numbers::pi * n / L;
    const double c = std::cos(k);
    s.k[n - 1] = k;
    s.eps[n - 1] = std::abs(c) < zero_tol ? 0.0 : opt.dispersion_scale * J * c;
    if (s.eps[n - 1] == 0.0) zeros.push_back(n - 1);
    else s.occupied[n - 1] = s.eps[n - 1] < 0.0;
  }
  s.zero_modes = static_cast<int>(zeros.size());
  if (s.zero_modes == 2) s.occupied[opt.zero_mode == ZeroModeFill::LowerMomentum ? zeros[0] : zeros[1]] = true;
  if (s.occupied_count() != L / 2) throw std::logic_error("Fermi sea is not half filled");
  return s;
}

CorrelationTrace free_fermion_correlation_pbc(int L, double J, const TimeGrid& grid, const PbcOptions& opt) {
  const auto s = fermion_spectrum_pbc(L, J, opt);
  const auto freqs = pair_frequencies(s);
  CorrelationTrace tr;
  tr.backend = "analytic-pbc";
  tr.t = grid.times();
  tr.c.assign(grid.size(), cplx(0.0));
  const double norm = opt.prefactor / (static_cast<double>(L) * L);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cplx sum = 0.0;
    for (const auto& [w, m] : freqs) sum += static_cast<double>(m) * std::exp(cplx(0.0, w * tr.t[i]));
    tr.c[i] = norm * sum;
  }
  tr.meta = pbc_meta(s, opt);
  return tr;
}

CoherenceTrace free_fermion_coherence_pbc(int L, double J, double g, const TimeGrid& grid, const PbcOptions& opt) {
  const auto s = fermion_spectrum_pbc(L, J, opt);
  const auto freqs = pair_frequencies(s);
  CoherenceTrace tr;
  tr.backend = "analytic-pbc";
  tr.params.L = L;
  tr.params.J = J;
  tr.params.g = g;
  tr.t = grid.times();
  tr.rho01.resize(grid.size());
  const double norm = opt.prefactor * g * g / (static_cast<double>(L) * L);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = tr.t[i];
    double e = 0.0;
    for (const auto& [w, m] : freqs) {
      const double bracket = std::abs(w) <= zero_tol ? -0.5 * t * t : (std::cos(w * t) - 1.0) / (w * w);
      e += m * bracket;
    }
    tr.rho01[i] = 0.5 * std::exp(norm * e);
  }
  tr.meta = pbc_meta(s, opt);
  return tr;
}

OrbitalSet open_chain_orbitals(int L, double J, int site, double v) {
  check_chain(L, J);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i + 1 < L; ++i) h(i, i + 1) = h(i + 1, i) = 0.5 * J;
  if (site != 0) {
    if (site < 1 || site > L) throw ModelError("on-site potential outside the chain");
    h(site - 1, site - 1) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

double free_fermion_energy_obc(int L, double J) {
  const auto o = open_chain_orbitals(L, J);
  double e = 0.0;
  for (Eigen::Index a = 0; a < o.energies.size(); ++a) e += std::min(0.0, o.energies(a));
  return e;
}

double free_fermion_entropy_obc(int L, double J, int cut) {
  if (cut < 0 || cut > L) throw ModelError("entropy cut outside the chain");
  const auto o = open_chain_orbitals(L, J);
  const Eigen::MatrixXd phi = o.orbitals.leftCols(L / 2);
  const Eigen::MatrixXd c = phi.topRows(cut) * phi.topRows(cut).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double nu = std::clamp(es.eigenvalues()(i), 0.0, 1.0);
    if (nu > 1e-15) s -= nu * std::log(nu);
    if (nu < 1.0 - 1e-15) s -= (1.0 - nu) * std::log(1.0 - nu);
  }
  return s;
}

CorrelationTrace free_fermion_correlation_obc(int L, double J, const TimeGrid& grid, int M) {
  const auto o = open_chain_orbitals(L, J);
  const int m = (M == 0 ? L / 2 : M) - 1;
  if (m < 0 || m >= L) throw ModelError("coupled site outside the chain");
  const int n = L / 2;
  CorrelationTrace tr;
  tr.backend = "analytic-obc";
  tr.t = grid.times();
  tr.c.assign(grid.size(), cplx(0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cplx occ = 0.0, emp = 0.0;
    for (int a = 0; a < L; ++a) {
      const double w = o.orbitals(m, a) * o.orbitals(m, a);
      const cplx ph = std::exp(cplx(0.0, o.energies(a) * tr.t[i]));
      if (a < n) occ += w * ph;
      else emp += w * std::conj(ph);
    }
    tr.c[i] = occ * emp;
  }
  tr.meta = {{"site", m + 1}, {"filling", n}};
  return tr;
}

CoherenceTrace determinant_coherence_delta0(const ModelParams& p, const TimeGrid& grid) {
  validate(p);
  if (p.delta != 0.0) throw ModelError("determinant coherence requires delta = 0");
  const int L = p.L, n = L / 2, M = p.M();
  const auto g0 = open_chain_orbitals(L, p.J);
  const auto plus = open_chain_orbitals(L, p.J, M, 0.5 * p.g);
  const auto minus = open_chain_orbitals(L, p.J, M, -0.5 * p.g);
  const Eigen::MatrixXcd phi = g0.orbitals.leftCols(n).cast<cplx>();
  const Eigen::MatrixXcd x = phi.transpose() * minus.orbitals.cast<cplx>();
  const Eigen::MatrixXcd o = (minus.orbitals.transpose() * plus.orbitals).cast<cplx>();
  const Eigen::MatrixXcd y = plus.orbitals.transpose().cast<cplx>() * phi;

  CoherenceTrace tr;
  tr.backend = "analytic-obc-det";
  tr.params = p;
  tr.t = grid.times();
  tr.rho01.resize(grid.size());
  double min_det = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = tr.t[i];
    Eigen::VectorXcd dm(L), dp(L);
    for (int a = 0; a < L; ++a) {
      dm(a) = std::exp(cplx(0.0, minus.energies(a) * t));
      dp(a) = std::exp(cplx(0.0, -plus.energies(a) * t));
    }
    const Eigen::MatrixXcd m = (x * dm.asDiagonal()) * o * (dp.asDiagonal() * y);
    const cplx det = m.partialPivLu().determinant();
    min_det = std::min(min_det, std::abs(det));
    // S^z_M = n_M - 1/2: the offset contributes the scalar phase e^{i g t/2}.
    tr.rho01[i] = 0.5 * std::exp(cplx(0.0, (0.5 * p.g - p.h_z) * t)) * det;
  }
  tr.rho01[0] = 0.5;
  tr.meta = {{"filling", n}, {"min_abs_det", min_det}};
  if (min_det < 1e-14) tr.meta["warning"] = "determinant below 1e-14; phase may be ill-conditioned";
  return tr;
}

CoherenceTrace ising_coherence(const IsingAmplitudes& amps, double g, const TimeGrid& grid, cplx rho0) {
  const double wa = std::norm(amps.alpha), wb = std::norm(amps.beta);
  if (std::abs(wa + wb - 1.0) > 1e-12) throw std::invalid_argument("Ising amplitudes must be normalized");
  CoherenceTrace tr;
  tr.backend = "ising";
  tr.params.g = g;
  tr.t = grid.times();
  tr.rho01.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ph = 0.5 * g * tr.t[i];
    tr.rho01[i] = rho0 * (wa * std::exp(cplx(0.0, -ph)) + wb * std::exp(cplx(0.0, ph)));
  }
  tr.meta = {{"alpha_sq", wa}, {"beta_sq", wb}};
  return tr;
}

double spinon_velocity(double J, double delta) {
  if (!(delta > -1.0 && delta <= 1.0)) throw std::domain_error("spinon velocity is defined for -1 < delta <= 1");
  if (delta == 1.0) return J * std::numbers::pi / 2.0;
  return J * std::numbers::pi * std::sqrt(1.0 - delta * delta) / (2.0 * std::acos(delta));
}

}  // namespace spinprobe::analytic
