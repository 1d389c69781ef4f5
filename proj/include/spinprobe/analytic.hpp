// analytic.hpp: closed-form references at delta = 0 (free fermions) and delta -> +-inf.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spinprobe/traces.hpp"

namespace spinprobe::analytic {

/// Which of the two zero-energy momenta (k = pi/2, 3pi/2) is filled when
/// L is a multiple of 4.
enum class ZeroModeFill { LowerMomentum, UpperMomentum };

struct PbcOptions {
  /// Prefactor c of the pair sum; c = 1 gives C(0) = <(S^z_M)^2> = 1/4.
  /// c = 4 is kept for comparison.
  double prefactor{1.0};
  /// eps(k) = dispersion_scale * J * cos k. The XX chain written with spin
  /// operators hops with amplitude J/2, hence scale 1; 0.25 is the alternative.
  double dispersion_scale{1.0};
  ZeroModeFill zero_mode{ZeroModeFill::LowerMomentum};
};

/// Periodic momenta k = 2 pi n / L, n = 1..L, with the half-filled Fermi sea.
struct FermionSpectrum {
  int L{0};
  std::vector<double> k;
  std::vector<double> eps;
  std::vector<bool> occupied;
  int zero_modes{0};
  ZeroModeFill zero_mode{ZeroModeFill::LowerMomentum};

  int occupied_count() const;
};

FermionSpectrum fermion_spectrum_pbc(int L, double J, const PbcOptions& opt = {});

/// Free-fermion coherence on the periodic chain from the closed-form double
/// time integral of the pair sum. Degenerate pairs use the limit -t^2/2.
CoherenceTrace free_fermion_coherence_pbc(int L, double J, double g, const TimeGrid& grid,
                                          const PbcOptions& opt = {});

/// The periodic-chain correlator C(t) = (c/L^2) sum_{k' occ, k unocc} e^{i(eps_k' - eps_k) t}
/// that drives the coherence above.
CorrelationTrace free_fermion_correlation_pbc(int L, double J, const TimeGrid& grid, const PbcOptions& opt = {});

/// Single-particle eigenpairs of the open chain hopping matrix (J/2 on each bond),
/// optionally with an on-site potential v at 1-based `site`.
struct OrbitalSet {
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXd orbitals;   // columns
};
OrbitalSet open_chain_orbitals(int L, double J, int site = 0, double v = 0.0);

/// Ground-state energy of the open XX chain: sum of negative orbital energies.
double free_fermion_energy_obc(int L, double J);

/// Entanglement entropy (natural log) of sites 1..cut in the open-chain Fermi sea,
/// from the eigenvalues of the restricted correlation matrix.
double free_fermion_entropy_obc(int L, double J, int cut);

/// C(t) on the open chain at 1-based site M (default L/2).
CorrelationTrace free_fermion_correlation_obc(int L, double J, const TimeGrid& grid, int M = 0);

/// Exact delta = 0 coherence on the open chain as an N x N determinant per sample.
CoherenceTrace determinant_coherence_delta0(const ModelParams& p, const TimeGrid& grid);

struct IsingAmplitudes {
  cplx alpha{1.0 / 1.4142135623730951};
  cplx beta{1.0 / 1.4142135623730951};
};

/// rho01(t) = rho0 (|alpha|^2 e^{-i g t/2} + |beta|^2 e^{+i g t/2}).
CoherenceTrace ising_coherence(const IsingAmplitudes& amps, double g, const TimeGrid& grid, cplx rho0 = 0.5);

/// u_s = J pi sqrt(1 - delta^2) / (2 arccos delta); J pi / 2 at delta = 1.
/// Throws std::domain_error outside (-1, 1].
double spinon_velocity(double J, double delta);

}  // namespace spinprobe::analytic
