// exact.hpp: brute-force backend for small chains (L <= 14 by default).
//
// Pure dephasing means the qubit never needs to be simulated: the chain state
// is propagated under the two conditional Hamiltonians H_+ and H_- and the
// coherence is their overlap. The qubit-chain product space is kept only as a
// cross-check (coherence_full_space).

#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinprobe/ed/basis.hpp"
#include "spinprobe/linalg/krylov.hpp"
#include "spinprobe/model.hpp"
#include "spinprobe/traces.hpp"

namespace spinprobe::ed {

struct ExactOptions {
  int max_L{14};
  int dense_max_L{10};  // dense diagonalization up to here, Lanczos above
  linalg::LanczosOptions lanczos{};
  linalg::KrylovExpOptions krylov{};
  unsigned seed{20240611};
  double degeneracy_tol{1e-10};
  FerroInitial ferro_initial{FerroInitial::Cat};
};

/// Amplitudes over the full 2^L computational basis.
struct DenseState {
  int L{0};
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

struct ExactGroundState {
  DenseState state;
  double energy{0.0};
  int two_sz{0};
  double residual{0.0};
};

/// Lowest eigenpair of H_S. With `two_sz` the search is restricted to that
/// sector, otherwise every sector is scanned (ties keep the larger S^z). In the
/// S^z = 0 sector a degenerate ground space is resolved to a spin-flip eigenstate,
/// preferring the even one.
ExactGroundState ground_state_exact(const ModelParams& p, std::optional<int> two_sz = std::nullopt,
                                    const ExactOptions& opt = {});

/// Initial chain state of the coherence experiments: the ground state for
/// delta > -1, otherwise the polarized state(s) selected by opt.ferro_initial.
ExactGroundState initial_chain_state(const ModelParams& p, const ExactOptions& opt = {});

/// Sparse Hermitian operator on the full 2^L space acting on complex vectors.
class FullSpaceOperator {
 public:
  FullSpaceOperator(const OperatorTermList& terms);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  double expectation(const Eigen::VectorXcd& v) const;
  Eigen::Index dim() const { return matrix_.rows(); }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return matrix_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
};

struct PropagationLog {
  int matvecs{0};
  int substeps{0};
  double max_norm_error{0.0};
};

/// Applies exp(-i H dt) `steps` times; the observer sees the state after each
/// step (step index 1..steps). Throws when a step loses unitarity beyond 1e-10.
PropagationLog propagate_krylov(
    const OperatorTermList& h, DenseState& state, double dt, int steps,
    const std::function<void(int, const DenseState&)>& observer = {},
    const linalg::KrylovExpOptions& opt = {});

/// rho01(t) = 1/2 e^{-i h_z t} <G| e^{i H_- t} e^{-i H_+ t} |G>.
CoherenceTrace coherence_exact(const ModelParams& p, const TimeGrid& grid,
                               const ExactOptions& opt = {});

/// Same quantity from the (L+1)-spin qubit + chain evolution; test oracle.
CoherenceTrace coherence_full_space(const ModelParams& p, const TimeGrid& grid,
                                    const ExactOptions& opt = {});

/// Qubit populations rho00(t), rho11(t) from the qubit + chain evolution.
std::vector<std::pair<double, double>> qubit_populations_full_space(
    const ModelParams& p, const TimeGrid& grid, const ExactOptions& opt = {});

/// C(t) = e^{i E0 t} <G| S^z_M e^{-i H_S t} S^z_M |G>.
CorrelationTrace correlation_exact(const ModelParams& p, const TimeGrid& grid,
                                   const ExactOptions& opt = {});

/// Von Neumann entropy (natural log) of sites 1..cut.
double entanglement_entropy(const DenseState& s, int cut);

/// Dense matrix of `terms` on the full space (small L only).
Eigen::MatrixXd dense_matrix(const OperatorTermList& terms);

/// <a| F |b> with F the global spin flip.
cplx flip_overlap(const DenseState& a, const DenseState& b);

}  // namespace spinprobe::ed
