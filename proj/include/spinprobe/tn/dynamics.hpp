// dynamics.hpp: qubit coherence and two-time correlators from MPS/TDVP.

#pragma once

#include <vector>

#include "spinprobe/model.hpp"
#include "spinprobe/tn/dmrg.hpp"
#include "spinprobe/tn/tdvp.hpp"
#include "spinprobe/traces.hpp"

namespace spinprobe::tn {

struct TnConfig {
  DmrgConfig dmrg{};
  TdvpConfig tdvp{};
  /// Evolve only H_+ when the initial state is a spin-flip eigenstate; the H_-
  /// branch is then the flipped trajectory.
  bool flip_symmetry{true};
  FerroInitial ferro_initial{FerroInitial::Cat};
};

/// One term of the initial chain state; components live in distinct
/// magnetization sectors, so they never interfere.
struct InitialComponent {
  double weight{1.0};  // |amplitude|^2
  MPS state;
  double energy{0.0};
  /// <F> of the component (+-1 for a flip eigenstate, 0 otherwise).
  double flip_parity{0.0};
};

struct TnInitialState {
  std::vector<InitialComponent> components;
  nlohmann::json meta = nlohmann::json::object();
};

/// DMRG ground state for delta > -1; polarized product state(s) selected by
/// cfg.ferro_initial otherwise.
TnInitialState prepare_initial_state(const ModelParams& p, const TnConfig& cfg);

/// rho01(t) = 1/2 e^{-i h_z t} <psi_-(t)|psi_+(t)> with both branches evolved by TDVP.
CoherenceTrace coherence_tdvp(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid);
CoherenceTrace coherence_tdvp(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid,
                              const TnInitialState& init);

/// C(t) = e^{i E0 t} <G| S^z_M e^{-i H_S t} S^z_M |G>, evolving 2 S^z_M |G> (unit norm).
CorrelationTrace two_time_correlation_mps(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid);
CorrelationTrace two_time_correlation_mps(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid,
                                          const TnInitialState& init);

/// Number of TDVP steps per sample; throws unless grid.dt is a multiple of dt.
int substeps_per_sample(const TimeGrid& grid, double dt);

}  // namespace spinprobe::tn
