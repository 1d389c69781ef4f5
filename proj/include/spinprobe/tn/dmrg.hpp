// dmrg.hpp: two-site DMRG ground-state search.

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "spinprobe/linalg/krylov.hpp"
#include "spinprobe/model.hpp"
#include "spinprobe/tn/mpo.hpp"
#include "spinprobe/tn/mps.hpp"

namespace spinprobe::tn {

struct DmrgConfig {
  int chi_max{128};
  double cutoff{1e-10};
  int max_sweeps{40};
  int min_sweeps{4};
  double energy_tol{1e-11};         // relative energy change between sweeps
  std::vector<int> chi_ramp{16, 32, 64};  // bond caps of the first sweeps (clipped to chi_max)
  int init_sector_dim{4};
  unsigned seed{20240611};
  linalg::LanczosOptions lanczos{12, 4, 1e-12, false};
  double degeneracy_tol{1e-8};      // flip-even preference window, relative energy
};

class DmrgError : public std::runtime_error {
 public:
  DmrgError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& energy_history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct DmrgResult {
  MPS state;
  double energy{0.0};
  int two_sz{0};
  int sweeps{0};
  std::vector<double> energy_history;
  double max_discarded{0.0};
  /// <G|F|G> with F the global spin flip (0 outside the S^z = 0 sector).
  double flip_parity{0.0};
  bool symmetrized{false};
};

/// Sweeps two-site DMRG from `init` until the energy change per sweep drops
/// below cfg.energy_tol; throws DmrgError with the history otherwise.
DmrgResult dmrg(const MPO& h, MPS init, const DmrgConfig& cfg);

/// Ground state of H_S. Without `two_sz` the sector is +L (all up) for
/// delta <= -1 and 0 otherwise. In the S^z = 0 sector a state that is not a
/// spin-flip eigenstate is replaced by the lower of its even / odd parts
/// (even within cfg.degeneracy_tol).
DmrgResult dmrg_ground_state(const ModelParams& p, const DmrgConfig& cfg,
                             std::optional<int> two_sz = std::nullopt);

}  // namespace spinprobe::tn
