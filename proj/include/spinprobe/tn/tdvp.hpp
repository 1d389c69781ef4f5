// tdvp.hpp: real-time evolution by the time-dependent variational principle.
//
// Second-order symmetric sweeps. In auto mode the two-site integrator is used
// (so bonds can grow) until the largest bond reaches chi_max, after which the
// one-site integrator takes over for the rest of the run.

#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinprobe/linalg/krylov.hpp"
#include "spinprobe/tn/mpo.hpp"
#include "spinprobe/tn/mps.hpp"

namespace spinprobe::tn {

enum class TdvpMode { Auto, OneSite, TwoSite };

const char* to_string(TdvpMode m);
TdvpMode tdvp_mode_from_string(const std::string& s);

struct TdvpConfig {
  double dt{0.05};
  int chi_max{128};
  double cutoff{1e-10};
  TdvpMode mode{TdvpMode::Auto};
  linalg::KrylovExpOptions krylov{20, 1e-12, 16};
  double max_norm_drift{1e-8};  // per step, before renormalization
};

class TdvpError : public std::runtime_error {
 public:
  TdvpError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct TdvpStepInfo {
  double discarded{0.0};
  double norm_drift{0.0};
  double energy{0.0};
  bool two_site{false};
  int max_bond{0};
  int matvecs{0};
};

class TdvpEngine {
 public:
  TdvpEngine(MPS psi, MPO h, TdvpConfig cfg);
  ~TdvpEngine();
  TdvpEngine(TdvpEngine&&) noexcept;
  TdvpEngine& operator=(TdvpEngine&&) noexcept;

  /// Advances the state by cfg.dt.
  void step();

  const MPS& state() const { return psi_; }
  double time() const { return time_; }
  int steps() const { return static_cast<int>(log_.size()); }
  const std::vector<TdvpStepInfo>& log() const { return log_; }
  /// <H> after the last step (initial value before any step).
  double energy() const { return energy_; }
  bool using_two_site() const;

 private:
  struct Impl;
  MPS psi_;
  MPO h_;
  TdvpConfig cfg_;
  double time_{0.0};
  double energy_{0.0};
  bool saturated_{false};
  std::vector<TdvpStepInfo> log_;
  std::unique_ptr<Impl> impl_;
};

/// Evolves `psi` under `h` for `steps` steps of cfg.dt; the observer sees the
/// state after every step (index 1..steps).
std::vector<TdvpStepInfo> tdvp_evolve(MPS& psi, const MPO& h, const TdvpConfig& cfg, int steps,
                                      const std::function<void(int, const MPS&)>& observer = {});

}  // namespace spinprobe::tn
