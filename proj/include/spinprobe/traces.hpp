// traces.hpp: sampled time series produced by the backends.

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinprobe/model.hpp"

namespace spinprobe {

using cplx = std::complex<double>;

/// Uniform grid t_k = k * dt, k = 0..steps.
struct TimeGrid {
  double dt{0.05};
  std::size_t steps{0};

  static TimeGrid up_to(double t_max, double dt);

  std::size_t size() const { return steps + 1; }
  double t(std::size_t k) const { return static_cast<double>(k) * dt; }
  double t_max() const { return t(steps); }
  std::vector<double> times() const;
};

/// Spacing of a uniform grid starting at t = 0; throws std::invalid_argument otherwise.
double uniform_spacing(const std::vector<double>& t, double rel_tol = 1e-9);

/// rho01(t) samples. `meta` carries backend diagnostics (discarded weight,
/// initial-state choice, prefactor selection, ...).
struct CoherenceTrace {
  std::string backend;
  ModelParams params;
  std::vector<double> t;
  std::vector<cplx> rho01;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const { return t.size(); }
};

/// C(t) = <S^z_M(t) S^z_M(0)> samples on t >= 0.
struct CorrelationTrace {
  std::string backend;
  std::vector<double> t;
  std::vector<cplx> c;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t size() const { return t.size(); }
};

}  // namespace spinprobe
