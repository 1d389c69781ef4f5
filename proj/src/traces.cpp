#include "spinprobe/traces.hpp"

#include <cmath>
#include <stdexcept>

namespace spinprobe {

TimeGrid TimeGrid::up_to(double t_max, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  const double n = std::round(t_max / dt);
  return {dt, static_cast<std::size_t>(n)};
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = t(k);
  return out;
}

double uniform_spacing(const std::vector<double>& t, double rel_tol) {
  if (t.size() < 2) throw std::invalid_argument("time grid needs at least two samples");
  if (std::abs(t.front()) > 1e-12) throw std::invalid_argument("time grid must start at t = 0");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw std::invalid_argument("time grid must be increasing");
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > rel_tol * dt + 1e-14) {
      throw std::invalid_argument("time grid is not uniform");
    }
  }
  return dt;
}

}  // namespace spinprobe
