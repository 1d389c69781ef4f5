// basis.hpp: computational-basis enumerations for the exact backend.
//
// Bit i of a basis state is site i+1; a set bit is spin up.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "spinprobe/model.hpp"

namespace spinprobe::ed {

using State = std::uint32_t;

/// Either the full 2^L space or the fixed-magnetization sector with `n_up` up spins.
class SectorBasis {
 public:
  static SectorBasis full(int L);
  static SectorBasis with_up_count(int L, int n_up);
  /// Sector with total 2 S^z = two_sz.
  static SectorBasis with_two_sz(int L, int two_sz);

  int length() const { return L_; }
  std::optional<int> up_count() const { return n_up_; }
  /// Total S^z of the sector (requires a fixed sector).
  double sz_total() const;

  std::size_t size() const { return states_.size(); }
  State state(std::size_t i) const { return states_[i]; }
  const std::vector<State>& states() const { return states_; }

  /// Index of `s`, or -1 when not in the basis.
  std::ptrdiff_t find(State s) const;

 private:
  int L_{0};
  std::optional<int> n_up_;
  std::vector<State> states_;  // ascending
};

/// Sparse real matrix of `terms` on `basis`. Terms that leave the basis throw ModelError.
Eigen::SparseMatrix<double, Eigen::RowMajor> assemble(const OperatorTermList& terms,
                                                       const SectorBasis& basis);

/// Global spin flip of a basis state (all L bits inverted).
State flip_state(State s, int L);

}  // namespace spinprobe::ed
