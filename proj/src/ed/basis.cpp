#include "spinprobe/ed/basis.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace spinprobe::ed {

namespace {

void check_length(int L) {
  if (L < 1 || L > 24) throw ModelError("exact basis supports 1 <= L <= 24, got " + std::to_string(L));
}

}  // namespace

SectorBasis SectorBasis::full(int L) {
  check_length(L);
  SectorBasis b;
  b.L_ = L;
  b.states_.resize(std::size_t{1} << L);
  for (std::size_t s = 0; s < b.states_.size(); ++s) b.states_[s] = static_cast<State>(s);
  return b;
}

SectorBasis SectorBasis::with_up_count(int L, int n_up) {
  check_length(L);
  if (n_up < 0 || n_up > L) throw ModelError("up-spin count outside [0, L]");
  SectorBasis b;
  b.L_ = L;
  b.n_up_ = n_up;
  const State end = State{1} << L;
  for (State s = 0; s < end; ++s) {
    if (std::popcount(s) == n_up) b.states_.push_back(s);
  }
  return b;
}

SectorBasis SectorBasis::with_two_sz(int L, int two_sz) {
  if ((two_sz + L) % 2 != 0 || std::abs(two_sz) > L) {
    throw ModelError("2 S^z = " + std::to_string(two_sz) + " not reachable with L = " +
                     std::to_string(L));
  }
  return with_up_count(L, (L + two_sz) / 2);
}

double SectorBasis::sz_total() const {
  if (!n_up_) throw ModelError("full basis has no fixed S^z");
  return 0.5 * (2 * *n_up_ - L_);
}

std::ptrdiff_t SectorBasis::find(State s) const {
  if (!n_up_) return s < states_.size() ? static_cast<std::ptrdiff_t>(s) : -1;
  auto it = std::lower_bound(states_.begin(), states_.end(), s);
  if (it == states_.end() || *it != s) return -1;
  return it - states_.begin();
}

State flip_state(State s, int L) { return ~s & ((State{1} << L) - 1); }

namespace {

// Applies one local operator to bit `bit` of s; returns false when annihilated.
bool apply_local(LocalOp op, int bit, State& s, double& amp) {
  const State mask = State{1} << bit;
  const bool up = (s & mask) != 0;
  switch (op) {
    case LocalOp::Id: return true;
    case LocalOp::Sz: amp *= up ? 0.5 : -0.5; return true;
    case LocalOp::SPlus:
      if (up) return false;
      s |= mask;
      return true;
    case LocalOp::SMinus:
      if (!up) return false;
      s &= ~mask;
      return true;
  }
  return false;
}

}  // namespace

Eigen::SparseMatrix<double, Eigen::RowMajor> assemble(const OperatorTermList& terms,
                                                       const SectorBasis& basis) {
  if (terms.length() != basis.length()) throw ModelError("term list and basis lengths differ");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.size() * (terms.size() / 2 + 1));
  for (std::size_t col = 0; col < basis.size(); ++col) {
    for (const auto& term : terms.terms()) {
      State s = basis.state(col);
      double amp = term.coefficient;
      bool alive = true;
      // Rightmost operator acts first; sites are distinct so order is immaterial.
      for (auto it = term.ops.rbegin(); it != term.ops.rend() && alive; ++it) {
        alive = apply_local(it->op, it->site - 1, s, amp);
      }
      if (!alive || amp == 0.0) continue;
      const auto row = basis.find(s);
      if (row < 0) throw ModelError("operator term leaves the basis sector");
      trip.emplace_back(static_cast<int>(row), static_cast<int>(col), amp);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> h(basis.size(), basis.size());
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return h;
}

}  // namespace spinprobe::ed
