// mps.hpp: open-boundary matrix product states with U(1) charge conservation.
//
// Site i (0-based) holds A^p for p = up, down, mapping bond i to bond i+1.
// Bond b carries the total charge of sites 0..b-1: bond 0 is {0}, bond L is
// {total charge}. The canonical center is a site index; sites left of it are
// left-orthonormal and sites right of it right-orthonormal.

#pragma once

#include <array>
#include <utility>
#include <vector>

#include "spinprobe/model.hpp"
#include "spinprobe/tn/block.hpp"

namespace spinprobe::tn {

using SiteTensor = std::array<BlockMatrix, 2>;
/// Two-site tensor, index 2 * p1 + p2.
using TwoSiteTensor = std::array<BlockMatrix, 4>;

struct Truncation {
  int chi_max{128};
  double cutoff{1e-10};  // discarded weight relative to the kept norm
};

struct SplitResult {
  SiteTensor left;
  SiteTensor right;
  double discarded{0.0};
};

class MPS {
 public:
  MPS() = default;
  explicit MPS(std::vector<SiteTensor> sites, int center = 0);

  /// Product state; phys[i] is 0 (up) or 1 (down).
  static MPS product(const std::vector<int>& phys);
  /// Random real MPS in the sector of total 2 S^z = two_sz, right-canonical and
  /// normalized; every sector of every bond gets up to `sector_dim` states.
  static MPS random(int L, int two_sz, int sector_dim, unsigned seed);
  /// Exact MPS of a 2^L amplitude vector (ED bit convention: bit i is site i+1,
  /// set bit is up). The vector must lie in one magnetization sector.
  static MPS from_dense(const Eigen::VectorXcd& amplitudes, int L);

  int length() const { return static_cast<int>(sites_.size()); }
  int total_charge() const;
  const SiteTensor& site(int i) const { return sites_[i]; }
  SiteTensor& site(int i) { return sites_[i]; }

  /// Bond b in 0..L.
  const BondSpace& bond(int b) const;
  std::vector<int> bond_dims() const;
  int max_bond_dim() const;

  int center() const { return center_; }
  /// Declares the canonical center without touching tensors (caller guarantees it).
  void set_center(int c) { center_ = c; }
  /// Moves the center by exact QR / LQ steps.
  void move_center(int target);
  /// Brings every tensor into mixed canonical form around `c`.
  void canonicalize(int c);

  double norm() const;
  /// Normalizes the center tensor (assumes canonical form).
  void normalize();

  /// Schmidt values across bond b (1 <= b < L); moves the center.
  std::vector<double> schmidt_values(int b);
  /// Von Neumann entropy, natural log, across bond b.
  double entanglement_entropy(int b);

  /// Global spin flip: up <-> down, all charges negated.
  MPS flipped() const;
  Eigen::VectorXcd to_dense() const;

  double left_orthonormality_error(int i) const;
  double right_orthonormality_error(int i) const;
  /// Largest orthonormality defect of all sites relative to the center.
  double canonical_error() const;

  /// Discarded weight per step or sweep, appended by the algorithms.
  std::vector<double> truncation_log;

 private:
  std::vector<SiteTensor> sites_;
  int center_{0};
};

/// <bra|ket> by transfer-matrix contraction.
cplx overlap(const MPS& bra, const MPS& ket);

/// ca |a> + cb |b> as an uncompressed direct sum (same total charge required).
MPS add(const MPS& a, const MPS& b, cplx ca = 1.0, cplx cb = 1.0);

/// SVD compression sweep; returns the summed discarded weight. Leaves the
/// center at site 0 and the norm as it was before truncation.
double compress(MPS& psi, const Truncation& trunc);

/// Applies a charge-neutral local operator (Sz or Id) at 1-based `site`.
void apply_local(MPS& psi, int site, LocalOp op);

// Decompositions shared by the sweep algorithms.

/// A = Q R with Q left-orthonormal; R maps the new bond to the old right bond.
std::pair<SiteTensor, BlockMatrix> left_qr(const SiteTensor& a);
/// A = L Q with Q right-orthonormal; L maps the old left bond to the new bond.
std::pair<BlockMatrix, SiteTensor> right_lq(const SiteTensor& a);
SiteTensor absorb_left(const BlockMatrix& r, const SiteTensor& a);
SiteTensor absorb_right(const SiteTensor& a, const BlockMatrix& l);

TwoSiteTensor contract_two_site(const SiteTensor& a, const SiteTensor& b);
/// Truncated SVD of a two-site tensor. With `move_right` the left tensor is
/// left-orthonormal and the singular values go right; otherwise the right
/// tensor is right-orthonormal. Kept singular values are renormalized.
SplitResult split_two_site(const TwoSiteTensor& theta, const Truncation& trunc, bool move_right);

/// Sum_p A^p† A^p (left) or Sum_p A^p A^p† (right).
BlockMatrix left_gram(const SiteTensor& a);
BlockMatrix right_gram(const SiteTensor& a);

}  // namespace spinprobe::tn
