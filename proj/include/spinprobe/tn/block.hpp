// block.hpp: U(1) block-sparse matrices for the MPS engine.
//
// Charges are 2 S^z (integers). A physical up spin carries +1, a down spin -1.
// Every bond of an MPS is a BondSpace: a list of (charge, dimension) sectors.
// A BlockMatrix maps row charge q to column charge q + offset and stores one
// dense block per row sector; blocks whose column sector is absent have zero
// columns, so products never need special cases.

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spinprobe::tn {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

/// Physical index 0 is spin up, 1 is spin down.
constexpr int phys_charge(int p) { return p == 0 ? 1 : -1; }

/// Sector list shared between copies; mutation copies on write.
class BondSpace {
 public:
  BondSpace() = default;
  static BondSpace single(int q, int dim = 1);

  /// Adds `dim` states to sector q (created in sorted position when new).
  void add(int q, int dim);

  int size() const { return s_ ? static_cast<int>(s_->q.size()) : 0; }
  int charge(int i) const { return s_->q[i]; }
  int dim(int i) const { return s_->d[i]; }
  /// Sector index of charge q, or -1.
  int find(int q) const;
  /// Dimension of sector q (0 if absent).
  int dim_of(int q) const;
  int total_dim() const;
  int max_sector_dim() const;
  /// Same sectors with negated charges (global spin flip).
  BondSpace negated() const;

  bool operator==(const BondSpace& o) const;

 private:
  struct Sectors {
    std::vector<int> q;
    std::vector<int> d;
  };
  std::shared_ptr<const Sectors> s_;
};

struct BlockMatrix {
  BondSpace rows;
  BondSpace cols;
  int offset{0};
  std::vector<Mat> blocks;  // blocks[i]: rows.dim(i) x cols.dim_of(rows.charge(i) + offset)

  static BlockMatrix zeros(const BondSpace& rows, const BondSpace& cols, int offset);
  static BlockMatrix identity(const BondSpace& space);

  int col_dim(int i) const { return cols.dim_of(rows.charge(i) + offset); }
  /// Block for row charge q, or nullptr.
  Mat* block_at(int q);
  const Mat* block_at(int q) const;

  double squared_norm() const;
  BlockMatrix adjoint() const;
  BlockMatrix negated() const;  // charges q -> -q
  /// this += a * other (identical structure required).
  void add_scaled(cplx a, const BlockMatrix& other);
  BlockMatrix& operator*=(cplx a);
  /// Dense matrix with sectors laid out in BondSpace order (tests only).
  Mat to_dense() const;
};

/// a * b; a.cols must carry the same sectors as b.rows wherever both are present.
BlockMatrix multiply(const BlockMatrix& a, const BlockMatrix& b);

/// out += coef * a * b (out must already have the structure of a * b).
void multiply_add(BlockMatrix& out, cplx coef, const BlockMatrix& a, const BlockMatrix& b);

/// Number of complex entries of a list of block matrices.
Eigen::Index packed_size(std::span<const BlockMatrix> ms);
Eigen::VectorXcd pack(std::span<const BlockMatrix> ms);
inline Eigen::VectorXcd pack(const std::vector<BlockMatrix>& ms) { return pack(std::span<const BlockMatrix>(ms)); }
/// Overwrites the blocks of `ms` (structure fixed) from a packed vector.
void unpack(const Eigen::VectorXcd& v, std::span<BlockMatrix> ms);
inline void unpack(const Eigen::VectorXcd& v, std::vector<BlockMatrix>& ms) { unpack(v, std::span<BlockMatrix>(ms)); }

/// Singular values of a block-diagonal (offset 0) matrix, all sectors merged.
std::vector<double> singular_values(const BlockMatrix& m);

}  // namespace spinprobe::tn
