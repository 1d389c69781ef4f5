#include "spinprobe/tn/block.hpp"

#include <algorithm>
#include <stdexcept>

namespace spinprobe::tn {

BondSpace BondSpace::single(int q, int dim) {
  BondSpace b;
  b.add(q, dim);
  return b;
}

void BondSpace::add(int q, int dim) {
  if (dim < 0) throw std::invalid_argument("BondSpace: negative sector dimension");
  if (dim == 0) return;
  auto next = s_ ? std::make_shared<Sectors>(*s_) : std::make_shared<Sectors>();
  auto it = std::lower_bound(next->q.begin(), next->q.end(), q);
  const auto pos = it - next->q.begin();
  if (it != next->q.end() && *it == q) {
    next->d[pos] += dim;
  } else {
    next->q.insert(it, q);
    next->d.insert(next->d.begin() + pos, dim);
  }
  s_ = std::move(next);
}

int BondSpace::find(int q) const {
  if (!s_) return -1;
  const auto& v = s_->q;
  auto it = std::lower_bound(v.begin(), v.end(), q);
  if (it == v.end() || *it != q) return -1;
  return static_cast<int>(it - v.begin());
}

int BondSpace::dim_of(int q) const {
  const int i = find(q);
  return i < 0 ? 0 : s_->d[i];
}

int BondSpace::total_dim() const {
  int n = 0;
  for (int i = 0; i < size(); ++i) n += dim(i);
  return n;
}

int BondSpace::max_sector_dim() const {
  int n = 0;
  for (int i = 0; i < size(); ++i) n = std::max(n, dim(i));
  return n;
}

BondSpace BondSpace::negated() const {
  if (!s_) return {};
  auto next = std::make_shared<Sectors>();
  for (int i = size() - 1; i >= 0; --i) {
    next->q.push_back(-s_->q[i]);
    next->d.push_back(s_->d[i]);
  }
  BondSpace b;
  b.s_ = std::move(next);
  return b;
}

bool BondSpace::operator==(const BondSpace& o) const {
  if (s_ == o.s_) return true;
  if (size() != o.size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (charge(i) != o.charge(i) || dim(i) != o.dim(i)) return false;
  }
  return true;
}

BlockMatrix BlockMatrix::zeros(const BondSpace& rows, const BondSpace& cols, int offset) {
  BlockMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.offset = offset;
  m.blocks.reserve(rows.size());
  for (int i = 0; i < rows.size(); ++i) {
    m.blocks.push_back(Mat::Zero(rows.dim(i), cols.dim_of(rows.charge(i) + offset)));
  }
  return m;
}

BlockMatrix BlockMatrix::identity(const BondSpace& space) {
  BlockMatrix m = zeros(space, space, 0);
  for (auto& b : m.blocks) b.setIdentity();
  return m;
}

Mat* BlockMatrix::block_at(int q) {
  const int i = rows.find(q);
  return i < 0 ? nullptr : &blocks[i];
}

const Mat* BlockMatrix::block_at(int q) const {
  const int i = rows.find(q);
  return i < 0 ? nullptr : &blocks[i];
}

double BlockMatrix::squared_norm() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return s;
}

BlockMatrix BlockMatrix::adjoint() const {
  BlockMatrix m;
  m.rows = cols;
  m.cols = rows;
  m.offset = -offset;
  m.blocks.reserve(cols.size());
  for (int j = 0; j < cols.size(); ++j) {
    const int q = cols.charge(j) - offset;
    const int i = rows.find(q);
    if (i < 0) {
      m.blocks.push_back(Mat::Zero(cols.dim(j), 0));
    } else {
      m.blocks.push_back(blocks[i].adjoint());
    }
  }
  return m;
}

BlockMatrix BlockMatrix::negated() const {
  BlockMatrix m;
  m.rows = rows.negated();
  m.cols = cols.negated();
  m.offset = -offset;
  m.blocks.assign(blocks.rbegin(), blocks.rend());
  return m;
}

void BlockMatrix::add_scaled(cplx a, const BlockMatrix& other) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].size() > 0) blocks[i] += a * other.blocks[i];
  }
}

BlockMatrix& BlockMatrix::operator*=(cplx a) {
  for (auto& b : blocks) b *= a;
  return *this;
}

Mat BlockMatrix::to_dense() const {
  std::vector<int> col_start(cols.size() + 1, 0);
  for (int j = 0; j < cols.size(); ++j) col_start[j + 1] = col_start[j] + cols.dim(j);
  Mat out = Mat::Zero(rows.total_dim(), cols.total_dim());
  int r0 = 0;
  for (int i = 0; i < rows.size(); ++i) {
    const int j = cols.find(rows.charge(i) + offset);
    if (j >= 0) out.block(r0, col_start[j], rows.dim(i), cols.dim(j)) = blocks[i];
    r0 += rows.dim(i);
  }
  return out;
}

BlockMatrix multiply(const BlockMatrix& a, const BlockMatrix& b) {
  BlockMatrix out;
  out.rows = a.rows;
  out.cols = b.cols;
  out.offset = a.offset + b.offset;
  out.blocks.resize(a.rows.size());
  for (int i = 0; i < a.rows.size(); ++i) {
    const int nc = out.col_dim(i);
    const Mat& ai = a.blocks[i];
    const int j = (ai.cols() == 0 || nc == 0) ? -1 : b.rows.find(a.rows.charge(i) + a.offset);
    if (j < 0) {
      out.blocks[i] = Mat::Zero(a.rows.dim(i), nc);
      continue;
    }
    if (b.blocks[j].rows() != ai.cols()) throw std::logic_error("multiply: inner sector dimensions differ");
    out.blocks[i].noalias() = ai * b.blocks[j];
  }
  return out;
}

void multiply_add(BlockMatrix& out, cplx coef, const BlockMatrix& a, const BlockMatrix& b) {
  for (int i = 0; i < a.rows.size(); ++i) {
    const Mat& ai = a.blocks[i];
    if (ai.cols() == 0 || out.blocks[i].cols() == 0) continue;
    const int j = b.rows.find(a.rows.charge(i) + a.offset);
    if (j < 0) continue;
    const Mat& bj = b.blocks[j];
    if (bj.rows() != ai.cols()) throw std::logic_error("multiply: inner sector dimensions differ");
    if (coef == cplx(1.0, 0.0)) {
      out.blocks[i].noalias() += ai * bj;
    } else {
      out.blocks[i].noalias() += coef * (ai * bj);
    }
  }
}

Eigen::Index packed_size(std::span<const BlockMatrix> ms) {
  Eigen::Index n = 0;
  for (const auto& m : ms)
    for (const auto& b : m.blocks) n += b.size();
  return n;
}

Eigen::VectorXcd pack(std::span<const BlockMatrix> ms) {
  Eigen::VectorXcd v(packed_size(ms));
  Eigen::Index k = 0;
  for (const auto& m : ms) {
    for (const auto& b : m.blocks) {
      v.segment(k, b.size()) = Eigen::Map<const Eigen::VectorXcd>(b.data(), b.size());
      k += b.size();
    }
  }
  return v;
}

void unpack(const Eigen::VectorXcd& v, std::span<BlockMatrix> ms) {
  Eigen::Index k = 0;
  for (auto& m : ms) {
    for (auto& b : m.blocks) {
      Eigen::Map<Eigen::VectorXcd>(b.data(), b.size()) = v.segment(k, b.size());
      k += b.size();
    }
  }
}

std::vector<double> singular_values(const BlockMatrix& m) {
  std::vector<double> out;
  for (const auto& b : m.blocks) {
    if (b.size() == 0) continue;
    Eigen::BDCSVD<Mat> svd(b);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) out.push_back(svd.singularValues()(i));
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

}  // namespace spinprobe::tn
