#include "spinprobe/tn/mps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace spinprobe::tn {

namespace {

// Number of states of n spins with total charge q, capped (avoids overflow).
int sector_count(int n, int q, int cap) {
  if ((n + q) % 2 != 0 || std::abs(q) > n) return 0;
  const int k = (n + q) / 2;
  double c = 1.0;
  for (int i = 1; i <= std::min(k, n - k); ++i) {
    c = c * (n - std::min(k, n - k) + i) / i;
    if (c >= cap) return cap;
  }
  return std::min(cap, static_cast<int>(std::lround(c)));
}

// Row pieces of a "left-grouped" site matrix for right charge qr:
// (p, ql = qr - c_p, row offset) in the stacked matrix.
struct Piece {
  int p;
  int q;
  int offset;
  int dim;
};

std::vector<Piece> stacked_rows(const BondSpace& left, int qr, int& total) {
  std::vector<Piece> out;
  total = 0;
  for (int p = 0; p < 2; ++p) {
    const int d = left.dim_of(qr - phys_charge(p));
    if (d == 0) continue;
    out.push_back({p, qr - phys_charge(p), total, d});
    total += d;
  }
  return out;
}

std::vector<Piece> stacked_cols(const BondSpace& right, int ql, int& total) {
  std::vector<Piece> out;
  total = 0;
  for (int p = 0; p < 2; ++p) {
    const int d = right.dim_of(ql + phys_charge(p));
    if (d == 0) continue;
    out.push_back({p, ql + phys_charge(p), total, d});
    total += d;
  }
  return out;
}

SiteTensor zero_site(const BondSpace& left, const BondSpace& right) {
  return {BlockMatrix::zeros(left, right, phys_charge(0)), BlockMatrix::zeros(left, right, phys_charge(1))};
}

}  // namespace

MPS::MPS(std::vector<SiteTensor> sites, int center) : sites_(std::move(sites)), center_(center) {
  if (sites_.empty()) throw std::invalid_argument("MPS: no sites");
}

int MPS::total_charge() const { return bond(length()).charge(0); }

const BondSpace& MPS::bond(int b) const {
  if (b < length()) return sites_[b][0].rows;
  return sites_.back()[0].cols;
}

std::vector<int> MPS::bond_dims() const {
  std::vector<int> d;
  for (int b = 0; b <= length(); ++b) d.push_back(bond(b).total_dim());
  return d;
}

int MPS::max_bond_dim() const {
  int m = 0;
  for (int b = 0; b <= length(); ++b) m = std::max(m, bond(b).total_dim());
  return m;
}

MPS MPS::product(const std::vector<int>& phys) {
  std::vector<SiteTensor> sites;
  int q = 0;
  for (int p : phys) {
    if (p != 0 && p != 1) throw std::invalid_argument("MPS::product: physical index must be 0 or 1");
    const BondSpace left = BondSpace::single(q);
    const BondSpace right = BondSpace::single(q + phys_charge(p));
    SiteTensor a = zero_site(left, right);
    a[p].blocks[0](0, 0) = 1.0;
    sites.push_back(std::move(a));
    q += phys_charge(p);
  }
  return MPS(std::move(sites), 0);
}

MPS MPS::random(int L, int two_sz, int sector_dim, unsigned seed) {
  if (L < 1 || std::abs(two_sz) > L || (L + two_sz) % 2 != 0) {
    throw std::invalid_argument("MPS::random: total 2 S^z incompatible with L");
  }
  std::vector<BondSpace> bonds(L + 1);
  for (int b = 0; b <= L; ++b) {
    for (int q = -b; q <= b; q += 2) {
      const int d = std::min(sector_count(b, q, sector_dim), sector_count(L - b, two_sz - q, sector_dim));
      bonds[b].add(q, d);
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<SiteTensor> sites;
  for (int i = 0; i < L; ++i) {
    SiteTensor a = zero_site(bonds[i], bonds[i + 1]);
    for (auto& m : a)
      for (auto& blk : m.blocks)
        for (Eigen::Index k = 0; k < blk.size(); ++k) blk.data()[k] = gauss(rng);
    sites.push_back(std::move(a));
  }
  MPS psi(std::move(sites), L - 1);
  psi.move_center(0);
  psi.normalize();
  return psi;
}

MPS MPS::from_dense(const Eigen::VectorXcd& amplitudes, int L) {
  if (amplitudes.size() != (Eigen::Index{1} << L)) throw std::invalid_argument("from_dense: size is not 2^L");
  const double scale = std::max(amplitudes.norm(), 1e-300);
  std::map<int, Mat> rest;  // charge -> (dim x configurations of remaining sites)
  rest[0] = amplitudes.transpose();
  BondSpace left = BondSpace::single(0);
  std::vector<SiteTensor> sites;
  for (int b = 0; b < L; ++b) {
    const Eigen::Index ncols = Eigen::Index{1} << (L - b - 1);
    std::map<int, Mat> pieces[2];
    for (const auto& [q, r] : rest) {
      for (int p = 0; p < 2; ++p) {
        const Eigen::Index bit = p == 0 ? 1 : 0;
        Mat piece(r.rows(), ncols);
        for (Eigen::Index y = 0; y < ncols; ++y) piece.col(y) = r.col(2 * y + bit);
        pieces[p][q] = std::move(piece);
      }
    }
    std::map<int, std::pair<Mat, Mat>> factors;  // m -> (U, S V^†)
    BondSpace right;
    for (int m = -b - 1; m <= b + 1; ++m) {
      int n = 0;
      const auto rows = stacked_rows(left, m, n);
      if (n == 0) continue;
      Mat stacked(n, ncols);
      for (const auto& pc : rows) stacked.middleRows(pc.offset, pc.dim) = pieces[pc.p].at(pc.q);
      Eigen::BDCSVD<Mat> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& s = svd.singularValues();
      int k = 0;
      while (k < s.size() && s(k) > 1e-13 * scale) ++k;
      if (k == 0) continue;
      right.add(m, k);
      factors[m] = {svd.matrixU().leftCols(k),
                    s.head(k).cast<cplx>().asDiagonal() * svd.matrixV().leftCols(k).adjoint()};
    }
    SiteTensor a = zero_site(left, right);
    for (const auto& [m, f] : factors) {
      int n = 0;
      for (const auto& pc : stacked_rows(left, m, n)) *a[pc.p].block_at(pc.q) = f.first.middleRows(pc.offset, pc.dim);
    }
    rest.clear();
    for (auto& [m, f] : factors) rest[m] = std::move(f.second);
    sites.push_back(std::move(a));
    left = right;
  }
  if (rest.size() != 1) throw ModelError("from_dense: state is not in a single magnetization sector");
  const auto& [q_total, last] = *rest.begin();
  SiteTensor& tail = sites.back();
  const BondSpace end = BondSpace::single(q_total);
  SiteTensor fixed = zero_site(tail[0].rows, end);
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < tail[p].rows.size(); ++i) {
      if (tail[p].rows.charge(i) + phys_charge(p) == q_total) fixed[p].blocks[i] = tail[p].blocks[i] * last;
    }
  }
  tail = std::move(fixed);
  return MPS(std::move(sites), L - 1);
}

void MPS::move_center(int target) {
  if (target < 0 || target >= length()) throw std::out_of_range("move_center: site out of range");
  while (center_ < target) {
    auto [q, r] = left_qr(sites_[center_]);
    sites_[center_] = std::move(q);
    sites_[center_ + 1] = absorb_left(r, sites_[center_ + 1]);
    ++center_;
  }
  while (center_ > target) {
    auto [l, q] = right_lq(sites_[center_]);
    sites_[center_] = std::move(q);
    sites_[center_ - 1] = absorb_right(sites_[center_ - 1], l);
    --center_;
  }
}

void MPS::canonicalize(int c) {
  center_ = 0;
  move_center(length() - 1);
  move_center(c);
}

double MPS::norm() const { return std::sqrt(std::max(0.0, std::real(overlap(*this, *this)))); }

void MPS::normalize() {
  const double n = std::sqrt(sites_[center_][0].squared_norm() + sites_[center_][1].squared_norm());
  if (!(n > 0.0)) throw std::runtime_error("MPS::normalize: zero state");
  for (auto& m : sites_[center_]) m *= 1.0 / n;
}

std::vector<double> MPS::schmidt_values(int b) {
  if (b < 1 || b >= length()) throw std::out_of_range("schmidt_values: bond must lie in [1, L-1]");
  move_center(b);
  const auto lq = right_lq(sites_[b]);
  return singular_values(lq.first);
}

double MPS::entanglement_entropy(int b) {
  const auto s = schmidt_values(b);
  double total = 0.0;
  for (double x : s) total += x * x;
  double e = 0.0;
  for (double x : s) {
    const double p = x * x / total;
    if (p > 1e-300) e -= p * std::log(p);
  }
  return e;
}

MPS MPS::flipped() const {
  std::vector<SiteTensor> sites;
  sites.reserve(sites_.size());
  for (const auto& a : sites_) sites.push_back({a[1].negated(), a[0].negated()});
  MPS out(std::move(sites), center_);
  return out;
}

Eigen::VectorXcd MPS::to_dense() const {
  const int L = length();
  if (L > 24) throw std::invalid_argument("to_dense: chain too long");
  std::map<int, Mat> part;
  part[0] = Mat::Ones(1, 1);
  for (int b = 0; b < L; ++b) {
    const Eigen::Index half = Eigen::Index{1} << b;
    std::map<int, Mat> next;
    const BondSpace& right = bond(b + 1);
    for (int j = 0; j < right.size(); ++j) next[right.charge(j)] = Mat::Zero(2 * half, right.dim(j));
    for (int p = 0; p < 2; ++p) {
      const Eigen::Index row0 = p == 0 ? half : 0;
      const auto& a = sites_[b][p];
      for (int i = 0; i < a.rows.size(); ++i) {
        if (a.blocks[i].cols() == 0) continue;
        const auto it = part.find(a.rows.charge(i));
        if (it == part.end()) continue;
        next[a.rows.charge(i) + a.offset].middleRows(row0, half) += it->second * a.blocks[i];
      }
    }
    part = std::move(next);
  }
  return part.at(total_charge()).col(0);
}

BlockMatrix left_gram(const SiteTensor& a) {
  BlockMatrix g = BlockMatrix::zeros(a[0].cols, a[0].cols, 0);
  for (int p = 0; p < 2; ++p) multiply_add(g, 1.0, a[p].adjoint(), a[p]);
  return g;
}

BlockMatrix right_gram(const SiteTensor& a) {
  BlockMatrix g = BlockMatrix::zeros(a[0].rows, a[0].rows, 0);
  for (int p = 0; p < 2; ++p) multiply_add(g, 1.0, a[p], a[p].adjoint());
  return g;
}

namespace {

double identity_defect(const BlockMatrix& g) {
  double e = 0.0;
  for (const auto& b : g.blocks) {
    if (b.size() == 0) continue;
    e = std::max(e, (b - Mat::Identity(b.rows(), b.cols())).cwiseAbs().maxCoeff());
  }
  return e;
}

}  // namespace

double MPS::left_orthonormality_error(int i) const { return identity_defect(left_gram(sites_[i])); }

double MPS::right_orthonormality_error(int i) const { return identity_defect(right_gram(sites_[i])); }

double MPS::canonical_error() const {
  double e = 0.0;
  for (int i = 0; i < center_; ++i) e = std::max(e, left_orthonormality_error(i));
  for (int i = center_ + 1; i < length(); ++i) e = std::max(e, right_orthonormality_error(i));
  return e;
}

cplx overlap(const MPS& bra, const MPS& ket) {
  if (bra.length() != ket.length()) throw std::invalid_argument("overlap: length mismatch");
  if (bra.total_charge() != ket.total_charge()) return 0.0;
  BlockMatrix e = BlockMatrix::zeros(bra.bond(0), ket.bond(0), 0);
  e.blocks[0](0, 0) = 1.0;
  for (int i = 0; i < bra.length(); ++i) {
    BlockMatrix next = BlockMatrix::zeros(bra.bond(i + 1), ket.bond(i + 1), 0);
    for (int p = 0; p < 2; ++p) {
      multiply_add(next, 1.0, bra.site(i)[p].adjoint(), multiply(e, ket.site(i)[p]));
    }
    e = std::move(next);
  }
  return e.blocks[0](0, 0);
}

MPS add(const MPS& a, const MPS& b, cplx ca, cplx cb) {
  const int L = a.length();
  if (b.length() != L) throw std::invalid_argument("add: length mismatch");
  if (a.total_charge() != b.total_charge()) throw std::invalid_argument("add: different magnetization sectors");
  auto merged = [&](int bnd) {
    if (bnd == 0 || bnd == L) return a.bond(bnd);
    BondSpace s;
    const BondSpace &x = a.bond(bnd), &y = b.bond(bnd);
    for (int i = 0; i < x.size(); ++i) s.add(x.charge(i), x.dim(i));
    for (int i = 0; i < y.size(); ++i) s.add(y.charge(i), y.dim(i));
    return s;
  };
  std::vector<SiteTensor> sites;
  for (int i = 0; i < L; ++i) {
    const BondSpace left = merged(i), right = merged(i + 1);
    SiteTensor t = zero_site(left, right);
    for (int p = 0; p < 2; ++p) {
      for (int r = 0; r < left.size(); ++r) {
        Mat& blk = t[p].blocks[r];
        if (blk.cols() == 0) continue;
        const int ql = left.charge(r), qr = ql + phys_charge(p);
        const Mat* ma = a.site(i)[p].block_at(ql);
        const Mat* mb = b.site(i)[p].block_at(ql);
        const Eigen::Index rb = i == 0 ? 0 : a.bond(i).dim_of(ql);
        const Eigen::Index cb_off = i == L - 1 ? 0 : a.bond(i + 1).dim_of(qr);
        const cplx fa = i == 0 ? ca : cplx(1.0), fb = i == 0 ? cb : cplx(1.0);
        if (ma && ma->size() > 0) blk.block(0, 0, ma->rows(), ma->cols()) += fa * *ma;
        if (mb && mb->size() > 0) blk.block(rb, cb_off, mb->rows(), mb->cols()) += fb * *mb;
      }
    }
    sites.push_back(std::move(t));
  }
  return MPS(std::move(sites), 0);
}

double compress(MPS& psi, const Truncation& trunc) {
  psi.canonicalize(psi.length() - 1);
  double discarded = 0.0;
  for (int i = psi.length() - 1; i >= 1; --i) {
    auto res = split_two_site(contract_two_site(psi.site(i - 1), psi.site(i)), trunc, false);
    psi.site(i - 1) = std::move(res.left);
    psi.site(i) = std::move(res.right);
    discarded += res.discarded;
  }
  psi.set_center(0);
  return discarded;
}

void apply_local(MPS& psi, int site, LocalOp op) {
  if (site < 1 || site > psi.length()) throw std::out_of_range("apply_local: site out of range");
  if (op == LocalOp::Id) return;
  if (op != LocalOp::Sz) throw std::invalid_argument("apply_local: only charge-neutral operators");
  psi.move_center(site - 1);
  psi.site(site - 1)[0] *= 0.5;
  psi.site(site - 1)[1] *= -0.5;
}

std::pair<SiteTensor, BlockMatrix> left_qr(const SiteTensor& a) {
  const BondSpace& left = a[0].rows;
  const BondSpace& right = a[0].cols;
  BondSpace bond;
  std::vector<std::tuple<int, Mat, Mat>> factors;  // (qr, Q, R)
  for (int j = 0; j < right.size(); ++j) {
    const int qr = right.charge(j);
    int n = 0;
    const auto rows = stacked_rows(left, qr, n);
    const int k = std::min(n, right.dim(j));
    if (k == 0) continue;
    Mat m(n, right.dim(j));
    for (const auto& pc : rows) m.middleRows(pc.offset, pc.dim) = *a[pc.p].block_at(pc.q);
    Eigen::HouseholderQR<Mat> dec(m);
    Mat q = dec.householderQ() * Mat::Identity(n, k);
    Mat r = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    bond.add(qr, k);
    factors.emplace_back(qr, std::move(q), std::move(r));
  }
  SiteTensor out = zero_site(left, bond);
  BlockMatrix r = BlockMatrix::zeros(bond, right, 0);
  for (auto& [qr, q, rr] : factors) {
    int n = 0;
    for (const auto& pc : stacked_rows(left, qr, n)) *out[pc.p].block_at(pc.q) = q.middleRows(pc.offset, pc.dim);
    *r.block_at(qr) = std::move(rr);
  }
  return {std::move(out), std::move(r)};
}

std::pair<BlockMatrix, SiteTensor> right_lq(const SiteTensor& a) {
  const BondSpace& left = a[0].rows;
  const BondSpace& right = a[0].cols;
  BondSpace bond;
  std::vector<std::tuple<int, Mat, Mat>> factors;  // (ql, L, Q)
  for (int i = 0; i < left.size(); ++i) {
    const int ql = left.charge(i);
    int n = 0;
    const auto cols = stacked_cols(right, ql, n);
    const int k = std::min(n, left.dim(i));
    if (k == 0) continue;
    Mat m(left.dim(i), n);
    for (const auto& pc : cols) m.middleCols(pc.offset, pc.dim) = a[pc.p].blocks[i];
    Eigen::HouseholderQR<Mat> dec(m.adjoint());
    Mat q = dec.householderQ() * Mat::Identity(n, k);
    Mat r = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    bond.add(ql, k);
    factors.emplace_back(ql, r.adjoint(), q.adjoint());
  }
  BlockMatrix l = BlockMatrix::zeros(left, bond, 0);
  SiteTensor out = zero_site(bond, right);
  for (auto& [ql, ll, q] : factors) {
    *l.block_at(ql) = std::move(ll);
    int n = 0;
    for (const auto& pc : stacked_cols(right, ql, n)) *out[pc.p].block_at(ql) = q.middleCols(pc.offset, pc.dim);
  }
  return {std::move(l), std::move(out)};
}

SiteTensor absorb_left(const BlockMatrix& r, const SiteTensor& a) {
  return {multiply(r, a[0]), multiply(r, a[1])};
}

SiteTensor absorb_right(const SiteTensor& a, const BlockMatrix& l) {
  return {multiply(a[0], l), multiply(a[1], l)};
}

TwoSiteTensor contract_two_site(const SiteTensor& a, const SiteTensor& b) {
  TwoSiteTensor t;
  for (int p1 = 0; p1 < 2; ++p1)
    for (int p2 = 0; p2 < 2; ++p2) t[2 * p1 + p2] = multiply(a[p1], b[p2]);
  return t;
}

SplitResult split_two_site(const TwoSiteTensor& theta, const Truncation& trunc, bool move_right) {
  const BondSpace& left = theta[0].rows;
  const BondSpace& right = theta[0].cols;
  struct Sector {
    int m;
    Mat u, v;  // thin factors
    Eigen::VectorXd s;
  };
  std::vector<Sector> sectors;
  std::vector<std::tuple<double, int, int>> all;  // (sigma, sector, index)
  double total = 0.0;
  for (int m = left.charge(0) - 1; left.size() > 0 && m <= left.charge(left.size() - 1) + 1; m += 2) {
    int nr = 0, nc = 0;
    const auto rows = stacked_rows(left, m, nr);
    const auto cols = stacked_cols(right, m, nc);
    if (nr == 0 || nc == 0) continue;
    Mat mat(nr, nc);
    for (const auto& r : rows) {
      for (const auto& c : cols) {
        mat.block(r.offset, c.offset, r.dim, c.dim) = *theta[2 * r.p + c.p].block_at(r.q);
      }
    }
    Eigen::BDCSVD<Mat> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Sector s{m, svd.matrixU(), svd.matrixV(), svd.singularValues()};
    for (Eigen::Index k = 0; k < s.s.size(); ++k) {
      all.emplace_back(s.s(k), static_cast<int>(sectors.size()), static_cast<int>(k));
      total += s.s(k) * s.s(k);
    }
    sectors.push_back(std::move(s));
  }
  if (!(total > 0.0)) throw std::runtime_error("split_two_site: zero tensor");
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });

  // Smallest n with discarded tail <= cutoff, capped at chi_max.
  std::size_t n = all.size();
  double tail = 0.0;
  while (n > 1) {
    const double s = std::get<0>(all[n - 1]);
    if (tail + s * s > trunc.cutoff * total) break;
    tail += s * s;
    --n;
  }
  n = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, trunc.chi_max)));
  double kept = 0.0;
  std::vector<int> keep(sectors.size(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::get<0>(all[k]);
    kept += s * s;
    keep[std::get<1>(all[k])] = std::max(keep[std::get<1>(all[k])], std::get<2>(all[k]) + 1);
  }
  const double rescale = std::sqrt(total / kept);

  BondSpace bond;
  for (std::size_t i = 0; i < sectors.size(); ++i) bond.add(sectors[i].m, keep[i]);
  SplitResult out;
  out.left = zero_site(left, bond);
  out.right = zero_site(bond, right);
  out.discarded = std::max(0.0, 1.0 - kept / total);
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    const int k = keep[i];
    if (k == 0) continue;
    const Sector& s = sectors[i];
    const Eigen::VectorXcd sv = (rescale * s.s.head(k)).cast<cplx>();
    Mat u = s.u.leftCols(k);
    Mat vh = s.v.leftCols(k).adjoint();
    if (move_right) {
      vh = sv.asDiagonal() * vh;
    } else {
      u = u * sv.asDiagonal();
    }
    int nr = 0, nc = 0;
    for (const auto& r : stacked_rows(left, s.m, nr)) *out.left[r.p].block_at(r.q) = u.middleRows(r.offset, r.dim);
    for (const auto& c : stacked_cols(right, s.m, nc)) *out.right[c.p].block_at(s.m) = vh.middleCols(c.offset, c.dim);
  }
  return out;
}

}  // namespace spinprobe::tn
