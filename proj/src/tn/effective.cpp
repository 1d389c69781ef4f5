#include "effective.hpp"

#include <array>

namespace spinprobe::tn::detail {

namespace {

using Slot = std::optional<BlockMatrix>;

void accumulate(Slot& target, double coef, const BlockMatrix& x) {
  if (!target) target = BlockMatrix::zeros(x.rows, x.cols, x.offset);
  target->add_scaled(coef, x);
}

std::array<BlockMatrix, 2> adjoints(const SiteTensor& a) { return {a[0].adjoint(), a[1].adjoint()}; }

}  // namespace

Env left_edge(const MPS& bra, const MPS& ket, const MPO& h) {
  Env e(h.channels(0));
  BlockMatrix one = BlockMatrix::zeros(bra.bond(0), ket.bond(0), 0);
  one.blocks[0].setOnes();
  e[MPO::start] = std::move(one);
  return e;
}

Env right_edge(const MPS& bra, const MPS& ket, const MPO& h) {
  const int L = h.length();
  Env f(h.channels(L));
  BlockMatrix one = BlockMatrix::zeros(ket.bond(L), bra.bond(L), 0);
  for (auto& b : one.blocks) b.setOnes();
  f[MPO::done] = std::move(one);
  return f;
}

Env extend_left(const Env& e, const SiteTensor& bra, const SiteTensor& ket, const MPO& h, int i) {
  const int nl = h.channels(i), nr = h.channels(i + 1);
  std::vector<std::array<Slot, 2>> t(nl), u(nr);
  for (const auto& en : h.site(i)) {
    if (!e[en.wl]) continue;
    auto& tt = t[en.wl][en.in];
    if (!tt) tt = multiply(*e[en.wl], ket[en.in]);
    accumulate(u[en.wr][en.out], en.coef, *tt);
  }
  const auto bra_adj = adjoints(bra);
  Env out(nr);
  for (int wr = 0; wr < nr; ++wr) {
    for (int p = 0; p < 2; ++p) {
      if (!u[wr][p]) continue;
      if (!out[wr]) out[wr] = BlockMatrix::zeros(bra[0].cols, ket[0].cols, -h.channel_charge(i + 1, wr));
      multiply_add(*out[wr], 1.0, bra_adj[p], *u[wr][p]);
    }
  }
  return out;
}

Env extend_right(const Env& f, const SiteTensor& bra, const SiteTensor& ket, const MPO& h, int i) {
  const int nl = h.channels(i), nr = h.channels(i + 1);
  std::vector<std::array<Slot, 2>> t(nr), u(nl);
  for (const auto& en : h.site(i)) {
    if (!f[en.wr]) continue;
    auto& tt = t[en.wr][en.in];
    if (!tt) tt = multiply(ket[en.in], *f[en.wr]);
    accumulate(u[en.wl][en.out], en.coef, *tt);
  }
  const auto bra_adj = adjoints(bra);
  Env out(nl);
  for (int wl = 0; wl < nl; ++wl) {
    for (int p = 0; p < 2; ++p) {
      if (!u[wl][p]) continue;
      if (!out[wl]) out[wl] = BlockMatrix::zeros(ket[0].rows, bra[0].rows, h.channel_charge(i, wl));
      multiply_add(*out[wl], 1.0, *u[wl][p], bra_adj[p]);
    }
  }
  return out;
}

SiteTensor apply_one_site(const Env& e, const Env& f, const MPO& h, int i, const SiteTensor& a) {
  const int nl = h.channels(i), nr = h.channels(i + 1);
  std::vector<std::array<Slot, 2>> t(nl), u(nr);
  for (const auto& en : h.site(i)) {
    if (!e[en.wl] || !f[en.wr]) continue;
    auto& tt = t[en.wl][en.in];
    if (!tt) tt = multiply(*e[en.wl], a[en.in]);
    accumulate(u[en.wr][en.out], en.coef, *tt);
  }
  SiteTensor y{BlockMatrix::zeros(a[0].rows, a[0].cols, a[0].offset),
               BlockMatrix::zeros(a[1].rows, a[1].cols, a[1].offset)};
  for (int wr = 0; wr < nr; ++wr) {
    for (int p = 0; p < 2; ++p) {
      if (u[wr][p]) multiply_add(y[p], 1.0, *u[wr][p], *f[wr]);
    }
  }
  return y;
}

TwoSiteTensor apply_two_site(const Env& e, const Env& f, const MPO& h, int i, const TwoSiteTensor& th) {
  const int nl = h.channels(i), nm = h.channels(i + 1), nr = h.channels(i + 2);
  // t[wl][in1,in2] = E_wl theta ; u[wm][out1,in2] ; v[wr][out1,out2]
  std::vector<std::array<Slot, 4>> t(nl), u(nm), v(nr);
  for (const auto& en : h.site(i)) {
    if (!e[en.wl]) continue;
    for (int in2 = 0; in2 < 2; ++in2) {
      auto& tt = t[en.wl][2 * en.in + in2];
      if (!tt) tt = multiply(*e[en.wl], th[2 * en.in + in2]);
      accumulate(u[en.wr][2 * en.out + in2], en.coef, *tt);
    }
  }
  for (const auto& en : h.site(i + 1)) {
    if (!f[en.wr]) continue;
    for (int out1 = 0; out1 < 2; ++out1) {
      const auto& uu = u[en.wl][2 * out1 + en.in];
      if (!uu) continue;
      accumulate(v[en.wr][2 * out1 + en.out], en.coef, *uu);
    }
  }
  TwoSiteTensor y;
  for (int k = 0; k < 4; ++k) y[k] = BlockMatrix::zeros(th[k].rows, th[k].cols, th[k].offset);
  for (int wr = 0; wr < nr; ++wr) {
    for (int k = 0; k < 4; ++k) {
      if (v[wr][k]) multiply_add(y[k], 1.0, *v[wr][k], *f[wr]);
    }
  }
  return y;
}

BlockMatrix apply_zero_site(const Env& e, const Env& f, const BlockMatrix& c) {
  BlockMatrix y = BlockMatrix::zeros(c.rows, c.cols, c.offset);
  for (std::size_t w = 0; w < e.size(); ++w) {
    if (!e[w] || !f[w]) continue;
    multiply_add(y, 1.0, multiply(*e[w], c), *f[w]);
  }
  return y;
}

void Environments::build(const MPS& psi, const MPO& h) {
  const int L = psi.length();
  left.assign(L + 1, {});
  right.assign(L + 1, {});
  left[0] = left_edge(psi, psi, h);
  for (int b = 1; b <= psi.center(); ++b) left[b] = extend_left(left[b - 1], psi.site(b - 1), psi.site(b - 1), h, b - 1);
  right[L] = right_edge(psi, psi, h);
  for (int b = L - 1; b >= psi.center() + 1; --b) right[b] = extend_right(right[b + 1], psi.site(b), psi.site(b), h, b);
}

}  // namespace spinprobe::tn::detail
