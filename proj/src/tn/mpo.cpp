#include "spinprobe/tn/mpo.hpp"

#include <map>
#include <stdexcept>

#include "effective.hpp"

namespace spinprobe::tn {

double local_element(LocalOp op, int out, int in) {
  switch (op) {
    case LocalOp::Id: return out == in ? 1.0 : 0.0;
    case LocalOp::Sz: return out == in ? (out == 0 ? 0.5 : -0.5) : 0.0;
    case LocalOp::SPlus: return out == 0 && in == 1 ? 1.0 : 0.0;
    case LocalOp::SMinus: return out == 1 && in == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

namespace {

void push_op(std::vector<MpoEntry>& site, int wl, int wr, LocalOp op, double coef) {
  for (int out = 0; out < 2; ++out) {
    for (int in = 0; in < 2; ++in) {
      const double v = local_element(op, out, in);
      if (v != 0.0) site.push_back({wl, wr, out, in, coef * v});
    }
  }
}

}  // namespace

MPO MPO::from_terms(const OperatorTermList& terms) {
  const int L = terms.length();
  if (L < 1) throw ModelError("MPO: empty chain");
  MPO m;
  m.charges_.assign(L + 1, std::vector<int>{0, 0});
  m.sites_.assign(L, {});
  std::vector<std::map<LocalOp, int>> pending(L + 1);  // per bond: left operator -> channel

  const auto canon = terms.canonical();
  for (const auto& t : canon.terms()) {
    int q = 0;
    for (const auto& so : t.ops) q += charge(so.op);
    if (q != 0) throw ModelError("MPO: term does not conserve S^z");
    if (t.ops.size() == 1) {
      const int i = t.ops[0].site - 1;
      push_op(m.sites_[i], start, done, t.ops[0].op, t.coefficient);
    } else if (t.ops.size() == 2 && t.ops[1].site == t.ops[0].site + 1) {
      const int i = t.ops[0].site - 1;  // bond i + 1 sits between sites i and i + 1 (0-based)
      auto& chans = pending[i + 1];
      auto it = chans.find(t.ops[0].op);
      if (it == chans.end()) {
        const int w = static_cast<int>(m.charges_[i + 1].size());
        m.charges_[i + 1].push_back(charge(t.ops[0].op));
        it = chans.emplace(t.ops[0].op, w).first;
        push_op(m.sites_[i], start, w, t.ops[0].op, 1.0);
      }
      push_op(m.sites_[i + 1], it->second, done, t.ops[1].op, t.coefficient);
    } else {
      throw ModelError("MPO: only on-site and nearest-neighbor terms are supported");
    }
  }
  for (auto& s : m.sites_) {
    push_op(s, start, start, LocalOp::Id, 1.0);
    push_op(s, done, done, LocalOp::Id, 1.0);
  }
  return m;
}

cplx matrix_element(const MPS& bra, const MPO& h, const MPS& ket) {
  if (bra.length() != h.length() || ket.length() != h.length()) {
    throw std::invalid_argument("matrix_element: length mismatch");
  }
  if (bra.total_charge() != ket.total_charge()) return 0.0;
  auto e = detail::left_edge(bra, ket, h);
  for (int i = 0; i < h.length(); ++i) e = detail::extend_left(e, bra.site(i), ket.site(i), h, i);
  if (!e[MPO::done]) return 0.0;
  return e[MPO::done]->blocks[0](0, 0);
}

double expectation(const MPS& psi, const MPO& h) {
  return std::real(matrix_element(psi, h, psi)) / std::real(overlap(psi, psi));
}

}  // namespace spinprobe::tn
