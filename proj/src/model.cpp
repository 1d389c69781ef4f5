#include "spinprobe/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spinprobe {

void validate(const ModelParams& p) {
  if (p.L < 2 || p.L % 2 != 0) {
    throw ModelError("L must be an even integer >= 2, got " + std::to_string(p.L));
  }
  if (!(p.J > 0.0) || !std::isfinite(p.J)) throw ModelError("J must be positive");
  if (!std::isfinite(p.delta) || !std::isfinite(p.g) || !std::isfinite(p.h_z)) {
    throw ModelError("delta, g and h_z must be finite");
  }
  const int m = p.M();
  if (m < 1 || m > p.L) {
    throw ModelError("coupled site M=" + std::to_string(m) + " outside [1, L]");
  }
}

const char* to_string(LocalOp op) {
  switch (op) {
    case LocalOp::Id: return "Id";
    case LocalOp::SPlus: return "S+";
    case LocalOp::SMinus: return "S-";
    case LocalOp::Sz: return "Sz";
  }
  return "?";
}

int charge(LocalOp op) {
  switch (op) {
    case LocalOp::SPlus: return 2;
    case LocalOp::SMinus: return -2;
    default: return 0;
  }
}

LocalOp adjoint(LocalOp op) {
  switch (op) {
    case LocalOp::SPlus: return LocalOp::SMinus;
    case LocalOp::SMinus: return LocalOp::SPlus;
    default: return op;
  }
}

void OperatorTermList::add(double coefficient, std::vector<SiteOp> ops) {
  for (const auto& o : ops) {
    if (o.site < 1 || o.site > L_) {
      throw ModelError("operator site " + std::to_string(o.site) + " outside [1, " +
                       std::to_string(L_) + "]");
    }
  }
  std::sort(ops.begin(), ops.end());
  for (std::size_t i = 1; i < ops.size(); ++i) {
    if (ops[i].site == ops[i - 1].site) throw ModelError("repeated site in operator product");
  }
  terms_.push_back({coefficient, std::move(ops)});
}

OperatorTermList OperatorTermList::canonical() const {
  std::vector<OperatorTerm> work;
  work.reserve(terms_.size());
  for (const auto& t : terms_) {
    OperatorTerm c{t.coefficient, {}};
    for (const auto& o : t.ops) {
      if (o.op != LocalOp::Id) c.ops.push_back(o);
    }
    std::sort(c.ops.begin(), c.ops.end());
    work.push_back(std::move(c));
  }
  std::stable_sort(work.begin(), work.end(),
                   [](const OperatorTerm& a, const OperatorTerm& b) { return a.ops < b.ops; });
  OperatorTermList out(L_);
  for (auto& t : work) {
    if (!out.terms_.empty() && out.terms_.back().ops == t.ops) {
      out.terms_.back().coefficient += t.coefficient;
    } else {
      out.terms_.push_back(std::move(t));
    }
  }
  std::erase_if(out.terms_, [](const OperatorTerm& t) { return t.coefficient == 0.0; });
  return out;
}

OperatorTermList OperatorTermList::adjoint() const {
  OperatorTermList out(L_);
  for (const auto& t : terms_) {
    OperatorTerm c{t.coefficient, t.ops};
    // Operators on distinct sites commute, so the reversed product keeps its order.
    for (auto& o : c.ops) o.op = spinprobe::adjoint(o.op);
    out.terms_.push_back(std::move(c));
  }
  return out;
}

bool is_hermitian(const OperatorTermList& h) {
  const auto a = h.canonical();
  const auto b = h.adjoint().canonical();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.terms()[i].ops != b.terms()[i].ops) return false;
    if (a.terms()[i].coefficient != b.terms()[i].coefficient) return false;
  }
  return true;
}

OperatorTermList build_xxz_terms(const ModelParams& p) {
  validate(p);
  OperatorTermList h(p.L);
  for (int i = 1; i < p.L; ++i) {
    h.add(0.5 * p.J, {{i, LocalOp::SPlus}, {i + 1, LocalOp::SMinus}});
    h.add(0.5 * p.J, {{i, LocalOp::SMinus}, {i + 1, LocalOp::SPlus}});
    if (p.delta != 0.0) h.add(p.J * p.delta, {{i, LocalOp::Sz}, {i + 1, LocalOp::Sz}});
  }
  return h;
}

OperatorTermList build_branch_terms(const ModelParams& p, BranchSign branch) {
  auto h = build_xxz_terms(p);
  if (p.g != 0.0) h.add(sign_of(branch) * 0.5 * p.g, {{p.M(), LocalOp::Sz}});
  return h;
}

OperatorTermList build_sz_terms(int L, int site) {
  OperatorTermList h(L);
  h.add(1.0, {{site, LocalOp::Sz}});
  return h;
}

std::string point_tag(const ModelParams& p) {
  std::ostringstream os;
  os << "L" << p.L << "_delta" << p.delta << "_g" << p.g;
  if (p.h_z != 0.0) os << "_hz" << p.h_z;
  if (p.coupled_site != 0) os << "_M" << p.coupled_site;
  return os.str();
}

const char* to_string(FerroInitial f) {
  switch (f) {
    case FerroInitial::Cat: return "cat";
    case FerroInitial::Up: return "up";
    case FerroInitial::Down: return "down";
  }
  return "?";
}

FerroInitial ferro_initial_from_string(const std::string& s) {
  if (s == "cat") return FerroInitial::Cat;
  if (s == "up") return FerroInitial::Up;
  if (s == "down") return FerroInitial::Down;
  throw ModelError("unknown ferromagnetic initial state '" + s + "' (cat|up|down)");
}

}  // namespace spinprobe
