// effective.hpp: MPO environments and effective Hamiltonians (internal).
//
// Left environment E_w at bond b: rows = bra bond, cols = ket bond, offset
// -q_w. Right environment F_w: rows = ket bond, cols = bra bond, offset +q_w.
// Channels that cannot be reached are stored as nullopt.

#pragma once

#include <optional>
#include <vector>

#include "spinprobe/tn/mpo.hpp"
#include "spinprobe/tn/mps.hpp"

namespace spinprobe::tn::detail {

using Env = std::vector<std::optional<BlockMatrix>>;

Env left_edge(const MPS& bra, const MPS& ket, const MPO& h);
Env right_edge(const MPS& bra, const MPS& ket, const MPO& h);

/// Environment at bond i+1 from the one at bond i and site i.
Env extend_left(const Env& e, const SiteTensor& bra, const SiteTensor& ket, const MPO& h, int i);
/// Environment at bond i from the one at bond i+1 and site i.
Env extend_right(const Env& f, const SiteTensor& bra, const SiteTensor& ket, const MPO& h, int i);

/// H_eff acting on the center tensor of site i.
SiteTensor apply_one_site(const Env& e, const Env& f, const MPO& h, int i, const SiteTensor& a);
/// H_eff acting on the two-site tensor of sites i, i+1.
TwoSiteTensor apply_two_site(const Env& e, const Env& f, const MPO& h, int i, const TwoSiteTensor& t);
/// H_eff acting on a bond matrix sitting between environments e and f.
BlockMatrix apply_zero_site(const Env& e, const Env& f, const BlockMatrix& c);

/// Environments of <psi|H|psi> kept consistent with the canonical center.
struct Environments {
  std::vector<Env> left;   // left[b], valid for b <= center
  std::vector<Env> right;  // right[b], valid for b >= center + 1

  void build(const MPS& psi, const MPO& h);
};

}  // namespace spinprobe::tn::detail
