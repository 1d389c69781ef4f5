// mpo.hpp: matrix product operators built from operator term lists.
//
// The MPO is a finite automaton over channels: "start" (nothing placed yet),
// "done" (a complete term placed) and one pending channel per distinct left
// operator of a nearest-neighbor product. Only 1-site and adjacent 2-site
// charge-neutral terms are accepted.

#pragma once

#include <vector>

#include "spinprobe/model.hpp"
#include "spinprobe/tn/mps.hpp"

namespace spinprobe::tn {

struct MpoEntry {
  int wl;   // channel on the left bond
  int wr;   // channel on the right bond
  int out;  // physical index of the ket after the operator
  int in;
  double coef;
};

class MPO {
 public:
  static constexpr int start = 0;
  static constexpr int done = 1;

  static MPO from_terms(const OperatorTermList& terms);

  int length() const { return static_cast<int>(sites_.size()); }
  /// Channels on bond b in 0..L.
  int channels(int b) const { return static_cast<int>(charges_[b].size()); }
  /// Charge raised by the operators already placed when in channel w at bond b.
  int channel_charge(int b, int w) const { return charges_[b][w]; }
  const std::vector<MpoEntry>& site(int i) const { return sites_[i]; }

 private:
  std::vector<std::vector<int>> charges_;
  std::vector<std::vector<MpoEntry>> sites_;
};

/// Matrix element of a local operator, <out|op|in> with 0 = up.
double local_element(LocalOp op, int out, int in);

/// <bra|H|ket> by full contraction.
cplx matrix_element(const MPS& bra, const MPO& h, const MPS& ket);
/// <psi|H|psi> / <psi|psi>.
double expectation(const MPS& psi, const MPO& h);

}  // namespace spinprobe::tn
