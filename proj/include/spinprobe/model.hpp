// model.hpp: qubit + XXZ chain parameters and Hamiltonian term lists.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinprobe {

/// Raised for invalid parameters or unsupported backend/parameter combinations.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Chain couplings, qubit splitting and qubit-chain coupling.
///
/// Sites are 1-based. `coupled_site` is the chain site that carries the
/// g S^z_M sigma^z / 2 coupling; 0 means "the middle spin" L/2.
struct ModelParams {
  double J{1.0};
  double delta{0.0};
  int L{2};
  double g{0.25};
  double h_z{0.0};
  int coupled_site{0};

  /// Resolved coupled site M (1-based).
  int M() const { return coupled_site == 0 ? L / 2 : coupled_site; }
};

/// Throws ModelError unless L >= 2 is even, J > 0 and 1 <= M <= L.
void validate(const ModelParams& p);

enum class LocalOp { Id, SPlus, SMinus, Sz };

const char* to_string(LocalOp op);

/// Change in 2 S^z produced by the operator (+2 for S+, -2 for S-).
int charge(LocalOp op);

LocalOp adjoint(LocalOp op);

struct SiteOp {
  int site;  // 1-based
  LocalOp op;

  bool operator==(const SiteOp&) const = default;
  auto operator<=>(const SiteOp&) const = default;
};

struct OperatorTerm {
  double coefficient{0.0};
  std::vector<SiteOp> ops;  // ordered by site, at most one op per site
};

/// A Hamiltonian as a real-coefficient sum of site-operator products.
class OperatorTermList {
 public:
  OperatorTermList() = default;
  explicit OperatorTermList(int L) : L_(L) {}

  int length() const { return L_; }
  const std::vector<OperatorTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Appends coefficient * prod(ops). Sites must lie in [1, L] and be distinct.
  void add(double coefficient, std::vector<SiteOp> ops);

  /// Canonical form: ops sorted by site, identities dropped, equal products merged,
  /// zero coefficients removed, terms sorted.
  OperatorTermList canonical() const;

  /// Term-by-term Hermitian conjugate.
  OperatorTermList adjoint() const;

 private:
  int L_{0};
  std::vector<OperatorTerm> terms_;
};

/// True when the canonical list equals the canonical list of its conjugate.
bool is_hermitian(const OperatorTermList& h);

/// Qubit sigma^z eigenvalue labelling a conditional chain Hamiltonian.
enum class BranchSign : int { Plus = +1, Minus = -1 };

inline double sign_of(BranchSign b) { return static_cast<int>(b); }

/// Initial chain state where the ground space is spanned by the two fully
/// polarized states (delta <= -1): their equal superposition or one of them.
enum class FerroInitial { Cat, Up, Down };

const char* to_string(FerroInitial f);
FerroInitial ferro_initial_from_string(const std::string& s);

/// J sum_i [ (S+_i S-_{i+1} + h.c.)/2 + delta S^z_i S^z_{i+1} ], open boundaries.
OperatorTermList build_xxz_terms(const ModelParams& p);

/// H_S + sign * (g/2) S^z_M.
OperatorTermList build_branch_terms(const ModelParams& p, BranchSign branch);

/// Single-site S^z_M as a term list (used for correlators).
OperatorTermList build_sz_terms(int L, int site);

/// Short tag used in output file names, e.g. "L12_delta0.5_g0.25".
std::string point_tag(const ModelParams& p);

}  // namespace spinprobe
