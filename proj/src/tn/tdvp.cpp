#include "spinprobe/tn/tdvp.hpp"

#include <cmath>

#include "effective.hpp"

namespace spinprobe::tn {

const char* to_string(TdvpMode m) {
  switch (m) {
    case TdvpMode::Auto: return "auto";
    case TdvpMode::OneSite: return "one_site";
    case TdvpMode::TwoSite: return "two_site";
  }
  return "?";
}

TdvpMode tdvp_mode_from_string(const std::string& s) {
  if (s == "auto") return TdvpMode::Auto;
  if (s == "one_site") return TdvpMode::OneSite;
  if (s == "two_site") return TdvpMode::TwoSite;
  throw std::invalid_argument("unknown TDVP mode '" + s + "' (auto|one_site|two_site)");
}

struct TdvpEngine::Impl {
  detail::Environments env;
  linalg::KrylovExpInfo info;

  SiteTensor evolve_one(const MPO& h, int i, const SiteTensor& a, double tau, const linalg::KrylovExpOptions& opt) {
    SiteTensor work = a;
    auto matvec = [&](const Eigen::VectorXcd& x) {
      unpack(x, work);
      return pack(detail::apply_one_site(env.left[i], env.right[i + 1], h, i, work));
    };
    unpack(linalg::expm_krylov(matvec, pack(a), tau, opt, &info), work);
    return work;
  }

  TwoSiteTensor evolve_two(const MPO& h, int i, const TwoSiteTensor& th, double tau,
                           const linalg::KrylovExpOptions& opt) {
    TwoSiteTensor work = th;
    auto matvec = [&](const Eigen::VectorXcd& x) {
      unpack(x, work);
      return pack(detail::apply_two_site(env.left[i], env.right[i + 2], h, i, work));
    };
    unpack(linalg::expm_krylov(matvec, pack(th), tau, opt, &info), work);
    return work;
  }

  // Bond matrix between env.left[b] and env.right[b].
  BlockMatrix evolve_zero(int b, const BlockMatrix& c, double tau, const linalg::KrylovExpOptions& opt) {
    BlockMatrix work = c;
    auto matvec = [&](const Eigen::VectorXcd& x) {
      unpack(x, std::span<BlockMatrix>(&work, 1));
      const BlockMatrix y = detail::apply_zero_site(env.left[b], env.right[b], work);
      return pack(std::span<const BlockMatrix>(&y, 1));
    };
    unpack(linalg::expm_krylov(matvec, pack(std::span<const BlockMatrix>(&c, 1)), tau, opt, &info),
           std::span<BlockMatrix>(&work, 1));
    return work;
  }
};

TdvpEngine::TdvpEngine(MPS psi, MPO h, TdvpConfig cfg)
    : psi_(std::move(psi)), h_(std::move(h)), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  if (!(cfg_.dt > 0.0)) throw std::invalid_argument("TDVP: dt must be positive");
  if (!(cfg_.cutoff > 0.0 && cfg_.cutoff < 1.0)) throw std::invalid_argument("TDVP: cutoff must lie in (0, 1)");
  if (psi_.length() != h_.length()) throw std::invalid_argument("TDVP: state and MPO lengths differ");
  if (psi_.length() < 2) throw std::invalid_argument("TDVP: need at least two sites");
  psi_.canonicalize(0);
  psi_.normalize();
  impl_->env.build(psi_, h_);
  energy_ = std::real(
      pack(psi_.site(0)).dot(pack(detail::apply_one_site(impl_->env.left[0], impl_->env.right[1], h_, 0, psi_.site(0)))));
}

TdvpEngine::~TdvpEngine() = default;
TdvpEngine::TdvpEngine(TdvpEngine&&) noexcept = default;
TdvpEngine& TdvpEngine::operator=(TdvpEngine&&) noexcept = default;

bool TdvpEngine::using_two_site() const {
  return cfg_.mode == TdvpMode::TwoSite || (cfg_.mode == TdvpMode::Auto && !saturated_);
}

void TdvpEngine::step() {
  const int L = psi_.length();
  const double half = 0.5 * cfg_.dt;
  auto& env = impl_->env;
  const MPO& h = h_;
  const Truncation trunc{cfg_.chi_max, cfg_.cutoff};
  TdvpStepInfo info;
  info.two_site = using_two_site();
  impl_->info = {};
  const int step_index = steps() + 1;
  try {
    if (info.two_site) {
      for (int i = 0; i + 1 < L; ++i) {
        auto theta = impl_->evolve_two(h, i, contract_two_site(psi_.site(i), psi_.site(i + 1)), half, cfg_.krylov);
        auto split = split_two_site(theta, trunc, true);
        info.discarded += split.discarded;
        psi_.site(i) = std::move(split.left);
        psi_.site(i + 1) = std::move(split.right);
        psi_.set_center(i + 1);
        env.left[i + 1] = detail::extend_left(env.left[i], psi_.site(i), psi_.site(i), h, i);
        if (i + 2 < L) psi_.site(i + 1) = impl_->evolve_one(h, i + 1, psi_.site(i + 1), -half, cfg_.krylov);
      }
      for (int i = L - 2; i >= 0; --i) {
        auto theta = impl_->evolve_two(h, i, contract_two_site(psi_.site(i), psi_.site(i + 1)), half, cfg_.krylov);
        auto split = split_two_site(theta, trunc, false);
        info.discarded += split.discarded;
        psi_.site(i) = std::move(split.left);
        psi_.site(i + 1) = std::move(split.right);
        psi_.set_center(i);
        env.right[i + 1] = detail::extend_right(env.right[i + 2], psi_.site(i + 1), psi_.site(i + 1), h, i + 1);
        if (i > 0) psi_.site(i) = impl_->evolve_one(h, i, psi_.site(i), -half, cfg_.krylov);
      }
    } else {
      for (int i = 0; i < L; ++i) {
        psi_.site(i) = impl_->evolve_one(h, i, psi_.site(i), half, cfg_.krylov);
        if (i + 1 == L) break;
        auto [q, r] = left_qr(psi_.site(i));
        psi_.site(i) = std::move(q);
        env.left[i + 1] = detail::extend_left(env.left[i], psi_.site(i), psi_.site(i), h, i);
        r = impl_->evolve_zero(i + 1, r, -half, cfg_.krylov);
        psi_.site(i + 1) = absorb_left(r, psi_.site(i + 1));
        psi_.set_center(i + 1);
      }
      for (int i = L - 1; i >= 0; --i) {
        psi_.site(i) = impl_->evolve_one(h, i, psi_.site(i), half, cfg_.krylov);
        if (i == 0) break;
        auto [l, q] = right_lq(psi_.site(i));
        psi_.site(i) = std::move(q);
        env.right[i] = detail::extend_right(env.right[i + 1], psi_.site(i), psi_.site(i), h, i);
        l = impl_->evolve_zero(i, l, -half, cfg_.krylov);
        psi_.site(i - 1) = absorb_right(psi_.site(i - 1), l);
        psi_.set_center(i - 1);
      }
    }
  } catch (const linalg::ConvergenceError& e) {
    throw TdvpError(std::string("TDVP step ") + std::to_string(step_index) + ": " + e.what(), step_index);
  }

  const auto& a = psi_.site(0);
  const double norm = std::sqrt(a[0].squared_norm() + a[1].squared_norm());
  info.norm_drift = std::abs(norm - 1.0);
  if (info.norm_drift > cfg_.max_norm_drift + info.discarded) {
    throw TdvpError("TDVP step " + std::to_string(step_index) + ": norm drift " + std::to_string(info.norm_drift),
                    step_index);
  }
  psi_.normalize();
  const auto hy = detail::apply_one_site(env.left[0], env.right[1], h, 0, psi_.site(0));
  energy_ = std::real(pack(psi_.site(0)).dot(pack(hy)));
  info.energy = energy_;
  info.max_bond = psi_.max_bond_dim();
  info.matvecs = impl_->info.matvecs;
  psi_.truncation_log.push_back(info.discarded);
  time_ += cfg_.dt;
  log_.push_back(info);
  if (cfg_.mode == TdvpMode::Auto && info.max_bond >= cfg_.chi_max) saturated_ = true;
}

std::vector<TdvpStepInfo> tdvp_evolve(MPS& psi, const MPO& h, const TdvpConfig& cfg, int steps,
                                      const std::function<void(int, const MPS&)>& observer) {
  TdvpEngine engine(std::move(psi), h, cfg);
  for (int k = 1; k <= steps; ++k) {
    engine.step();
    if (observer) observer(k, engine.state());
  }
  psi = engine.state();
  return engine.log();
}

}  // namespace spinprobe::tn
