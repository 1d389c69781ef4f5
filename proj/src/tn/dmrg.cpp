#include "spinprobe/tn/dmrg.hpp"

#include <algorithm>
#include <cmath>

#include "effective.hpp"

namespace spinprobe::tn {

DmrgResult dmrg(const MPO& h, MPS psi, const DmrgConfig& cfg) {
  const int L = psi.length();
  if (L < 2) throw ModelError("dmrg: need at least two sites");
  psi.canonicalize(0);
  psi.normalize();
  detail::Environments env;
  env.build(psi, h);

  DmrgResult res;
  double energy = 0.0;
  const int ramp = static_cast<int>(cfg.chi_ramp.size());
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    Truncation trunc{sweep < ramp ? std::min(cfg.chi_ramp[sweep], cfg.chi_max) : cfg.chi_max, cfg.cutoff};
    double discarded = 0.0;
    auto solve = [&](int i, bool move_right) {
      TwoSiteTensor theta = contract_two_site(psi.site(i), psi.site(i + 1));
      TwoSiteTensor work = theta;
      auto matvec = [&](const Eigen::VectorXcd& x) {
        unpack(x, work);
        return pack(detail::apply_two_site(env.left[i], env.right[i + 2], h, i, work));
      };
      const auto eig = linalg::lanczos_lowest(matvec, pack(theta), cfg.lanczos);
      unpack(eig.vector, theta);
      auto split = split_two_site(theta, trunc, move_right);
      discarded = std::max(discarded, split.discarded);
      psi.site(i) = std::move(split.left);
      psi.site(i + 1) = std::move(split.right);
      energy = eig.value;
    };
    for (int i = 0; i + 1 < L; ++i) {
      solve(i, true);
      psi.set_center(i + 1);
      env.left[i + 1] = detail::extend_left(env.left[i], psi.site(i), psi.site(i), h, i);
    }
    for (int i = L - 2; i >= 0; --i) {
      solve(i, false);
      psi.set_center(i);
      env.right[i + 1] = detail::extend_right(env.right[i + 2], psi.site(i + 1), psi.site(i + 1), h, i + 1);
    }
    psi.truncation_log.push_back(discarded);
    res.max_discarded = std::max(res.max_discarded, discarded);
    res.energy_history.push_back(energy);
    res.sweeps = sweep + 1;
    const auto& hist = res.energy_history;
    if (sweep + 1 >= cfg.min_sweeps && sweep >= ramp && hist.size() >= 2) {
      const double change = std::abs(hist[hist.size() - 1] - hist[hist.size() - 2]);
      if (change <= cfg.energy_tol * std::max(1.0, std::abs(energy))) {
        psi.normalize();
        res.energy = energy;
        res.two_sz = psi.total_charge();
        res.state = std::move(psi);
        return res;
      }
    }
  }
  throw DmrgError("DMRG did not converge in " + std::to_string(cfg.max_sweeps) + " sweeps",
                  res.energy_history);
}

DmrgResult dmrg_ground_state(const ModelParams& p, const DmrgConfig& cfg, std::optional<int> two_sz) {
  validate(p);
  const int q = two_sz ? *two_sz : (p.delta <= -1.0 ? p.L : 0);
  const MPO h = MPO::from_terms(build_xxz_terms(p));
  auto res = dmrg(h, MPS::random(p.L, q, cfg.init_sector_dim, cfg.seed), cfg);
  if (q != 0) return res;

  MPS flipped = res.state.flipped();
  res.flip_parity = std::real(overlap(flipped, res.state));
  if (std::abs(res.flip_parity) >= 1.0 - 1e-8) return res;

  // Quasi-degenerate ground space: resolve to a spin-flip eigenstate.
  const Truncation trunc{cfg.chi_max, cfg.cutoff};
  std::optional<MPS> best;
  double best_e = 0.0, best_parity = 0.0;
  for (double sign : {1.0, -1.0}) {
    MPS part = add(res.state, flipped, 1.0, sign);
    if (part.norm() < 1e-3) continue;
    compress(part, trunc);
    part.normalize();
    const double e = expectation(part, h);
    const double tol = cfg.degeneracy_tol * std::max(1.0, std::abs(e));
    if (!best || e < best_e - tol) {
      best = std::move(part);
      best_e = e;
      best_parity = sign;
    }
  }
  res.state = std::move(*best);
  res.energy = best_e;
  res.flip_parity = best_parity;
  res.symmetrized = true;
  return res;
}

}  // namespace spinprobe::tn
