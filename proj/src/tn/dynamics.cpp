#include "spinprobe/tn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace spinprobe::tn {

namespace {

nlohmann::json tdvp_meta(const TdvpConfig& c) {
  return {{"dt", c.dt}, {"chi_max", c.chi_max}, {"cutoff", c.cutoff}, {"mode", to_string(c.mode)}};
}

struct RunStats {
  double max_discarded{0.0};
  double total_discarded{0.0};
  double max_norm_drift{0.0};
  double max_energy_drift{0.0};
  int max_bond{0};
  int two_site_steps{0};
  int steps{0};

  void absorb(const TdvpEngine& e, double e0) {
    const auto& s = e.log().back();
    max_discarded = std::max(max_discarded, s.discarded);
    total_discarded += s.discarded;
    max_norm_drift = std::max(max_norm_drift, s.norm_drift);
    max_energy_drift = std::max(max_energy_drift, std::abs(s.energy - e0));
    max_bond = std::max(max_bond, s.max_bond);
    two_site_steps += s.two_site ? 1 : 0;
    ++steps;
  }

  nlohmann::json json() const {
    return {{"max_discarded_per_step", max_discarded}, {"total_discarded", total_discarded},
            {"max_norm_drift", max_norm_drift},        {"max_energy_drift", max_energy_drift},
            {"max_bond", max_bond},                    {"two_site_steps", two_site_steps},
            {"steps", steps}};
  }
};

}  // namespace

int substeps_per_sample(const TimeGrid& grid, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("TDVP dt must be positive");
  const double r = grid.dt / dt;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument("sampling interval must be a multiple of the TDVP step");
  }
  return static_cast<int>(n);
}

TnInitialState prepare_initial_state(const ModelParams& p, const TnConfig& cfg) {
  validate(p);
  TnInitialState init;
  const MPO h = MPO::from_terms(build_xxz_terms(p));
  if (p.delta > -1.0) {
    auto g = dmrg_ground_state(p, cfg.dmrg);
    InitialComponent c;
    c.state = std::move(g.state);
    c.energy = expectation(c.state, h);
    c.flip_parity = g.flip_parity;
    init.meta = {{"kind", "dmrg_ground_state"},
                 {"dmrg_energy", g.energy},
                 {"energy", c.energy},
                 {"two_sz", g.two_sz},
                 {"sweeps", g.sweeps},
                 {"max_discarded", g.max_discarded},
                 {"flip_parity", g.flip_parity},
                 {"symmetrized", g.symmetrized},
                 {"max_bond", c.state.max_bond_dim()},
                 {"chi_max", cfg.dmrg.chi_max}};
    init.components.push_back(std::move(c));
    return init;
  }
  auto polarized = [&](int phys) {
    InitialComponent c;
    c.state = MPS::product(std::vector<int>(p.L, phys));
    c.energy = expectation(c.state, h);
    return c;
  };
  switch (cfg.ferro_initial) {
    case FerroInitial::Cat: {
      auto up = polarized(0);
      auto down = polarized(1);
      up.weight = down.weight = 0.5;
      init.components.push_back(std::move(up));
      init.components.push_back(std::move(down));
      break;
    }
    case FerroInitial::Up: init.components.push_back(polarized(0)); break;
    case FerroInitial::Down: init.components.push_back(polarized(1)); break;
  }
  init.meta = {{"kind", "polarized"}, {"ferro_initial", to_string(cfg.ferro_initial)},
               {"energy", init.components.front().energy}};
  return init;
}

CoherenceTrace coherence_tdvp(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid) {
  return coherence_tdvp(p, cfg, grid, prepare_initial_state(p, cfg));
}

CoherenceTrace coherence_tdvp(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid,
                              const TnInitialState& init) {
  validate(p);
  const int sub = substeps_per_sample(grid, cfg.tdvp.dt);
  const MPO hp = MPO::from_terms(build_branch_terms(p, BranchSign::Plus));
  const MPO hm = MPO::from_terms(build_branch_terms(p, BranchSign::Minus));

  CoherenceTrace tr;
  tr.backend = "tdvp";
  tr.params = p;
  tr.t = grid.times();
  tr.rho01.assign(grid.size(), cplx(0.0));
  RunStats stats;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : init.components) {
    const bool use_flip = cfg.flip_symmetry && std::abs(std::abs(c.flip_parity) - 1.0) <= 1e-8;
    const double parity = c.flip_parity > 0 ? 1.0 : -1.0;
    TdvpEngine plus(c.state, hp, cfg.tdvp);
    std::optional<TdvpEngine> minus;
    if (!use_flip) minus.emplace(c.state, hm, cfg.tdvp);
    const double ep0 = plus.energy(), em0 = minus ? minus->energy() : 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (k > 0) {
        for (int s = 0; s < sub; ++s) {
          plus.step();
          stats.absorb(plus, ep0);
          if (minus) {
            minus->step();
            stats.absorb(*minus, em0);
          }
        }
      }
      const cplx ov = use_flip ? parity * overlap(plus.state().flipped(), plus.state())
                               : overlap(minus->state(), plus.state());
      tr.rho01[k] += c.weight * ov;
    }
    comps.push_back({{"weight", c.weight}, {"flip_parity", c.flip_parity}, {"flip_symmetry_used", use_flip}});
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    tr.rho01[k] *= 0.5 * std::exp(cplx(0.0, -p.h_z * grid.t(k)));
  }
  tr.rho01[0] = 0.5;  // identity overlap
  tr.meta = {{"tdvp", tdvp_meta(cfg.tdvp)}, {"initial_state", init.meta}, {"components", comps},
             {"diagnostics", stats.json()}};
  if (stats.total_discarded > 1e-6) tr.meta["warning"] = "truncation budget exceeded; see total_discarded";
  return tr;
}

CorrelationTrace two_time_correlation_mps(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid) {
  return two_time_correlation_mps(p, cfg, grid, prepare_initial_state(p, cfg));
}

CorrelationTrace two_time_correlation_mps(const ModelParams& p, const TnConfig& cfg, const TimeGrid& grid,
                                          const TnInitialState& init) {
  validate(p);
  const int sub = substeps_per_sample(grid, cfg.tdvp.dt);
  const MPO hs = MPO::from_terms(build_xxz_terms(p));
  CorrelationTrace tr;
  tr.backend = "tdvp";
  tr.t = grid.times();
  tr.c.assign(grid.size(), cplx(0.0));
  RunStats stats;
  for (const auto& c : init.components) {
    MPS phi0 = c.state;
    apply_local(phi0, p.M(), LocalOp::Sz);
    const double n = phi0.norm();
    for (auto& m : phi0.site(phi0.center())) m *= 1.0 / n;
    const double norm2 = n * n;  // <G|(S^z_M)^2|G> = 1/4 for a normalized G
    TdvpEngine engine(phi0, hs, cfg.tdvp);
    const double e0 = engine.energy();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (k > 0) {
        for (int s = 0; s < sub; ++s) {
          engine.step();
          stats.absorb(engine, e0);
        }
      }
      const double t = grid.t(k);
      tr.c[k] += c.weight * norm2 * std::exp(cplx(0.0, c.energy * t)) * overlap(phi0, engine.state());
    }
  }
  tr.meta = {{"tdvp", tdvp_meta(cfg.tdvp)}, {"initial_state", init.meta}, {"diagnostics", stats.json()}};
  return tr;
}

}  // namespace spinprobe::tn
