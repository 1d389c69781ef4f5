#include "spinprobe/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "spinprobe/io.hpp"
#include "spinprobe/tcl.hpp"

#ifndef SPINPROBE_VERSION
#define SPINPROBE_VERSION "0.0.0"
#endif
#ifndef SPINPROBE_GIT_DESCRIBE
#define SPINPROBE_GIT_DESCRIBE "unknown"
#endif

namespace spinprobe::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Backend, const char*> kBackendNames[] = {
    {Backend::Exact, "exact"},
    {Backend::Tdvp, "tdvp"},
    {Backend::TclExact, "tcl-exact"},
    {Backend::TclTdvp, "tcl-tdvp"},
    {Backend::AnalyticPbc, "analytic-pbc"},
    {Backend::AnalyticObcDet, "analytic-obc-det"},
    {Backend::Ising, "ising"},
};

bool uses_exact(Backend b) { return b == Backend::Exact || b == Backend::TclExact; }
bool uses_tn(Backend b) { return b == Backend::Tdvp || b == Backend::TclTdvp; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Rotating-frame phase of the qubit splitting, for backends that work at h_z = 0.
void apply_hz_phase(CoherenceTrace& tr, double h_z) {
  if (h_z == 0.0) return;
  for (std::size_t k = 0; k < tr.size(); ++k) tr.rho01[k] *= std::exp(cplx(0.0, -h_z * tr.t[k]));
}

tn::TnConfig tn_config(const RunConfig& c) {
  auto cfg = c.tn;
  cfg.dmrg.seed = c.seed;
  return cfg;
}

ed::ExactOptions exact_options(const RunConfig& c) {
  auto opt = c.exact;
  opt.seed = c.seed;
  return opt;
}

json lanczos_json(const linalg::LanczosOptions& o) {
  return {{"krylov_dim", o.krylov_dim}, {"max_restarts", o.max_restarts}, {"tol", o.tol},
          {"throw_on_failure", o.throw_on_failure}};
}

json krylov_json(const linalg::KrylovExpOptions& o) {
  return {{"max_dim", o.max_dim}, {"tol", o.tol}, {"max_splits", o.max_splits}};
}

json params_json(const ModelParams& p) {
  return {{"J", p.J}, {"delta", p.delta}, {"L", p.L}, {"g", p.g}, {"h_z", p.h_z}, {"coupled_site", p.M()}};
}

std::optional<double> middle_entropy(const RunConfig& c, const ModelParams& p, const tn::TnInitialState* init) {
  const int cut = p.L / 2;
  switch (c.backend) {
    case Backend::Exact:
    case Backend::TclExact: {
      const auto gs = ed::ground_state_exact(p, std::nullopt, exact_options(c));
      return ed::entanglement_entropy(gs.state, cut);
    }
    case Backend::Tdvp:
    case Backend::TclTdvp: {
      // Component 0 is the DMRG ground state, or one polarized state below delta = -1.
      auto s = init->components.front().state;
      return s.entanglement_entropy(cut);
    }
    case Backend::AnalyticPbc:
    case Backend::AnalyticObcDet: return analytic::free_fermion_entropy_obc(p.L, p.J, cut);
    case Backend::Ising: return 0.0;
  }
  return std::nullopt;
}

std::string format_opt(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

}  // namespace

const char* to_string(Backend b) {
  for (const auto& [k, name] : kBackendNames)
    if (k == b) return name;
  return "?";
}

Backend backend_from_string(const std::string& s) {
  std::string known;
  for (const auto& [k, name] : kBackendNames) {
    if (s == name) return k;
    known += known.empty() ? name : std::string("|") + name;
  }
  throw std::invalid_argument("unknown backend '" + s + "' (" + known + ")");
}

json to_json(const RunConfig& c) {
  const auto& d = c.tn.dmrg;
  const auto& t = c.tn.tdvp;
  return {
      {"backend", to_string(c.backend)},
      {"model", params_json(c.base)},
      {"t_max", c.t_max},
      {"dt", c.dt},
      {"axes", {{"delta", c.axes.delta}, {"L", c.axes.L}, {"g", c.axes.g}}},
      {"dmrg",
       {{"chi_max", d.chi_max},
        {"cutoff", d.cutoff},
        {"max_sweeps", d.max_sweeps},
        {"min_sweeps", d.min_sweeps},
        {"energy_tol", d.energy_tol},
        {"chi_ramp", d.chi_ramp},
        {"init_sector_dim", d.init_sector_dim},
        {"lanczos", lanczos_json(d.lanczos)},
        {"degeneracy_tol", d.degeneracy_tol}}},
      {"tdvp",
       {{"dt", t.dt},
        {"chi_max", t.chi_max},
        {"cutoff", t.cutoff},
        {"mode", tn::to_string(t.mode)},
        {"krylov", krylov_json(t.krylov)},
        {"max_norm_drift", t.max_norm_drift}}},
      {"flip_symmetry", c.tn.flip_symmetry},
      {"ferro_initial", to_string(c.tn.ferro_initial)},
      {"exact",
       {{"max_L", c.exact.max_L},
        {"dense_max_L", c.exact.dense_max_L},
        {"lanczos", lanczos_json(c.exact.lanczos)},
        {"krylov", krylov_json(c.exact.krylov)},
        {"degeneracy_tol", c.exact.degeneracy_tol}}},
      {"pbc",
       {{"prefactor", c.pbc.prefactor},
        {"dispersion_scale", c.pbc.dispersion_scale},
        {"zero_mode", c.pbc.zero_mode == analytic::ZeroModeFill::LowerMomentum ? "lower" : "upper"}}},
      {"ising",
       {{"alpha", {c.ising.alpha.real(), c.ising.alpha.imag()}}, {"beta", {c.ising.beta.real(), c.ising.beta.imag()}}}},
      {"recoherence", {{"marker", analysis::to_string(c.recoherence.marker)}, {"prominence", c.recoherence.prominence}}},
      {"frequency",
       {{"transient", c.frequency.transient},
        {"oversample", c.frequency.oversample},
        {"noise_factor", c.frequency.noise_factor}}},
      {"out_dir", c.out_dir.string()},
      {"seed", c.seed},
      {"workers", c.workers},
      {"paper_scale", c.paper_scale},
  };
}

std::vector<double> parse_axis(const std::string& spec) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in axis '" + spec + "'");
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream in(spec);
    for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("axis range must be start:stop:step, got '" + spec + "'");
    const double a = num(parts[0]), b = num(parts[1]), h = num(parts[2]);
    if (!(h > 0.0) || b < a) throw std::invalid_argument("axis range needs step > 0 and stop >= start: '" + spec + "'");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(a + static_cast<double>(k) * h);
  } else {
    std::istringstream in(spec);
    for (std::string p; std::getline(in, p, ',');) out.push_back(num(p));
  }
  if (out.empty()) throw std::invalid_argument("empty axis '" + spec + "'");
  return out;
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("SPINPROBE_WORKERS"); env && *env) {
    try {
      requested = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("SPINPROBE_WORKERS is not an integer: ") + env);
    }
  }
  return std::max(1, requested);
}

std::vector<ModelParams> expand_points(const RunConfig& c) {
  const std::vector<int> Ls = c.axes.L.empty() ? std::vector<int>{c.base.L} : c.axes.L;
  const std::vector<double> deltas = c.axes.delta.empty() ? std::vector<double>{c.base.delta} : c.axes.delta;
  const std::vector<double> gs = c.axes.g.empty() ? std::vector<double>{c.base.g} : c.axes.g;
  std::vector<ModelParams> pts;
  for (int L : Ls)
    for (double d : deltas)
      for (double g : gs) {
        auto p = c.base;
        p.L = L;
        p.delta = d;
        p.g = g;
        pts.push_back(p);
      }
  return pts;
}

void check_capability(const RunConfig& c, const ModelParams& p) {
  const std::string where = std::string(to_string(c.backend)) + " at " + point_tag(p) + ": ";
  try {
    validate(p);
  } catch (const ModelError& e) {
    throw CapabilityError(where + e.what());
  }
  if (!(c.t_max > 0.0)) throw CapabilityError(where + "t_max must be positive");
  if (!(c.dt > 0.0) || c.dt > c.t_max) throw CapabilityError(where + "dt must lie in (0, t_max]");
  if (uses_exact(c.backend) && p.L > c.exact.max_L) {
    throw CapabilityError(where + "exact diagonalization is limited to L <= " + std::to_string(c.exact.max_L) +
                          "; use tdvp or tcl-tdvp");
  }
  if ((c.backend == Backend::AnalyticPbc || c.backend == Backend::AnalyticObcDet) && p.delta != 0.0) {
    throw CapabilityError(where + "free-fermion backends require delta = 0");
  }
  if (c.backend == Backend::Ising && !(p.delta > 1.0)) {
    throw CapabilityError(where + "the Ising limit applies only to delta > 1");
  }
  if (uses_tn(c.backend)) {
    try {
      tn::substeps_per_sample(TimeGrid::up_to(c.t_max, c.dt), c.tn.tdvp.dt);
    } catch (const std::invalid_argument& e) {
      throw CapabilityError(where + e.what());
    }
  }
}

PointResult run_point(const RunConfig& c, const ModelParams& p) {
  check_capability(c, p);
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = TimeGrid::up_to(c.t_max, c.dt);
  PointResult r;
  r.params = p;
  r.tag = point_tag(p);

  std::optional<tn::TnInitialState> init;
  if (uses_tn(c.backend)) init = tn::prepare_initial_state(p, tn_config(c));

  switch (c.backend) {
    case Backend::Exact: r.trace = ed::coherence_exact(p, grid, exact_options(c)); break;
    case Backend::Tdvp: r.trace = tn::coherence_tdvp(p, tn_config(c), grid, *init); break;
    case Backend::TclExact: {
      r.trace = tcl_coherence(ed::correlation_exact(p, grid, exact_options(c)), p.g).coherence;
      apply_hz_phase(r.trace, p.h_z);
      break;
    }
    case Backend::TclTdvp: {
      r.trace = tcl_coherence(tn::two_time_correlation_mps(p, tn_config(c), grid, *init), p.g).coherence;
      apply_hz_phase(r.trace, p.h_z);
      break;
    }
    case Backend::AnalyticPbc:
      r.trace = analytic::free_fermion_coherence_pbc(p.L, p.J, p.g, grid, c.pbc);
      apply_hz_phase(r.trace, p.h_z);
      break;
    case Backend::AnalyticObcDet: r.trace = analytic::determinant_coherence_delta0(p, grid); break;
    case Backend::Ising:
      r.trace = analytic::ising_coherence(c.ising, p.g, grid);
      apply_hz_phase(r.trace, p.h_z);
      break;
  }
  r.trace.params = p;
  r.trace.backend = to_string(c.backend);

  auto& rep = r.report;
  rep.recoherence = analysis::estimate_recoherence_time(r.trace, c.recoherence);
  rep.t_r = rep.recoherence.t_r;
  rep.omega = analysis::estimate_frequency(r.trace, c.frequency);
  rep.entropy = middle_entropy(c, p, init ? &*init : nullptr);
  r.wall_seconds = seconds_since(t0);
  return r;
}

json report_json(const RunConfig& c, const PointResult& r) {
  json j = {{"tag", r.tag},
            {"backend", to_string(c.backend)},
            {"params", params_json(r.params)},
            {"grid", {{"t_max", c.t_max}, {"dt", c.dt}, {"samples", r.trace.size()}}},
            {"observables", analysis::to_json(r.report)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

SweepOutcome run_sweep(const RunConfig& c, bool write_table, std::ostream* progress) {
  const auto pts = expand_points(c);
  if (pts.empty()) throw CapabilityError("sweep has no parameter points");
  for (const auto& p : pts) check_capability(c, p);
  {
    std::set<std::string> tags;
    for (const auto& p : pts)
      if (!tags.insert(point_tag(p)).second) throw CapabilityError("duplicate sweep point " + point_tag(p));
  }
  fs::create_directories(c.out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  SweepOutcome out;
  out.points.resize(pts.size());
  const int workers = std::min<int>(std::max(1, c.workers), static_cast<int>(pts.size()));
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      auto& slot = out.points[i];
      try {
        slot = run_point(c, pts[i]);
        io::write_coherence_csv(c.out_dir / ("coherence_" + slot.tag + ".csv"), slot.trace);
      } catch (const std::exception& e) {
        slot.params = pts[i];
        slot.tag = point_tag(pts[i]);
        slot.error = e.what();
      }
      if (progress) {
        std::lock_guard lock(log_mutex);
        *progress << "[" << (i + 1) << "/" << pts.size() << "] " << slot.tag
                  << (slot.error.empty() ? " done" : " FAILED: " + slot.error) << '\n'
                  << std::flush;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Linear fits of t_r against L for every (delta, g) with at least three lengths.
  std::map<std::pair<double, double>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto& r = out.points[i];
    if (r.error.empty() && r.report.t_r) groups[{r.params.delta, r.params.g}].push_back(i);
  }
  json fits = json::array();
  for (const auto& [key, idx] : groups) {
    std::set<int> Ls;
    std::vector<std::pair<double, double>> xy;
    for (auto i : idx) {
      Ls.insert(out.points[i].params.L);
      xy.emplace_back(out.points[i].params.L, *out.points[i].report.t_r);
    }
    if (Ls.size() < 3 || Ls.size() != xy.size()) continue;
    std::optional<double> u;
    if (key.first > -1.0 && key.first <= 1.0) u = analytic::spinon_velocity(c.base.J, key.first);
    const auto f = analysis::fit_tr_vs_L(xy, u);
    json jf = {{"delta", key.first}, {"g", key.second}, {"slope", f.slope},      {"intercept", f.intercept},
               {"r2", f.r2},         {"residuals", f.residuals}, {"origin_slope", f.origin_slope},
               {"origin_r2", f.origin_r2}};
    if (f.inverse_velocity) {
      jf["inverse_velocity"] = *f.inverse_velocity;
      jf["slope_rel_dev"] = *f.slope_rel_dev;
    }
    for (auto i : idx) out.points[i].report.fit = jf;
    fits.push_back(jf);
  }

  json points = json::array();
  for (const auto& r : out.points) {
    io::write_json(c.out_dir / ("report_" + r.tag + ".json"), report_json(c, r));
    json d = {{"tag", r.tag}, {"wall_seconds", r.wall_seconds}, {"ok", r.error.empty()}};
    if (r.error.empty()) {
      d["diagnostics"] = r.trace.meta;
    } else {
      d["error"] = r.error;
      out.ok = false;
    }
    points.push_back(d);
  }

  if (write_table) {
    std::ofstream tab(c.out_dir / "observables.csv");
    tab << "L,delta,g,t_r,omega,entropy\n";
    for (const auto& r : out.points) {
      tab << r.params.L << ',' << io::format_double(r.params.delta) << ',' << io::format_double(r.params.g) << ','
          << format_opt(r.report.t_r) << ',' << format_opt(r.report.omega) << ',' << format_opt(r.report.entropy)
          << '\n';
    }
    if (!tab) throw std::runtime_error("failed writing observables.csv");
  }

  out.manifest = {{"version", version_string()},
                  {"config", to_json(c)},
                  {"workers_used", workers},
                  {"wall_seconds", seconds_since(t0)},
                  {"points", points},
                  {"fits", fits},
                  {"ok", out.ok}};
  io::write_json(c.out_dir / "manifest.json", out.manifest);
  return out;
}

json ground_report(const RunConfig& c, const ModelParams& p) {
  validate(p);
  const auto t0 = std::chrono::steady_clock::now();
  json j = {{"params", params_json(p)}};
  const int cut = p.L / 2;
  if (uses_exact(c.backend) || (c.backend != Backend::Tdvp && c.backend != Backend::TclTdvp && p.L <= c.exact.max_L)) {
    if (p.L > c.exact.max_L) throw CapabilityError("exact ground state limited to L <= " + std::to_string(c.exact.max_L));
    const auto gs = ed::ground_state_exact(p, std::nullopt, exact_options(c));
    j["method"] = "exact";
    j["energy"] = gs.energy;
    j["two_sz"] = gs.two_sz;
    j["residual"] = gs.residual;
    j["entropy"] = ed::entanglement_entropy(gs.state, cut);
  } else {
    auto gs = tn::dmrg_ground_state(p, tn_config(c).dmrg);
    j["method"] = "dmrg";
    j["energy"] = gs.energy;
    j["two_sz"] = gs.two_sz;
    j["sweeps"] = gs.sweeps;
    j["energy_history"] = gs.energy_history;
    j["max_discarded"] = gs.max_discarded;
    j["flip_parity"] = gs.flip_parity;
    j["max_bond"] = gs.state.max_bond_dim();
    j["entropy"] = gs.state.entanglement_entropy(cut);
  }
  j["cut"] = cut;
  j["wall_seconds"] = seconds_since(t0);
  return j;
}

json compare_runs(const fs::path& a, const fs::path& b, double threshold) {
  auto traces = [](const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a run directory: " + dir.string());
    std::map<std::string, fs::path> m;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.rfind("coherence_", 0) == 0 && e.path().extension() == ".csv") {
        m[name.substr(10, name.size() - 14)] = e.path();
      }
    }
    if (m.empty()) throw std::runtime_error("no coherence_*.csv files in " + dir.string());
    return m;
  };
  const auto ta = traces(a), tb = traces(b);
  std::string missing;
  for (const auto& [tag, p] : ta)
    if (!tb.count(tag)) missing += "\n  only in " + a.string() + ": " + tag;
  for (const auto& [tag, p] : tb)
    if (!ta.count(tag)) missing += "\n  only in " + b.string() + ": " + tag;
  if (!missing.empty()) throw std::runtime_error("run directories do not match:" + missing);

  json points = json::object();
  double worst = 0.0;
  for (const auto& [tag, pa] : ta) {
    const auto m = analysis::compare_traces(io::read_coherence_csv(pa), io::read_coherence_csv(tb.at(tag)), threshold);
    worst = std::max(worst, m.max_abs);
    points[tag] = analysis::to_json(m);
  }
  return {{"a", a.string()}, {"b", b.string()}, {"threshold", threshold}, {"max_abs_deviation", worst},
          {"points", points}};
}

std::string version_string() { return std::string(SPINPROBE_VERSION) + " (" + SPINPROBE_GIT_DESCRIBE + ")"; }

}  // namespace spinprobe::run
