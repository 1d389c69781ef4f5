// spinprobe: command-line driver for coherence runs, sweeps and checks.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spinprobe/acceptance.hpp"
#include "spinprobe/io.hpp"
#include "spinprobe/run.hpp"

namespace {

using namespace spinprobe;

struct Flags {
  std::string backend{"tdvp"};
  std::string L, delta{"0"}, g{"0.25"};
  double J{1.0}, h_z{0.0};
  int site{0};
  double t_max{60.0}, dt{0.05};
  int chi{128}, dmrg_chi{128};
  double cutoff{1e-10}, dmrg_cutoff{1e-10}, tdvp_dt{0.05};
  std::string tdvp_mode{"auto"};
  bool no_flip{false};
  std::string ferro_initial{"cat"};
  int max_exact_L{14};
  double pbc_prefactor{1.0}, pbc_dispersion{1.0};
  std::string zero_mode{"lower"};
  std::string marker{"onset"};
  double prominence{0.01}, transient{10.0};
  std::string out{"spinprobe_out"};
  unsigned seed{20240611};
  int workers{1};
  bool paper_scale{false};
};

void add_model_options(CLI::App& app, Flags& f) {
  app.add_option("--backend", f.backend, "exact|tdvp|tcl-exact|tcl-tdvp|analytic-pbc|analytic-obc-det|ising")
      ->capture_default_str();
  app.add_option("--L", f.L, "chain length(s): N, a,b,c or start:stop:step (default 48, 100 with --paper-scale)");
  app.add_option("--delta", f.delta, "anisotropy value(s)")->capture_default_str();
  app.add_option("--g", f.g, "qubit-chain coupling value(s)")->capture_default_str();
  app.add_option("--J", f.J, "exchange coupling")->capture_default_str();
  app.add_option("--hz", f.h_z, "qubit splitting")->capture_default_str();
  app.add_option("--site", f.site, "coupled site M, 1-based (0 = L/2)")->capture_default_str();
  app.add_option("--tmax", f.t_max, "final time")->capture_default_str();
  app.add_option("--dt", f.dt, "sampling interval")->capture_default_str();
  app.add_option("--chi", f.chi, "TDVP bond dimension cap")->capture_default_str();
  app.add_option("--cutoff", f.cutoff, "TDVP truncated weight per split")->capture_default_str();
  app.add_option("--tdvp-dt", f.tdvp_dt, "TDVP step (sampling dt must be a multiple)")->capture_default_str();
  app.add_option("--tdvp-mode", f.tdvp_mode, "auto|one_site|two_site")->capture_default_str();
  app.add_option("--dmrg-chi", f.dmrg_chi, "DMRG bond dimension cap")->capture_default_str();
  app.add_option("--dmrg-cutoff", f.dmrg_cutoff, "DMRG truncated weight")->capture_default_str();
  app.add_flag("--no-flip-symmetry", f.no_flip, "always evolve both branches");
  app.add_option("--ferro-initial", f.ferro_initial, "initial state for delta <= -1: cat|up|down")
      ->capture_default_str();
  app.add_option("--max-exact-L", f.max_exact_L, "largest L accepted by the exact backends")->capture_default_str();
  app.add_option("--pbc-prefactor", f.pbc_prefactor, "prefactor c of the periodic closed form")->capture_default_str();
  app.add_option("--pbc-dispersion-scale", f.pbc_dispersion, "eps(k) = scale * J cos k")->capture_default_str();
  app.add_option("--zero-mode", f.zero_mode, "periodic zero-mode filling: lower|upper")->capture_default_str();
  app.add_option("--marker", f.marker, "recoherence marker: onset|peak")->capture_default_str();
  app.add_option("--prominence", f.prominence, "minimum revival rise / |rho01(0)|")->capture_default_str();
  app.add_option("--transient", f.transient, "samples before this time are ignored by the frequency fit")
      ->capture_default_str();
  app.add_option("--out", f.out, "output directory")->capture_default_str();
  app.add_option("--seed", f.seed, "eigensolver start seed")->capture_default_str();
  app.add_option("--workers", f.workers, "parallel sweep points (SPINPROBE_WORKERS overrides)")->capture_default_str();
  app.add_flag("--paper-scale", f.paper_scale, "default L = 100");
}

run::RunConfig make_config(const Flags& f) {
  run::RunConfig c;
  c.backend = run::backend_from_string(f.backend);
  c.base.J = f.J;
  c.base.h_z = f.h_z;
  c.base.coupled_site = f.site;
  c.paper_scale = f.paper_scale;
  c.base.L = f.paper_scale ? 100 : 48;
  if (!f.L.empty()) {
    for (double x : run::parse_axis(f.L)) {
      if (x != static_cast<int>(x)) throw std::invalid_argument("--L values must be integers");
      c.axes.L.push_back(static_cast<int>(x));
    }
  } else {
    c.axes.L = {c.base.L};
  }
  c.axes.delta = run::parse_axis(f.delta);
  c.axes.g = run::parse_axis(f.g);
  c.base.L = c.axes.L.front();
  c.base.delta = c.axes.delta.front();
  c.base.g = c.axes.g.front();
  c.t_max = f.t_max;
  c.dt = f.dt;
  c.tn.tdvp.chi_max = f.chi;
  c.tn.tdvp.cutoff = f.cutoff;
  c.tn.tdvp.dt = f.tdvp_dt;
  c.tn.tdvp.mode = tn::tdvp_mode_from_string(f.tdvp_mode);
  c.tn.dmrg.chi_max = f.dmrg_chi;
  c.tn.dmrg.cutoff = f.dmrg_cutoff;
  c.tn.flip_symmetry = !f.no_flip;
  c.tn.ferro_initial = ferro_initial_from_string(f.ferro_initial);
  c.exact.ferro_initial = c.tn.ferro_initial;
  c.exact.max_L = f.max_exact_L;
  c.pbc.prefactor = f.pbc_prefactor;
  c.pbc.dispersion_scale = f.pbc_dispersion;
  if (f.zero_mode == "lower") {
    c.pbc.zero_mode = analytic::ZeroModeFill::LowerMomentum;
  } else if (f.zero_mode == "upper") {
    c.pbc.zero_mode = analytic::ZeroModeFill::UpperMomentum;
  } else {
    throw std::invalid_argument("--zero-mode must be lower or upper");
  }
  c.recoherence.marker = analysis::revival_marker_from_string(f.marker);
  c.recoherence.prominence = f.prominence;
  c.frequency.transient = f.transient;
  c.out_dir = f.out;
  c.seed = f.seed;
  c.workers = run::resolve_workers(f.workers);
  return c;
}

int do_sweep(const Flags& f, bool table) {
  const auto c = make_config(f);
  const auto res = run::run_sweep(c, table, &std::cerr);
  std::cout << "wrote " << res.points.size() << " point(s) to " << c.out_dir.string() << '\n';
  for (const auto& p : res.points) {
    if (!p.error.empty()) continue;
    auto show = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string("-"); };
    std::cout << "  " << p.tag << "  t_r=" << show(p.report.t_r) << "  omega=" << show(p.report.omega)
              << "  S=" << show(p.report.entropy) << '\n';
  }
  return res.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-qubit decoherence as a probe of an XXZ chain"};
  app.set_config("--config", "", "TOML file with option values (command-line flags override)");
  app.set_version_flag("--version", run::version_string());
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  add_model_options(app, f);

  auto* run_cmd = app.add_subcommand("run", "one coherence run per parameter point");
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep with an observables.csv table");
  auto* ground_cmd = app.add_subcommand("ground", "ground-state energy and middle-bond entropy only");

  auto* compare_cmd = app.add_subcommand("compare", "compare two run directories point by point");
  std::string dir_a, dir_b, metrics_out;
  double threshold = 1e-3;
  compare_cmd->add_option("dir_a", dir_a)->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("dir_b", dir_b)->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--threshold", threshold, "first-divergence threshold")->capture_default_str();
  compare_cmd->add_option("--metrics", metrics_out, "write the metrics JSON here as well");

  auto* verify_cmd = app.add_subcommand("verify", "run the oracle cross-check suite");
  std::vector<int> only;
  bool skip_slow = false;
  verify_cmd->add_option("--criterion", only, "run only these criteria");
  verify_cmd->add_flag("--skip-slow", skip_slow, "skip the long-running criteria");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_sweep(f, false);
    if (*sweep_cmd) return do_sweep(f, true);
    if (*ground_cmd) {
      const auto c = make_config(f);
      auto all = nlohmann::json::array();
      for (const auto& p : run::expand_points(c)) all.push_back(run::ground_report(c, p));
      std::cout << all.dump(2) << '\n';
      return 0;
    }
    if (*compare_cmd) {
      const auto m = run::compare_runs(dir_a, dir_b, threshold);
      if (!metrics_out.empty()) io::write_json(metrics_out, m);
      std::cout << m.dump(2) << '\n';
      return 0;
    }
    if (*verify_cmd) {
      acceptance::Options opt;
      opt.only = only;
      opt.skip_slow = skip_slow;
      const auto results = acceptance::run_all(opt, std::cout, &std::cerr);
      return acceptance::all_passed(results) ? 0 : 1;
    }
  } catch (const run::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
