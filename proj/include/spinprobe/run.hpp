// run.hpp: backend dispatch, parameter sweeps and on-disk artifacts.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinprobe/analysis.hpp"
#include "spinprobe/analytic.hpp"
#include "spinprobe/ed/exact.hpp"
#include "spinprobe/tn/dynamics.hpp"

namespace spinprobe::run {

enum class Backend { Exact, Tdvp, TclExact, TclTdvp, AnalyticPbc, AnalyticObcDet, Ising };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

/// A backend cannot handle the requested parameters. Raised before any work.
class CapabilityError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct SweepAxes {
  std::vector<double> delta;
  std::vector<int> L;
  std::vector<double> g;
};

struct RunConfig {
  ModelParams base;  // J, h_z, coupled site and the defaults for unswept axes
  Backend backend{Backend::Tdvp};
  double t_max{60.0};
  double dt{0.05};  // sampling interval
  SweepAxes axes;
  tn::TnConfig tn;
  ed::ExactOptions exact;
  analytic::PbcOptions pbc;
  analytic::IsingAmplitudes ising;
  analysis::RecoherenceConfig recoherence;
  analysis::FrequencyConfig frequency;
  std::filesystem::path out_dir{"spinprobe_out"};
  unsigned seed{20240611};
  int workers{1};  // callers apply resolve_workers
  bool paper_scale{false};
};

/// Every setting, defaults included, as recorded in manifests.
nlohmann::json to_json(const RunConfig& c);

/// "a:b:step" (inclusive) or a comma-separated list.
std::vector<double> parse_axis(const std::string& spec);

/// Worker count after the SPINPROBE_WORKERS override; at least 1.
int resolve_workers(int requested);

/// Parameter points in sweep order (L, then delta, then g).
std::vector<ModelParams> expand_points(const RunConfig& c);

/// Throws CapabilityError when the backend cannot run this point.
void check_capability(const RunConfig& c, const ModelParams& p);

struct PointResult {
  ModelParams params;
  std::string tag;
  CoherenceTrace trace;
  analysis::ObservableReport report;
  double wall_seconds{0.0};
  std::string error;
};

/// Computes one coherence trace and its observables (no I/O).
PointResult run_point(const RunConfig& c, const ModelParams& p);

/// Report JSON of one point (deterministic: no timings).
nlohmann::json report_json(const RunConfig& c, const PointResult& r);

struct SweepOutcome {
  std::vector<PointResult> points;
  nlohmann::json manifest;
  bool ok{true};
};

/// Runs every point on a worker pool and writes coherence_<tag>.csv,
/// report_<tag>.json and manifest.json (plus observables.csv when
/// `write_table`). Capability checks for all points happen first.
SweepOutcome run_sweep(const RunConfig& c, bool write_table, std::ostream* progress = nullptr);

/// Ground state only: energy, sector and middle-bond entropy.
nlohmann::json ground_report(const RunConfig& c, const ModelParams& p);

/// compare_traces for every point present in both run directories.
/// Throws std::runtime_error listing unmatched points.
nlohmann::json compare_runs(const std::filesystem::path& a, const std::filesystem::path& b, double threshold = 1e-3);

/// Library version and source revision.
std::string version_string();

}  // namespace spinprobe::run
