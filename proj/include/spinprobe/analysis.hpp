// analysis.hpp: observables extracted from coherence traces.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinprobe/traces.hpp"

namespace spinprobe::analysis {

/// Which feature of the revival defines t_r.
///  Onset: the minimum of |rho01| that precedes the first prominent rise,
///         i.e. the moment the reflected perturbation returns to the qubit.
///  Peak:  the first local maximum of that rise.
enum class RevivalMarker { Onset, Peak };

const char* to_string(RevivalMarker m);
RevivalMarker revival_marker_from_string(const std::string& s);

struct RecoherenceConfig {
  RevivalMarker marker{RevivalMarker::Onset};
  /// Minimum rise above the preceding minimum, as a fraction of |rho01(0)|.
  double prominence{0.01};
};

struct RecoherenceEstimate {
  std::optional<double> t_r;
  double t_min{0.0};  // time of the minimum that starts the revival
  double rise{0.0};   // largest rise above it, in units of |rho01(0)|
  std::string reason;  // why t_r is absent
};

RecoherenceEstimate estimate_recoherence_time(const CoherenceTrace& trace, const RecoherenceConfig& cfg = {});

struct FrequencyConfig {
  double transient{10.0};
  /// Zero padding factor of the FFT length over the analysed samples.
  int oversample{16};
  /// The peak must exceed this multiple of the median spectral magnitude.
  double noise_factor{10.0};
};

/// Dominant angular frequency of Re rho01 after the transient: Hann window,
/// zero-padded FFT, parabolic refinement of the log magnitude.
std::optional<double> estimate_frequency(const CoherenceTrace& trace, const FrequencyConfig& cfg = {});
std::optional<double> estimate_frequency(const std::vector<double>& t, const std::vector<double>& y,
                                         const FrequencyConfig& cfg = {});

struct LinearFit {
  double slope{0.0};
  double intercept{0.0};
  double r2{0.0};
  std::vector<double> residuals;
  /// Fit constrained through the origin.
  double origin_slope{0.0};
  double origin_r2{0.0};
  /// Comparison with the spinon transit time per site 1/u_s (when supplied).
  std::optional<double> inverse_velocity;
  std::optional<double> slope_rel_dev;  // |slope * u_s - 1|
};

/// Least-squares line through (L, t_r); needs >= 3 points with distinct L.
LinearFit fit_tr_vs_L(const std::vector<std::pair<double, double>>& points, std::optional<double> u_s = {});

struct TraceComparison {
  double max_abs{0.0};
  double l2{0.0};  // sqrt(int |a - b|^2 dt)
  std::optional<double> first_divergence;  // first t with |a - b| > threshold
  double threshold{0.0};
  bool resampled{false};
  std::size_t samples{0};
};

/// Compares rho01 on a's grid; b is linearly interpolated if the grids differ.
/// Throws std::invalid_argument when the time ranges do not overlap.
TraceComparison compare_traces(const CoherenceTrace& a, const CoherenceTrace& b, double threshold = 1e-3);

struct ObservableReport {
  std::optional<double> t_r;
  std::optional<double> omega;
  std::optional<double> entropy;
  RecoherenceEstimate recoherence;
  nlohmann::json fit = nlohmann::json::object();
  std::optional<TraceComparison> comparison;
};

nlohmann::json to_json(const TraceComparison& c);
nlohmann::json to_json(const ObservableReport& r);

}  // namespace spinprobe::analysis
