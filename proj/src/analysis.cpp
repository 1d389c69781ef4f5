#include "spinprobe/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace spinprobe::analysis {

namespace {

// Vertex of the parabola through (x-1, ym), (x, y0), (x+1, yp) as an offset in [-1/2, 1/2].
double vertex_offset(double ym, double y0, double yp) {
  const double den = ym - 2.0 * y0 + yp;
  if (den == 0.0) return 0.0;
  return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
}

// The FFTW planner is not thread-safe; only fftw_execute is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlan {
  fftw_plan plan{nullptr};
  ~FftwPlan() {
    if (!plan) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
};

}  // namespace

const char* to_string(RevivalMarker m) { return m == RevivalMarker::Onset ? "onset" : "peak"; }

RevivalMarker revival_marker_from_string(const std::string& s) {
  if (s == "onset") return RevivalMarker::Onset;
  if (s == "peak") return RevivalMarker::Peak;
  throw std::invalid_argument("unknown revival marker '" + s + "' (onset|peak)");
}

RecoherenceEstimate estimate_recoherence_time(const CoherenceTrace& trace, const RecoherenceConfig& cfg) {
  RecoherenceEstimate est;
  const std::size_t n = trace.size();
  if (n < 3) {
    est.reason = "trace too short";
    return est;
  }
  const double dt = uniform_spacing(trace.t);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = std::abs(trace.rho01[k]);
  const double need = cfg.prominence * y[0];

  for (std::size_t m = 1; m + 1 < n; ++m) {
    if (!(y[m] <= y[m - 1] && y[m] < y[m + 1])) continue;
    // Follow the rise until the signal falls back below the minimum.
    std::size_t peak = m;
    bool peaked = false;
    for (std::size_t k = m + 1; k < n && y[k] >= y[m]; ++k) {
      if (y[k] > y[peak]) peak = k;
      if (k + 1 < n && y[k] >= y[k - 1] && y[k] > y[k + 1] && y[k] - y[m] >= need) {
        peaked = true;
        break;
      }
    }
    const double rise = y[peak] - y[m];
    if (rise < need) continue;
    est.t_min = trace.t[m] + dt * vertex_offset(y[m - 1], y[m], y[m + 1]);
    est.rise = y[0] > 0.0 ? rise / y[0] : 0.0;
    if (cfg.marker == RevivalMarker::Onset) {
      est.t_r = est.t_min;
    } else if (peaked) {
      est.t_r = trace.t[peak] + dt * vertex_offset(y[peak - 1], y[peak], y[peak + 1]);
    } else {
      est.reason = "revival still rising at the end of the trace";
    }
    return est;
  }
  est.reason = "no revival above the prominence threshold";
  return est;
}

std::optional<double> estimate_frequency(const std::vector<double>& t, const std::vector<double>& y,
                                         const FrequencyConfig& cfg) {
  if (t.size() != y.size()) throw std::invalid_argument("estimate_frequency: size mismatch");
  const double dt = uniform_spacing(t);
  const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), cfg.transient - 0.5 * dt) - t.begin());
  if (t.size() < first + 16) return std::nullopt;
  const std::size_t n = t.size() - first;
  std::vector<double> x(y.begin() + static_cast<std::ptrdiff_t>(first), y.end());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double& v : x) {
    v -= mean;
    spread = std::max(spread, std::abs(v));
  }
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) return std::nullopt;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
  }

  std::size_t nfft = 1;
  while (nfft < n * static_cast<std::size_t>(std::max(1, cfg.oversample))) nfft <<= 1;
  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(nfft), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(nfft / 2 + 1), &fftw_free);
  FftwPlan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::fill(in.get(), in.get() + nfft, 0.0);
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.plan);

  const std::size_t bins = nfft / 2 + 1;
  std::vector<double> mag(bins);
  for (std::size_t b = 0; b < bins; ++b) mag[b] = std::hypot(out.get()[b][0], out.get()[b][1]);
  const auto peak = static_cast<std::size_t>(std::max_element(mag.begin() + 1, mag.end()) - mag.begin());
  std::vector<double> sorted(mag.begin() + 1, mag.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (!(mag[peak] > cfg.noise_factor * median) || peak + 1 >= bins) return std::nullopt;
  const double off = vertex_offset(std::log(mag[peak - 1]), std::log(mag[peak]), std::log(mag[peak + 1]));
  const double omega = 2.0 * std::numbers::pi * (static_cast<double>(peak) + off) / (static_cast<double>(nfft) * dt);
  if (!(omega > 0.0)) return std::nullopt;
  return omega;
}

std::optional<double> estimate_frequency(const CoherenceTrace& trace, const FrequencyConfig& cfg) {
  std::vector<double> re(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) re[k] = trace.rho01[k].real();
  return estimate_frequency(trace.t, re, cfg);
}

LinearFit fit_tr_vs_L(const std::vector<std::pair<double, double>>& points, std::optional<double> u_s) {
  if (points.size() < 3) throw std::invalid_argument("fit_tr_vs_L: need at least three points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vxx = sxx - sx * sx / n, vxy = sxy - sx * sy / n, vyy = syy - sy * sy / n;
  if (!(vxx > 1e-12 * std::max(1.0, sxx))) throw std::invalid_argument("fit_tr_vs_L: degenerate abscissae");
  LinearFit f;
  f.slope = vxy / vxx;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0.0, ss_origin = 0.0;
  f.origin_slope = sxy / sxx;
  for (const auto& [x, y] : points) {
    const double r = y - (f.slope * x + f.intercept);
    f.residuals.push_back(r);
    ss_res += r * r;
    const double ro = y - f.origin_slope * x;
    ss_origin += ro * ro;
  }
  auto r2 = [&](double ss) { return vyy > 0.0 ? std::clamp(1.0 - ss / vyy, 0.0, 1.0) : (ss <= 1e-24 ? 1.0 : 0.0); };
  f.r2 = r2(ss_res);
  f.origin_r2 = r2(ss_origin);
  if (u_s) {
    if (!(*u_s > 0.0)) throw std::invalid_argument("fit_tr_vs_L: velocity must be positive");
    f.inverse_velocity = 1.0 / *u_s;
    f.slope_rel_dev = std::abs(f.slope * *u_s - 1.0);
  }
  return f;
}

TraceComparison compare_traces(const CoherenceTrace& a, const CoherenceTrace& b, double threshold) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("compare_traces: empty trace");
  TraceComparison c;
  c.threshold = threshold;
  const bool same = a.t.size() == b.t.size() && std::equal(a.t.begin(), a.t.end(), b.t.begin(), [](double x, double y) {
                      return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x));
                    });
  std::vector<double> t;
  std::vector<cplx> d;
  if (same) {
    t = a.t;
    for (std::size_t k = 0; k < a.size(); ++k) d.push_back(a.rho01[k] - b.rho01[k]);
  } else {
    c.resampled = true;
    const double lo = std::max(a.t.front(), b.t.front()), hi = std::min(a.t.back(), b.t.back());
    if (!(hi >= lo) || b.size() < 2) throw std::invalid_argument("compare_traces: time grids do not overlap");
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double x = a.t[k];
      if (x < lo - 1e-12 || x > hi + 1e-12) continue;
      auto it = std::upper_bound(b.t.begin(), b.t.end(), x);
      std::size_t j = static_cast<std::size_t>(it - b.t.begin());
      j = std::clamp<std::size_t>(j, 1, b.size() - 1);
      const double w = (x - b.t[j - 1]) / (b.t[j] - b.t[j - 1]);
      t.push_back(x);
      d.push_back(a.rho01[k] - ((1.0 - w) * b.rho01[j - 1] + w * b.rho01[j]));
    }
    if (t.empty()) throw std::invalid_argument("compare_traces: time grids do not overlap");
  }
  c.samples = t.size();
  double l2 = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = std::abs(d[k]);
    c.max_abs = std::max(c.max_abs, e);
    if (!c.first_divergence && e > threshold) c.first_divergence = t[k];
    if (k > 0) l2 += 0.5 * (t[k] - t[k - 1]) * (std::norm(d[k - 1]) + std::norm(d[k]));
  }
  c.l2 = std::sqrt(l2);
  return c;
}

nlohmann::json to_json(const TraceComparison& c) {
  nlohmann::json j = {{"max_abs_deviation", c.max_abs}, {"l2_deviation", c.l2},   {"threshold", c.threshold},
                      {"resampled", c.resampled},       {"samples", c.samples}, {"first_divergence", nullptr}};
  if (c.first_divergence) j["first_divergence"] = *c.first_divergence;
  return j;
}

nlohmann::json to_json(const ObservableReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"t_r", opt(r.t_r)},
                      {"omega", opt(r.omega)},
                      {"entropy", opt(r.entropy)},
                      {"recoherence", {{"t_min", r.recoherence.t_min}, {"rise", r.recoherence.rise}}},
                      {"fit", r.fit}};
  if (!r.recoherence.reason.empty()) j["recoherence"]["reason"] = r.recoherence.reason;
  if (r.comparison) j["comparison"] = to_json(*r.comparison);
  return j;
}

}  // namespace spinprobe::analysis
