#include "spinprobe/tcl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinprobe {

namespace {

std::vector<double> kernel_A(const CorrelationTrace& corr, double dt) {
  std::vector<double> a(corr.size(), 0.0);
  for (std::size_t k = 1; k < a.size(); ++k) a[k] = a[k - 1] + dt * (corr.c[k - 1].real() + corr.c[k].real());
  return a;
}

double checked_spacing(const CorrelationTrace& corr) {
  if (corr.c.size() != corr.t.size()) throw std::invalid_argument("TCL: correlator samples and times differ in length");
  if (corr.size() < 2) throw std::invalid_argument("TCL: correlator needs at least two samples");
  return uniform_spacing(corr.t);
}

}  // namespace

std::vector<double> tcl_double_integral(const CorrelationTrace& corr) {
  const double dt = checked_spacing(corr);
  const auto a = kernel_A(corr, dt);
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t k = 1; k < a.size(); ++k) out[k] = out[k - 1] + 0.5 * dt * (a[k - 1] + a[k]);
  return out;
}

TclResult tcl_coherence(const CorrelationTrace& corr, double g, cplx rho0) {
  const double dt = checked_spacing(corr);
  TclResult r;
  r.A = kernel_A(corr, dt);
  r.gamma = tcl_double_integral(corr);
  const double scale = 0.5 * g * g;
  for (auto& x : r.gamma) x *= scale;

  auto& tr = r.coherence;
  tr.backend = "tcl-" + corr.backend;
  tr.params.g = g;
  tr.t = corr.t;
  tr.rho01.resize(corr.size());
  for (std::size_t k = 0; k < corr.size(); ++k) tr.rho01[k] = rho0 * std::exp(-r.gamma[k]);
  tr.meta = {{"order", 2}, {"quadrature", "cumulative_trapezoid"}, {"dt", dt}, {"correlator", corr.meta}};
  return r;
}

MarkovReport markov_report(const CorrelationTrace& corr, double t0, double t1) {
  const double dt = checked_spacing(corr);
  if (!(t1 > t0) || t0 < -0.5 * dt || t1 > corr.t.back() + 0.5 * dt) {
    throw std::invalid_argument("markov_diagnostic: window lies outside the correlator trace");
  }
  const auto a = kernel_A(corr, dt);
  const auto k0 = static_cast<std::size_t>(std::lround(t0 / dt));
  const auto k1 = static_cast<std::size_t>(std::lround(t1 / dt));
  MarkovReport m;
  m.window_start = corr.t[k0];
  m.window_end = corr.t[k1];
  if (k1 == k0) {
    m.mean_A = a[k0];
  } else {
    double s = 0.0;
    for (std::size_t k = k0; k < k1; ++k) s += 0.5 * (a[k] + a[k + 1]);
    m.mean_A = s / static_cast<double>(k1 - k0);
  }
  for (double x : a) m.max_abs_A = std::max(m.max_abs_A, std::abs(x));
  m.ratio = m.max_abs_A > 0.0 ? std::abs(m.mean_A) / m.max_abs_A : 0.0;
  return m;
}

double markov_diagnostic(const CorrelationTrace& corr, double window) {
  checked_spacing(corr);
  const double t_end = corr.t.back();
  if (!(window > 0.0) || window > t_end * (1.0 + 1e-12)) {
    throw std::invalid_argument("markov_diagnostic: window longer than the correlator trace");
  }
  return markov_report(corr, std::max(0.0, t_end - window), t_end).mean_A;
}

}  // namespace spinprobe
