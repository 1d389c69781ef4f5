// tcl.hpp: second-order time-convolutionless coherence from a chain correlator.

#pragma once

#include <vector>

#include "spinprobe/traces.hpp"

namespace spinprobe {

struct TclResult {
  CoherenceTrace coherence;
  /// A(tau) = 2 int_0^tau Re C.
  std::vector<double> A;
  /// Gamma(t) = (g^2/2) int_0^t A; coherence = rho0 exp(-Gamma).
  std::vector<double> gamma;
};

/// Integrates the second-order TCL equation for pure dephasing by cumulative
/// trapezoid. `corr` must be sampled uniformly from t = 0; throws
/// std::invalid_argument otherwise.
TclResult tcl_coherence(const CorrelationTrace& corr, double g, cplx rho0 = 0.5);

/// Same quadrature without the coupling: returns int_0^t A for every sample.
std::vector<double> tcl_double_integral(const CorrelationTrace& corr);

struct MarkovReport {
  double window_start{0.0};
  double window_end{0.0};
  double mean_A{0.0};     // time average of A over the window
  double max_abs_A{0.0};  // over the whole trace
  double ratio{0.0};      // |mean_A| / max_abs_A (0 when A vanishes)
};

/// A(T) averaged over [t_max - window, t_max], the rate a Markov
/// approximation would assign. Throws if the window exceeds the trace.
double markov_diagnostic(const CorrelationTrace& corr, double window);

/// Average of A over an explicit window [t0, t1] inside the trace.
MarkovReport markov_report(const CorrelationTrace& corr, double t0, double t1);

}  // namespace spinprobe
