#include "doctest.h"

#include <cmath>

#include "spinprobe/analysis.hpp"
#include "spinprobe/analytic.hpp"

using namespace spinprobe;
using namespace spinprobe::analysis;

namespace {

CoherenceTrace make_trace(double t_max, double dt, const std::function<double(double)>& f) {
  CoherenceTrace tr;
  tr.t = TimeGrid::up_to(t_max, dt).times();
  for (double t : tr.t) tr.rho01.emplace_back(f(t), 0.0);
  return tr;
}

double bump_signal(double t) { return 0.5 * (std::exp(-t / 5.0) + 0.2 * std::exp(-0.5 * (t - 30.0) * (t - 30.0) / 4.0)); }

}  // namespace

TEST_CASE("recoherence time") {
  SUBCASE("monotone decay has no revival") {
    const auto est = estimate_recoherence_time(make_trace(60, 0.05, [](double t) { return 0.5 * std::exp(-t / 5.0); }));
    CHECK_FALSE(est.t_r);
    CHECK_FALSE(est.reason.empty());
  }
  SUBCASE("synthetic revival peak") {
    RecoherenceConfig peak;
    peak.marker = RevivalMarker::Peak;
    peak.prominence = 0.05;
    for (double dt : {0.05, 0.025, 0.0125}) {
      const auto est = estimate_recoherence_time(make_trace(60, dt, bump_signal), peak);
      REQUIRE(est.t_r);
      CHECK(std::abs(*est.t_r - 30.0) <= dt);
      CHECK(est.rise > 0.15);
    }
  }
  SUBCASE("onset marks the minimum before the rise") {
    const auto coarse = estimate_recoherence_time(make_trace(60, 0.05, bump_signal));
    const auto fine = estimate_recoherence_time(make_trace(60, 0.0125, bump_signal));
    REQUIRE(coarse.t_r);
    REQUIRE(fine.t_r);
    CHECK(*coarse.t_r > 20.0);
    CHECK(*coarse.t_r < 30.0);
    CHECK(std::abs(*coarse.t_r - *fine.t_r) <= 0.05);
  }
  SUBCASE("wiggles below the prominence threshold are ignored") {
    const auto tr = make_trace(60, 0.05, [](double t) { return 0.5 * std::exp(-t / 20.0) + 1e-4 * std::sin(3.0 * t); });
    CHECK_FALSE(estimate_recoherence_time(tr).t_r);
  }
  SUBCASE("peak beyond the trace end") {
    RecoherenceConfig peak;
    peak.marker = RevivalMarker::Peak;
    const auto est = estimate_recoherence_time(make_trace(29, 0.05, bump_signal), peak);
    CHECK_FALSE(est.t_r);
    CHECK(est.t_min > 0.0);
  }
  CHECK(revival_marker_from_string("peak") == RevivalMarker::Peak);
  CHECK_THROWS_AS(revival_marker_from_string("top"), std::invalid_argument);
}

TEST_CASE("frequency estimation") {
  const auto cosine = make_trace(400, 0.05, [](double t) { return std::cos(0.125 * t); });
  const auto w = estimate_frequency(cosine);
  REQUIRE(w);
  CHECK(std::abs(*w - 0.125) <= 1e-3);
  CHECK_FALSE(estimate_frequency(make_trace(400, 0.05, [](double) { return 0.5; })));
  const auto scaled = make_trace(400, 0.05, [](double t) { return 0.3 + 7.0 * std::cos(0.125 * t); });
  CHECK(*estimate_frequency(scaled) == doctest::Approx(*w).epsilon(1e-12));
  const auto ising = analytic::ising_coherence({}, 0.25, TimeGrid::up_to(400, 0.05));
  CHECK(std::abs(*estimate_frequency(ising) - 0.125) <= 1e-3);
  for (double f : {0.05, 0.3, 1.7}) {
    const auto tr = make_trace(400, 0.05, [&](double t) { return 0.5 * std::cos(f * t + 0.4) + 0.05 * std::cos(3.1 * t); });
    CHECK(std::abs(*estimate_frequency(tr) - f) <= 1e-3);
  }
}

TEST_CASE("linear fit of t_r against L") {
  const auto f = fit_tr_vs_L({{24, 16.8}, {32, 22.4}, {40, 28.0}, {48, 33.6}}, 1.0 / 0.7);
  CHECK(f.slope == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::abs(f.intercept) <= 1e-10);
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.origin_slope == doctest::Approx(0.7).epsilon(1e-12));
  for (double r : f.residuals) CHECK(std::abs(r) <= 1e-10);
  CHECK(*f.slope_rel_dev <= 1e-12);
  const auto noisy = fit_tr_vs_L({{24, 17.5}, {32, 21.0}, {40, 29.0}, {48, 33.0}});
  CHECK(noisy.r2 > 0.9);
  CHECK(noisy.r2 < 1.0);
  CHECK_THROWS_AS(fit_tr_vs_L({{24, 1}, {32, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_tr_vs_L({{24, 1}, {24, 2}, {24, 3}}), std::invalid_argument);
}

TEST_CASE("trace comparison") {
  const auto a = make_trace(20, 0.05, [](double t) { return 0.5 * std::cos(0.3 * t); });
  auto c = compare_traces(a, a);
  CHECK(c.max_abs == 0.0);
  CHECK(c.l2 == 0.0);
  CHECK_FALSE(c.first_divergence);
  const auto b = make_trace(20, 0.05, [](double t) { return 0.5 * std::cos(0.3 * t) + 0.01; });
  c = compare_traces(a, b);
  CHECK(c.max_abs == doctest::Approx(0.01));
  CHECK(c.l2 == doctest::Approx(0.01 * std::sqrt(20.0)));
  CHECK(*c.first_divergence == 0.0);
  const auto fine = make_trace(20, 0.025, [](double t) { return 0.5 * std::cos(0.3 * t); });
  c = compare_traces(a, fine);
  CHECK(c.resampled);
  CHECK(c.max_abs <= 1e-4);
  CHECK_THROWS_AS(compare_traces(a, [] {
                    CoherenceTrace late;
                    late.t = {30.0, 31.0};
                    late.rho01 = {0.5, 0.5};
                    return late;
                  }()),
                  std::invalid_argument);
}
