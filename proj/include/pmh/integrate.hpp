#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "pmh/errors.hpp"
#include "pmh/types.hpp"

namespace pmh {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-9;
  bool fixed_step = false;
  double dt = 1e-3;          // fixed-step target (actual step divides each segment)
  double h_min = 1e-13;
  double h_init = 0.0;       // 0 -> auto
  std::int64_t max_steps = 200000000;
};

struct IntegratorStats {
  std::int64_t steps = 0;
  std::int64_t rejected = 0;
};

namespace detail {

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
  const auto scale =
      atol + rtol * y0.cwiseAbs().array().max(y1.cwiseAbs().array());
  const double sum = (err.cwiseAbs().array() / scale).square().sum();
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace detail

// Dormand-Prince 5(4) with FSAL and PI-free standard step control. The
// integrator lands exactly on every requested output time; `hard_points`
// (optional, sorted) are additional times a step may not cross, used to keep
// steps aligned with piecewise-defined right-hand sides.
//
// RHS signature: f(double t, const State& y, State& dydt).
// Observer signature: obs(int output_index, double t, const State& y).
template <class State, class RHS, class Observer>
IntegratorStats integrate_adaptive(RHS&& f, State y, double t_begin,
                                   const std::vector<double>& t_out, Observer&& observe,
                                   const IntegratorConfig& config = {},
                                   const std::vector<double>* hard_points = nullptr) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegratorStats stats;
  double t = t_begin;
  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, y_try = y, err = y;
  f(t, y, k1);
  bool k1_fresh = true;

  double h = config.h_init;
  if (h <= 0.0) h = std::max(config.h_min * 10.0, 1e-4);

  std::size_t hard_idx = 0;
  auto next_hard = [&](double now) {
    if (!hard_points) return std::numeric_limits<double>::infinity();
    while (hard_idx < hard_points->size() && (*hard_points)[hard_idx] <= now + 1e-14)
      ++hard_idx;
    return hard_idx < hard_points->size() ? (*hard_points)[hard_idx]
                                          : std::numeric_limits<double>::infinity();
  };

  for (std::size_t out = 0; out < t_out.size(); ++out) {
    const double t_target = t_out[out];
    if (t_target <= t + 1e-14) {
      observe(static_cast<int>(out), t, y);
      continue;
    }
    while (t < t_target - 1e-14) {
      if (stats.steps > config.max_steps) throw IntegratorFailure("step budget exhausted");
      double h_step = std::min({h, t_target - t, next_hard(t) - t});
      if (h_step < config.h_min) throw IntegratorFailure("step size underflow");
      if (!k1_fresh) {
        f(t, y, k1);
        k1_fresh = true;
      }

      y_try = y + (h_step * a21) * k1;
      f(t + h_step * a21, y_try, k2);
      y_try = y + (h_step * a31) * k1 + (h_step * a32) * k2;
      f(t + h_step * 0.3, y_try, k3);
      y_try = y + (h_step * a41) * k1 + (h_step * a42) * k2 + (h_step * a43) * k3;
      f(t + h_step * 0.8, y_try, k4);
      y_try = y + (h_step * a51) * k1 + (h_step * a52) * k2 + (h_step * a53) * k3 +
              (h_step * a54) * k4;
      f(t + h_step * (8.0 / 9.0), y_try, k5);
      y_try = y + (h_step * a61) * k1 + (h_step * a62) * k2 + (h_step * a63) * k3 +
              (h_step * a64) * k4 + (h_step * a65) * k5;
      f(t + h_step, y_try, k6);
      y_try = y + (h_step * b1) * k1 + (h_step * b3) * k3 + (h_step * b4) * k4 +
              (h_step * b5) * k5 + (h_step * b6) * k6;
      f(t + h_step, y_try, k7);

      err = (h_step * e1) * k1 + (h_step * e3) * k3 + (h_step * e4) * k4 +
            (h_step * e5) * k5 + (h_step * e6) * k6 + (h_step * e7) * k7;
      const double scaled = detail::error_norm(err, y, y_try, config.rtol, config.atol);
      ++stats.steps;
      if (scaled <= 1.0) {
        t += h_step;
        y.swap(y_try);
        k1.swap(k7);  // FSAL
        k1_fresh = true;
        const double grow = scaled > 0.0 ? 0.9 * std::pow(scaled, -0.2) : 5.0;
        h = h_step * std::clamp(grow, 0.2, 5.0);
      } else {
        ++stats.rejected;
        h = h_step * std::max(0.2, 0.9 * std::pow(scaled, -0.2));
        k1_fresh = true;  // k1 still matches (t, y)
      }
    }
    observe(static_cast<int>(out), t, y);
  }
  return stats;
}

// Classic fixed-step RK4; each inter-output segment is divided into
// ceil(segment / dt) equal steps, so runs are bit-reproducible for a given
// grid. Accepts the same hard-point list to align steps with noise kinks.
template <class State, class RHS, class Observer>
IntegratorStats integrate_rk4(RHS&& f, State y, double t_begin,
                              const std::vector<double>& t_out, Observer&& observe,
                              double dt, const std::vector<double>* hard_points = nullptr) {
  IntegratorStats stats;
  double t = t_begin;
  State k1 = y, k2 = y, k3 = y, k4 = y, y_mid = y;

  std::vector<double> landing;
  if (hard_points) {
    landing.reserve(t_out.size() + hard_points->size());
    std::merge(t_out.begin(), t_out.end(), hard_points->begin(), hard_points->end(),
               std::back_inserter(landing));
  } else {
    landing = t_out;
  }

  std::size_t land_idx = 0;
  for (std::size_t out = 0; out < t_out.size(); ++out) {
    const double t_target = t_out[out];
    while (t < t_target - 1e-14) {
      while (land_idx < landing.size() && landing[land_idx] <= t + 1e-14) ++land_idx;
      const double t_next =
          land_idx < landing.size() ? std::min(landing[land_idx], t_target) : t_target;
      const double span = t_next - t;
      const int n_sub = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
      const double h = span / n_sub;
      for (int s = 0; s < n_sub; ++s) {
        f(t, y, k1);
        y_mid = y + (0.5 * h) * k1;
        f(t + 0.5 * h, y_mid, k2);
        y_mid = y + (0.5 * h) * k2;
        f(t + 0.5 * h, y_mid, k3);
        y_mid = y + h * k3;
        f(t + h, y_mid, k4);
        y += (h / 6.0) * k1 + (h / 3.0) * k2 + (h / 3.0) * k3 + (h / 6.0) * k4;
        t += h;
        ++stats.steps;
      }
      t = t_next;  // squash accumulated rounding
    }
    observe(static_cast<int>(out), t, y);
  }
  return stats;
}

}  // namespace pmh
