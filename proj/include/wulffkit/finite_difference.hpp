#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "wulffkit/error.hpp"

namespace wulffkit {

/// Default central-difference steps, each half the previous.
inline constexpr std::array<double, 3> kFdSteps{1e-2, 5e-3, 2.5e-3};

/// A Richardson-extrapolated derivative. `order` is the observed convergence
/// order of the raw central differences; `exact` marks the case where the raw
/// differences already agree to the noise floor, so no order is observable.
struct FdEstimate {
  double value = 0.0;
  double error = 0.0;
  double order = 0.0;
  bool exact = false;
  std::array<double, 3> raw{};
};

inline FdEstimate richardson(const std::array<double, 3>& raw, double noise) {
  FdEstimate e;
  e.raw = raw;
  const double l1a = (4 * raw[1] - raw[0]) / 3;
  const double l1b = (4 * raw[2] - raw[1]) / 3;
  e.value = (16 * l1b - l1a) / 15;
  e.error = std::abs(e.value - l1b);
  const double d1 = std::abs(raw[0] - raw[1]), d2 = std::abs(raw[1] - raw[2]);
  if (d2 <= noise) {
    e.exact = true;
    e.order = std::numeric_limits<double>::infinity();
  } else {
    e.order = std::log2(d1 / d2);
  }
  return e;
}

/// Samples of a vector-valued function of t on the symmetric stencil used for
/// first and second central differences.
struct FdSamples {
  std::array<double, 3> steps;
  std::vector<double> center;
  std::array<std::vector<double>, 3> plus;
  std::array<std::vector<double>, 3> minus;

  FdEstimate first(std::size_t c) const {
    std::array<double, 3> raw;
    double scale = std::abs(center[c]);
    for (int i = 0; i < 3; ++i) {
      raw[i] = (plus[i][c] - minus[i][c]) / (2 * steps[i]);
      scale = std::max({scale, std::abs(plus[i][c]), std::abs(minus[i][c])});
    }
    return richardson(raw, 1e-12 * (1 + scale) / steps[2]);
  }

  FdEstimate second(std::size_t c) const {
    std::array<double, 3> raw;
    double scale = std::abs(center[c]);
    for (int i = 0; i < 3; ++i) {
      raw[i] = (plus[i][c] - 2 * center[c] + minus[i][c]) / (steps[i] * steps[i]);
      scale = std::max({scale, std::abs(plus[i][c]), std::abs(minus[i][c])});
    }
    return richardson(raw, 1e-12 * (1 + scale) / (steps[2] * steps[2]));
  }
};

/// Evaluates f on the stencil. If an evaluation throws ImmersionLost, all
/// steps are halved and the stencil is retried, at most three times.
template <class F>
FdSamples sample_stencil(F&& f, std::array<double, 3> steps = kFdSteps) {
  for (int attempt = 0;; ++attempt) {
    try {
      FdSamples s;
      s.steps = steps;
      s.center = f(0.0);
      for (int i = 0; i < 3; ++i) {
        s.plus[i] = f(steps[i]);
        s.minus[i] = f(-steps[i]);
      }
      return s;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::immersion_lost || attempt >= 3) throw;
      for (double& h : steps) h *= 0.5;
    }
  }
}

}  // namespace wulffkit
