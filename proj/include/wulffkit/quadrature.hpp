#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <vector>

namespace wulffkit {

/// Number of Gauss-Legendre nodes per panel used throughout the toolkit.
inline constexpr int kGaussOrder = 16;
/// Default number of panels per parameter direction.
inline constexpr int kDefaultPanels = 32;

struct QuadNode1D {
  double t;
  double w;
};

/// Reference 16-point Gauss-Legendre rule on [-1, 1], nodes in increasing order.
inline const std::array<QuadNode1D, kGaussOrder>& gauss_reference() {
  static const std::array<QuadNode1D, kGaussOrder> rule = [] {
    using G = boost::math::quadrature::gauss<double, kGaussOrder>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::array<QuadNode1D, kGaussOrder> r{};
    constexpr int half = kGaussOrder / 2;
    for (int i = 0; i < half; ++i) {
      r[half - 1 - i] = {-x[i], w[i]};
      r[half + i] = {x[i], w[i]};
    }
    return r;
  }();
  return rule;
}

/// Composite Gauss-Legendre rule with `panels` equal panels on [a, b].
inline std::vector<QuadNode1D> composite_gauss(double a, double b, int panels) {
  std::vector<QuadNode1D> nodes;
  nodes.reserve(static_cast<std::size_t>(panels) * kGaussOrder);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (const auto& q : gauss_reference()) nodes.push_back({mid + 0.5 * h * q.t, 0.5 * h * q.w});
  }
  return nodes;
}

template <class F>
double integrate(F&& f, double a, double b, int panels = kDefaultPanels) {
  double sum = 0.0;
  for (const auto& q : composite_gauss(a, b, panels)) sum += q.w * f(q.t);
  return sum;
}

/// Panel count that keeps panels no wider than `max_width`, and at least `min_panels`.
inline int panels_for(double length, double max_width, int min_panels = 1) {
  const int p = static_cast<int>(std::ceil(std::abs(length) / max_width));
  return p < min_panels ? min_panels : p;
}

}  // namespace wulffkit
