#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "wulffkit/error.hpp"
#include "wulffkit/hypersurface.hpp"

namespace wulffkit {

/// Scalar field on the parameter box with its parameter gradient.
template <int Dim>
class Omega {
 public:
  using ParamD = Param<Dim>;
  using Fn = std::function<std::pair<double, ParamD>(const ParamD&)>;

  Omega(Fn fn, nlohmann::json descriptor) : fn_(std::move(fn)), descriptor_(std::move(descriptor)) {}

  double value(const ParamD& u) const { return fn_(u).first; }
  ParamD gradient(const ParamD& u) const { return fn_(u).second; }
  std::pair<double, ParamD> eval(const ParamD& u) const { return fn_(u); }
  const nlohmann::json& descriptor() const { return descriptor_; }

  static Omega constant(double c) {
    return Omega([c](const ParamD&) { return std::pair<double, ParamD>(c, ParamD::Zero()); },
                 {{"kind", "constant"}, {"params", {{"value", c}}}});
  }

  /// Product of one-dimensional C-infinity bumps exp(1 - 1/(1 - r^2)). A
  /// non-positive width leaves that direction unrestricted. Periodic
  /// directions measure distance modulo the period.
  static Omega bump(const Hypersurface<Dim>& s, const ParamD& center, const ParamD& width, double amplitude = 1.0) {
    ParamD period = ParamD::Zero();
    for (int i = 0; i < Dim - 1; ++i)
      if (s.periodic(i)) period[i] = s.hi()[i] - s.lo()[i];
    auto fn = [center, width, amplitude, period](const ParamD& u) {
      double value = amplitude;
      ParamD factors = ParamD::Ones(), derivs = ParamD::Zero();
      for (int i = 0; i < Dim - 1; ++i) {
        if (!(width[i] > 0)) continue;
        double d = u[i] - center[i];
        if (period[i] > 0) d = std::remainder(d, period[i]);
        const double r = d / width[i];
        if (std::abs(r) >= 1.0) return std::pair<double, ParamD>(0.0, ParamD::Zero());
        const double q = 1.0 - r * r;
        factors[i] = std::exp(1.0 - 1.0 / q);
        derivs[i] = factors[i] * (-2.0 * r / (q * q)) / width[i];
      }
      ParamD grad;
      for (int i = 0; i < Dim - 1; ++i) {
        double g = amplitude * derivs[i];
        for (int j = 0; j < Dim - 1; ++j)
          if (j != i) g *= factors[j];
        grad[i] = g;
        value *= factors[i];
      }
      return std::pair<double, ParamD>(value, grad);
    };
    nlohmann::json c = nlohmann::json::array(), w = nlohmann::json::array();
    for (int i = 0; i < Dim - 1; ++i) c.push_back(center[i]), w.push_back(width[i]);
    return Omega(fn, {{"kind", "bump"}, {"params", {{"center", c}, {"width", w}, {"amplitude", amplitude}}}});
  }

  /// amplitude * cos(k * angle + phase), angle running once around the chosen
  /// parameter direction. With `polar`, the mode is multiplied by sin(u_0)^k so
  /// that it stays smooth through the poles of a spherical parametrization.
  static Omega fourier_mode(const Hypersurface<Dim>& s, int k, double phase = 0.0, double amplitude = 1.0,
                            int axis = Dim - 2, bool polar = false) {
    const double lo = s.lo()[axis], len = s.hi()[axis] - s.lo()[axis];
    auto fn = [k, phase, amplitude, axis, polar, lo, len](const ParamD& u) {
      const double scale = kTwoPi / len;
      const double a = scale * k * (u[axis] - lo) + phase;
      double v = amplitude * std::cos(a);
      ParamD g = ParamD::Zero();
      g[axis] = -amplitude * std::sin(a) * scale * k;
      if constexpr (Dim == 3) {
        if (polar) {
          const double sp = std::pow(std::sin(u[0]), k);
          const double dsp = k * std::pow(std::sin(u[0]), k - 1) * std::cos(u[0]);
          g[axis] *= sp;
          g[0] += v * dsp;
          v *= sp;
        }
      }
      return std::pair<double, ParamD>(v, g);
    };
    return Omega(fn, {{"kind", "fourier_mode"},
                      {"params", {{"k", k}, {"phase", phase}, {"amplitude", amplitude}, {"axis", axis}, {"polar", polar}}}});
  }

  /// sum_i c_i f_i + c_0.
  static Omega combination(std::vector<Omega> terms, std::vector<double> coeffs, double offset) {
    auto fn = [terms, coeffs, offset](const ParamD& u) {
      double v = offset;
      ParamD g = ParamD::Zero();
      for (std::size_t i = 0; i < terms.size(); ++i) {
        auto [a, b] = terms[i].eval(u);
        v += coeffs[i] * a;
        g += coeffs[i] * b;
      }
      return std::pair<double, ParamD>(v, g);
    };
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& t : terms) parts.push_back(t.descriptor());
    return Omega(fn, {{"kind", "combination"}, {"params", {{"terms", parts}, {"coeffs", coeffs}, {"offset", offset}}}});
  }

 private:
  Fn fn_;
  nlohmann::json descriptor_;
};

}  // namespace wulffkit
