#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"

namespace wulffkit {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

enum class BodyKind { ball, ellipsoid, fourier2d };

/// Strict-convexity floor for Fourier bodies: min(h + h'') over the sampled circle.
inline constexpr double kConvexityMargin = 1e-3;
inline constexpr int kConvexitySamples = 4096;

/// Support function of a planar body as a function of the normal angle, with
/// its first three angular derivatives.
struct AngularJet {
  double h;
  double h1;
  double h2;
  double h3;
  /// Radius of curvature of the Wulff shape at this normal angle.
  double curvature_radius() const { return h + h2; }
};

struct EllipticityBounds {
  double a;
  double b;
};

inline Vec2 unit_dir(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 unit_perp(double theta) { return {-std::sin(theta), std::cos(theta)}; }

/// A smooth strictly convex body with 0 in its interior, described by its
/// support function h_K(w) = max{<u, w> : u in K}.
template <int Dim>
class ConvexBody {
  static_assert(Dim == 2 || Dim == 3, "ambient dimension must be 2 or 3");

 public:
  static constexpr int dim = Dim;
  using VecD = Vec<Dim>;
  using MatD = Mat<Dim>;

  static ConvexBody ball(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorCode::invalid_body, "ball radius must be positive");
    ConvexBody body;
    body.kind_ = BodyKind::ball;
    body.radius_ = radius;
    body.matrix_ = MatD::Identity() * radius * radius;
    body.inverse_ = MatD::Identity() / (radius * radius);
    return body;
  }

  static ConvexBody ellipsoid(const MatD& a) {
    if (!a.allFinite()) fail(ErrorCode::invalid_body, "ellipsoid matrix is not finite");
    if ((a - a.transpose()).norm() > 1e-12 * (1.0 + a.norm()))
      fail(ErrorCode::invalid_body, "ellipsoid matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatD> eig(a);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
      fail(ErrorCode::invalid_body, "ellipsoid matrix must be positive definite");
    ConvexBody body;
    body.kind_ = BodyKind::ellipsoid;
    body.matrix_ = a;
    body.inverse_ = a.inverse();
    return body;
  }

  /// h(theta) = a0 + sum_k (cos[k-1] cos k theta + sin[k-1] sin k theta).
  static ConvexBody fourier(double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    requires(Dim == 2)
  {
    const std::size_t m = std::max(cos_coeffs.size(), sin_coeffs.size());
    cos_coeffs.resize(m, 0.0);
    sin_coeffs.resize(m, 0.0);
    if (!std::isfinite(a0)) fail(ErrorCode::invalid_body, "fourier a0 is not finite");
    for (std::size_t k = 0; k < m; ++k)
      if (!std::isfinite(cos_coeffs[k]) || !std::isfinite(sin_coeffs[k]))
        fail(ErrorCode::invalid_body, "fourier coefficient is not finite");
    ConvexBody body;
    body.kind_ = BodyKind::fourier2d;
    body.a0_ = a0;
    body.cos_ = std::move(cos_coeffs);
    body.sin_ = std::move(sin_coeffs);
    double min_h = std::numeric_limits<double>::infinity();
    double min_r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kConvexitySamples; ++i) {
      const AngularJet j = body.angular(kTwoPi * i / kConvexitySamples);
      min_h = std::min(min_h, j.h);
      min_r = std::min(min_r, j.curvature_radius());
    }
    if (!(min_h > 0.0)) fail(ErrorCode::invalid_body, "support function must be positive (origin not interior)");
    if (!(min_r >= kConvexityMargin))
      fail(ErrorCode::invalid_body, "strict convexity margin violated: min(h + h'') = " + std::to_string(min_r));
    return body;
  }

  BodyKind kind() const { return kind_; }
  double radius() const { return radius_; }
  const MatD& matrix() const { return matrix_; }
  double a0() const { return a0_; }
  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }

  /// -K, with h_{-K}(w) = h_K(-w).
  ConvexBody reflected() const {
    if (kind_ != BodyKind::fourier2d) return *this;
    ConvexBody r = *this;
    for (std::size_t k = 0; k < r.cos_.size(); k += 2) r.cos_[k] = -r.cos_[k], r.sin_[k] = -r.sin_[k];
    return r;
  }

  bool centrally_symmetric() const {
    if (kind_ != BodyKind::fourier2d) return true;
    for (std::size_t k = 0; k < cos_.size(); k += 2)  // index k holds mode k + 1
      if (cos_[k] != 0.0 || sin_[k] != 0.0) return false;
    return true;
  }

  double support(const VecD& w) const {
    const double r = checked_norm(w);
    switch (kind_) {
      case BodyKind::ball: return radius_ * r;
      case BodyKind::ellipsoid: return std::sqrt(w.dot(matrix_ * w));
      case BodyKind::fourier2d:
        if constexpr (Dim == 2) return r * angular(std::atan2(w[1], w[0])).h;
    }
    return 0.0;
  }

  /// pi_K(w) = grad h_K(w): the boundary point with outer normal w.
  VecD projection(const VecD& w) const {
    const double r = checked_norm(w);
    switch (kind_) {
      case BodyKind::ball: return radius_ * w / r;
      case BodyKind::ellipsoid: {
        const VecD aw = matrix_ * w;
        return aw / std::sqrt(w.dot(aw));
      }
      case BodyKind::fourier2d: {
        if constexpr (Dim == 2) {
          const double th = std::atan2(w[1], w[0]);
          const AngularJet j = angular(th);
          return j.h * unit_dir(th) + j.h1 * unit_perp(th);
        }
      }
    }
    return VecD::Zero();
  }

  /// Hessian of h_K at w. It annihilates w, and on w^perp (|w| = 1) it is the
  /// differential Q_w of the K-projection.
  MatD hessian(const VecD& w) const {
    const double r = checked_norm(w);
    switch (kind_) {
      case BodyKind::ball: {
        const VecD u = w / r;
        return radius_ / r * (MatD::Identity() - u * u.transpose());
      }
      case BodyKind::ellipsoid: {
        const VecD aw = matrix_ * w;
        const double s = std::sqrt(w.dot(aw));
        return matrix_ / s - aw * aw.transpose() / (s * s * s);
      }
      case BodyKind::fourier2d: {
        if constexpr (Dim == 2) {
          const double th = std::atan2(w[1], w[0]);
          const VecD t = unit_perp(th);
          return angular(th).curvature_radius() / r * t * t.transpose();
        }
      }
    }
    return MatD::Zero();
  }

  /// Q_w(v) for unit w and v orthogonal to w.
  VecD tangent_map(const VecD& w, const VecD& v) const {
    const double r = checked_norm(w);
    if (std::abs(r - 1.0) > 1e-10) fail(ErrorCode::invalid_argument, "tangent_map expects a unit direction");
    if (std::abs(v.dot(w)) > 1e-10 * v.norm()) fail(ErrorCode::not_orthogonal, "v is not orthogonal to w");
    return hessian(w) * v;
  }

  AngularJet angular(double theta) const
    requires(Dim == 2)
  {
    switch (kind_) {
      case BodyKind::ball: return {radius_, 0.0, 0.0, 0.0};
      case BodyKind::ellipsoid: {
        const double a = matrix_(0, 0), b = matrix_(0, 1), c = matrix_(1, 1);
        const double c2 = std::cos(2 * theta), s2 = std::sin(2 * theta);
        const double q = 0.5 * (a + c) + 0.5 * (a - c) * c2 + b * s2;
        const double q1 = -(a - c) * s2 + 2 * b * c2;
        const double q2 = -2 * (a - c) * c2 - 4 * b * s2;
        const double q3 = 4 * (a - c) * s2 - 8 * b * c2;
        const double h = std::sqrt(q);
        const double h1 = q1 / (2 * h);
        const double h2 = (0.5 * q2 - h1 * h1) / h;
        const double h3 = (0.5 * q3 - 3 * h1 * h2) / h;
        return {h, h1, h2, h3};
      }
      case BodyKind::fourier2d: {
        AngularJet j{a0_, 0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < cos_.size(); ++i) {
          const double k = static_cast<double>(i + 1);
          const double ck = std::cos(k * theta), sk = std::sin(k * theta);
          const double a = cos_[i], b = sin_[i];
          j.h += a * ck + b * sk;
          j.h1 += k * (-a * sk + b * ck);
          j.h2 += -k * k * (a * ck + b * sk);
          j.h3 += k * k * k * (a * sk - b * ck);
        }
        return j;
      }
    }
    return {};
  }

  /// Normal angle theta whose boundary point pi_K(u(theta)) has polar angle phi.
  double normal_angle_for_polar(double phi) const
    requires(Dim == 2)
  {
    if (kind_ == BodyKind::ball) return phi;
    if (kind_ == BodyKind::ellipsoid) {
      // boundary point along u has outer normal A^{-1} u
      const Vec2 n = inverse_ * unit_dir(phi);
      return phi + wrap_angle(std::atan2(n[1], n[0]) - phi);
    }
    // <pi_K(u(theta)), u(theta)> = h > 0 keeps the polar angle within pi/2 of theta.
    auto g = [&](double th) {
      const AngularJet j = angular(th);
      const Vec2 p = j.h * unit_dir(th) + j.h1 * unit_perp(th);
      return wrap_angle(std::atan2(p[1], p[0]) - phi);
    };
    return solve_bracketed(g, phi - 0.5 * kPi, phi + 0.5 * kPi, 52);
  }

  /// Radial function: the largest t with t*u in K, for unit u.
  double radial(const VecD& u) const {
    const double r = checked_norm(u);
    const VecD d = u / r;
    if (kind_ != BodyKind::fourier2d) return 1.0 / std::sqrt(d.dot(inverse_ * d));
    if constexpr (Dim == 2) {
      const double th = normal_angle_for_polar(std::atan2(d[1], d[0]));
      const AngularJet j = angular(th);
      return (j.h * unit_dir(th) + j.h1 * unit_perp(th)).norm();
    }
    return 0.0;
  }

  bool contains(const VecD& x, double tol = 0.0) const {
    const double r = x.norm();
    if (r == 0.0) return true;
    return r <= radial(x) * (1.0 + tol);
  }

  double volume() const {
    constexpr double unit = Dim == 2 ? kPi : 4.0 * kPi / 3.0;
    switch (kind_) {
      case BodyKind::ball: return unit * std::pow(radius_, Dim);
      case BodyKind::ellipsoid: return unit * std::sqrt(matrix_.determinant());
      case BodyKind::fourier2d: {
        // 1/2 int (h^2 - h'^2) dtheta, term by term.
        double v = kPi * a0_ * a0_;
        for (std::size_t i = 0; i < cos_.size(); ++i) {
          const double k = static_cast<double>(i + 1);
          v += 0.5 * kPi * (1.0 - k * k) * (cos_[i] * cos_[i] + sin_[i] * sin_[i]);
        }
        return v;
      }
    }
    return 0.0;
  }

  /// Central finite-difference gradient of h_K, for cross-checking projection().
  VecD projection_fd(const VecD& w, double step = 1e-6) const {
    VecD g;
    for (int i = 0; i < Dim; ++i) {
      VecD e = VecD::Zero();
      e[i] = step;
      g[i] = (support(w + e) - support(w - e)) / (2 * step);
    }
    return g;
  }

 private:
  ConvexBody() = default;

  static double checked_norm(const VecD& w) {
    const double r = w.norm();
    if (!(r > 0.0)) fail(ErrorCode::zero_vector, "direction must be nonzero");
    return r;
  }

  BodyKind kind_ = BodyKind::ball;
  double radius_ = 1.0;
  MatD matrix_ = MatD::Identity();
  MatD inverse_ = MatD::Identity();
  double a0_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

using Body2 = ConvexBody<2>;
using Body3 = ConvexBody<3>;

/// Deterministic, nearly uniform directions on the unit circle or sphere.
template <int Dim>
std::vector<Vec<Dim>> sphere_directions(int count) {
  std::vector<Vec<Dim>> dirs;
  dirs.reserve(count);
  if constexpr (Dim == 2) {
    for (int i = 0; i < count; ++i) dirs.push_back(unit_dir(kTwoPi * i / count));
  } else {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(1.0 - z * z);
      dirs.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
    }
  }
  return dirs;
}

/// Orthonormal basis of w^perp as the columns of a Dim x (Dim-1) matrix.
template <int Dim>
Eigen::Matrix<double, Dim, Dim - 1> orthonormal_complement(const Vec<Dim>& w) {
  Eigen::Matrix<double, Dim, Dim - 1> e;
  if constexpr (Dim == 2) {
    e.col(0) = Vec2(-w[1], w[0]).normalized();
  } else {
    const Vec3 u = w.normalized();
    const Vec3 seed = std::abs(u[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (seed - seed.dot(u) * u).normalized();
    e.col(0) = e1;
    e.col(1) = u.cross(e1);
  }
  return e;
}

/// (min, max) over sampled unit w of the extreme eigenvalues of Q_w on w^perp.
template <int Dim>
EllipticityBounds ellipticity_bounds(const ConvexBody<Dim>& body, int samples = Dim == 2 ? 1024 : 2048) {
  if (samples < 64) fail(ErrorCode::invalid_argument, "ellipticity_bounds needs at least 64 samples");
  EllipticityBounds bounds{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& w : sphere_directions<Dim>(samples)) {
    const auto e = orthonormal_complement<Dim>(w);
    const Eigen::Matrix<double, Dim - 1, Dim - 1> q = e.transpose() * body.hessian(w) * e;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, Dim - 1, Dim - 1>> eig(0.5 * (q + q.transpose()));
    bounds.a = std::min(bounds.a, eig.eigenvalues().minCoeff());
    bounds.b = std::max(bounds.b, eig.eigenvalues().maxCoeff());
  }
  if (!(bounds.a > 0.0)) fail(ErrorCode::invalid_body, "ellipticity lower bound is not positive");
  return bounds;
}

/// (min, max) of h_K over sampled unit directions: the perimeter-equivalence
/// constants alpha, beta with alpha P <= P_K <= beta P.
template <int Dim>
std::pair<double, double> support_range(const ConvexBody<Dim>& body, int samples = Dim == 2 ? 4096 : 8192) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& w : sphere_directions<Dim>(samples)) {
    const double h = body.support(w);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  return {lo, hi};
}

}  // namespace wulffkit
