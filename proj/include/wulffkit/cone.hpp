#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/numerics.hpp"
#include "wulffkit/quadrature.hpp"

namespace wulffkit {

/// Default Monte Carlo budget for 3D cone integrals, and its stratification.
inline constexpr int kMcStrataZ = 500;
inline constexpr int kMcStrataPhi = 1000;
inline constexpr int kMcPerStratum = 2;

struct ConeEstimate {
  double value = 0.0;
  double sigma = 0.0;     // MC standard error, or a quadrature error estimate
  std::string method;     // "quadrature" or "mc"
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Angular range [a, b] (b > a) of a planar cone with apex at the origin.
inline std::pair<double, double> cone_angles(const Domain2& cone) {
  switch (cone.kind()) {
    case DomainKind::full_space: return {0.0, kTwoPi};
    case DomainKind::half_space: {
      const Vec2 n = cone.facet_normals()[0];
      const double a = std::atan2(n[1], n[0]);
      return {a - kPi / 2, a + kPi / 2};
    }
    case DomainKind::polyhedral_cone: {
      // from the outgoing boundary ray counterclockwise to the incoming one
      const auto& c = cone.boundary().front();
      const Vec2 out = c.point_at(1.0) - c.point_at(0.0);
      const Vec2 in = c.point_at(-1.0) - c.point_at(0.0);
      const double a = std::atan2(out[1], out[0]);
      double b = std::atan2(in[1], in[0]);
      while (b <= a) b += kTwoPi;
      return {a, b};
    }
    default: fail(ErrorCode::invalid_argument, "not a cone: " + std::string(to_string(cone.kind())));
  }
}

inline bool cone_contains_direction(const Domain3& cone, const Vec3& u) {
  switch (cone.kind()) {
    case DomainKind::full_space: return true;
    case DomainKind::half_space:
    case DomainKind::polyhedral_cone:
      for (const auto& n : cone.facet_normals())
        if (u.dot(n) < 0) return false;
      return true;
    default: fail(ErrorCode::invalid_argument, "not a cone: " + std::string(to_string(cone.kind())));
  }
}

/// V(K cap C) in the plane: 1/2 int rho_K^2 over the cone's angular range.
inline ConeEstimate cone_body_volume(const Body2& body, const Domain2& cone, int panels = 64) {
  const auto [a, b] = cone_angles(cone);
  auto f = [&](double phi) {
    const double r = body.radial(unit_dir(phi));
    return 0.5 * r * r;
  };
  const double fine = integrate(f, a, b, panels);
  const double coarse = integrate(f, a, b, panels / 2);
  return {fine, std::abs(fine - coarse), "quadrature", static_cast<std::uint64_t>(panels) * kGaussOrder, 0};
}

/// Stratified estimate of the sphere integral of g over uniform directions,
/// strata equal in (z, phi). The error comes from the in-stratum sample spread.
template <class G>
ConeEstimate sphere_mc(G&& g, std::uint64_t seed, std::uint64_t stream, int nz = kMcStrataZ, int nphi = kMcStrataPhi,
                       int per = kMcPerStratum) {
  const double area = 4 * kPi;
  const double strata = static_cast<double>(nz) * nphi;
  double sum = 0.0, var = 0.0;
  const std::uint64_t base = derive_seed(seed, stream);
  for (int i = 0; i < nz; ++i) {
    for (int j = 0; j < nphi; ++j) {
      double s = 0.0, s2 = 0.0;
      for (int k = 0; k < per; ++k) {
        const std::uint64_t idx = ((static_cast<std::uint64_t>(i) * nphi + j) * per + k) * 2;
        const double z = -1.0 + 2.0 * (i + counter_uniform(base, idx)) / nz;
        const double phi = kTwoPi * (j + counter_uniform(base, idx + 1)) / nphi;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double v = area * g(Vec3(rho * std::cos(phi), rho * std::sin(phi), z));
        s += v;
        s2 += v * v;
      }
      const double mean = s / per;
      sum += mean;
      if (per > 1) var += (s2 - per * mean * mean) / (per - 1) / per;
    }
  }
  ConeEstimate e;
  e.value = sum / strata;
  e.sigma = std::sqrt(std::max(0.0, var)) / strata;
  e.method = "mc";
  e.samples = static_cast<std::uint64_t>(strata) * per;
  e.seed = seed;
  return e;
}

/// V(K cap C) in space: direction Monte Carlo of 1_C(u) rho_K(u)^3 / 3.
inline ConeEstimate cone_body_volume(const Body3& body, const Domain3& cone, std::uint64_t seed) {
  if (cone.kind() == DomainKind::full_space) return {body.volume(), 0.0, "analytic", 0, seed};
  return sphere_mc(
      [&](const Vec3& u) {
        if (!cone_contains_direction(cone, u)) return 0.0;
        const double r = body.radial(u);
        return r * r * r / 3.0;
      },
      seed, 1);
}

/// Anisotropic length of dK cap C with outer normal, by quadrature on the
/// clipped support parametrization.
inline ConeEstimate wulff_cone_perimeter(const Body2& body, const Domain2& cone) {
  const auto [a, b] = cone_angles(cone);
  if (!(b > a)) fail(ErrorCode::empty_intersection, "cone has empty angular range");
  double t0 = 0.0, t1 = kTwoPi;
  if (b - a < kTwoPi) {
    t0 = body.normal_angle_for_polar(a);
    t1 = body.normal_angle_for_polar(b);
    while (t1 <= t0) t1 += kTwoPi;
  }
  const Curve arc = shapes::wulff_arc(body, Vec2::Zero(), 1.0, t0, t1);
  const double fine = anisotropic_area(arc, body);
  Curve coarse = arc;
  coarse.set_panels(kDefaultPanels / 2);
  return {fine, std::abs(fine - anisotropic_area(coarse, body)), "quadrature",
          static_cast<std::uint64_t>(kDefaultPanels) * kGaussOrder, 0};
}

/// Anisotropic area of dK cap C in space: an integral over outer normals w
/// of 1_C(pi_K(w)) h_K(w) det(Q_w), by the same stratified sampler.
inline ConeEstimate wulff_cone_perimeter(const Body3& body, const Domain3& cone, std::uint64_t seed) {
  if (cone.kind() == DomainKind::full_space) {
    const double a = anisotropic_area(wulff_sample(body, 512), body);
    return {a, 0.0, "quadrature", 512ull * 512ull, seed};
  }
  bool any = false;
  auto g = [&](const Vec3& w) {
    const Vec3 p = body.projection(w);
    if (!cone_contains_direction(cone, p)) return 0.0;
    any = true;
    const auto e = orthonormal_complement<3>(w);
    const Eigen::Matrix2d q = e.transpose() * body.hessian(w) * e;
    return body.support(w) * q.determinant();
  };
  ConeEstimate est = sphere_mc(g, seed, 2);
  if (!any) fail(ErrorCode::empty_intersection, "no sampled boundary point of K lies in the cone");
  return est;
}

/// I_{C,K}(v) = (n+1) V(K cap C)^{1/(n+1)} v^{n/(n+1)}.
inline double cone_profile_from_volume(int dim, double cone_volume, double v) {
  if (v < 0) fail(ErrorCode::invalid_argument, "volume must be non-negative");
  const double n = dim - 1;
  return (n + 1) * std::pow(cone_volume, 1.0 / (n + 1)) * std::pow(v, n / (n + 1));
}

inline double cone_profile(const Body2& body, const Domain2& cone, double v) {
  return cone_profile_from_volume(2, cone_body_volume(body, cone).value, v);
}

inline double cone_profile(const Body3& body, const Domain3& cone, double v, std::uint64_t seed) {
  return cone_profile_from_volume(3, cone_body_volume(body, cone, seed).value, v);
}

/// The cone translated so that its apex (or boundary point) sits at the origin.
template <int Dim>
Domain<Dim> cone_at_origin(const Domain<Dim>& c) {
  switch (c.kind()) {
    case DomainKind::full_space: return c;
    case DomainKind::half_space: return Domain<Dim>::half_space(c.facet_normals()[0]);
    case DomainKind::polyhedral_cone: return Domain<Dim>::polyhedral_cone(c.facet_normals());
    default: fail(ErrorCode::invalid_argument, "not a cone");
  }
}

}  // namespace wulffkit
