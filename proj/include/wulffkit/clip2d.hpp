#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"
#include "wulffkit/quadrature.hpp"

namespace wulffkit {

inline constexpr int kClipSamples = 720;

/// Interval of normal angles along which p + lambda dK lies inside the domain.
struct ArcInterval {
  double t0 = 0.0, t1 = 0.0;
};

/// (p + lambda K) cap Omega for a bounded planar domain.
struct WulffPiece {
  Vec2 center = Vec2::Zero();
  double scale = 0.0;
  std::vector<ArcInterval> arcs;
  double area = 0.0;
  double outer_length = 0.0;  // free curve, normal pointing out of the piece
  double inner_length = 0.0;  // same curve, reversed normal (the complement's perimeter)
  bool full = false;          // the whole Wulff shape is inside Omega
  bool covers = false;        // Omega is inside the Wulff shape
};

namespace detail {

inline double arc_quad(const auto& f, double a, double b) {
  const int panels = std::max(2, static_cast<int>(std::ceil((b - a) / 0.2)));
  return integrate(f, a, b, panels);
}

inline bool in_scaled_body(const Body2& body, const Vec2& p, double scale, const Vec2& x) {
  const Vec2 d = x - p;
  const double r = d.norm();
  if (r == 0.0) return true;
  return r <= scale * body.radial(d / r);
}

inline Vec2 interior_point(const Domain2& domain) {
  if (domain.kind() == DomainKind::disk2d) return domain.center();
  Vec2 c = Vec2::Zero();
  for (const auto& v : domain.vertices()) c += v;
  return c / static_cast<double>(domain.vertices().size());
}

}  // namespace detail

/// Arc point of p + lambda dK with outer normal angle t.
inline Vec2 wulff_point(const Body2& body, const Vec2& p, double scale, double t) {
  const AngularJet j = body.angular(t);
  return p + scale * (j.h * unit_dir(t) + j.h1 * unit_perp(t));
}

inline WulffPiece clip_wulff(const Body2& body, const Domain2& domain, const Vec2& p, double scale,
                             int samples = kClipSamples) {
  if (!domain.bounded()) fail(ErrorCode::invalid_argument, "clipping needs a bounded domain");
  if (!(scale > 0)) fail(ErrorCode::invalid_argument, "scale must be positive");
  WulffPiece w;
  w.center = p;
  w.scale = scale;
  auto depth_at = [&](double t) { return domain.depth(wulff_point(body, p, scale, t)); };

  std::vector<double> d(samples);
  const double dt = kTwoPi / samples;
  bool any_in = false, any_out = false;
  for (int i = 0; i < samples; ++i) {
    d[i] = depth_at(i * dt);
    (d[i] > 0 ? any_in : any_out) = true;
  }

  auto integrals = [&](double a, double b) {
    const double area = detail::arc_quad(
        [&](double t) {
          const AngularJet j = body.angular(t);
          return 0.5 * scale * j.curvature_radius() * (cross2(p, unit_perp(t)) + scale * j.h);
        },
        a, b);
    const double outer = detail::arc_quad(
        [&](double t) {
          const AngularJet j = body.angular(t);
          return scale * j.h * j.curvature_radius();
        },
        a, b);
    const double inner = detail::arc_quad(
        [&](double t) { return scale * body.angular(t + kPi).h * body.angular(t).curvature_radius(); }, a, b);
    return std::array<double, 3>{area, outer, inner};
  };

  if (!any_out) {
    w.full = true;
    w.arcs.push_back({0.0, kTwoPi});
    const auto r = integrals(0.0, kTwoPi);
    w.area = r[0], w.outer_length = r[1], w.inner_length = r[2];
    return w;
  }
  if (!any_in) {
    if (detail::in_scaled_body(body, p, scale, detail::interior_point(domain))) {
      w.covers = true;
      w.area = domain.volume();
    }
    return w;
  }

  // crossings, refined; entering means depth goes from negative to positive
  struct Crossing {
    double t;
    bool enter;
  };
  std::vector<Crossing> cs;
  for (int i = 0; i < samples; ++i) {
    const int k = (i + 1) % samples;
    const bool a_in = d[i] > 0, b_in = d[k] > 0;
    if (a_in == b_in) continue;
    const double ta = i * dt, tb = (i + 1) * dt;
    const double t = solve_bracketed(depth_at, ta, tb, d[i], d[k], 52);
    cs.push_back({t, b_in});
  }
  // rotate so the list starts with an entry
  const auto first = std::find_if(cs.begin(), cs.end(), [](const Crossing& c) { return c.enter; });
  std::rotate(cs.begin(), first, cs.end());
  for (std::size_t i = 0; i + 1 < cs.size(); i += 2) {
    double a = cs[i].t, b = cs[i + 1].t;
    while (b <= a) b += kTwoPi;
    w.arcs.push_back({a, b});
  }
  for (std::size_t i = 0; i < w.arcs.size(); ++i) {
    const auto& arc = w.arcs[i];
    const auto r = integrals(arc.t0, arc.t1);
    w.area += r[0], w.outer_length += r[1], w.inner_length += r[2];
    const Vec2 exit = wulff_point(body, p, scale, arc.t1);
    const Vec2 next = wulff_point(body, p, scale, w.arcs[(i + 1) % w.arcs.size()].t0);
    w.area += domain.wall_path(exit, next);
  }
  return w;
}

/// Smallest scale at which (p + lambda K) cap Omega has area v.
inline WulffPiece wulff_piece_for_area(const Body2& body, const Domain2& domain, const Vec2& p, double v) {
  const double total = domain.volume();
  if (!(v > 0 && v < total)) fail(ErrorCode::invalid_argument, "area must lie strictly inside (0, V(Omega))");
  auto area = [&](double s) { return clip_wulff(body, domain, p, s).area - v; };
  double hi = std::sqrt(v / body.volume());
  double fhi = area(hi);
  double lo = 0.0, flo = -v;
  for (int i = 0; fhi < 0 && i < 60; ++i) {
    lo = hi, flo = fhi;
    hi *= 2;
    fhi = area(hi);
  }
  if (fhi < 0) fail(ErrorCode::no_feasible_candidate, "Wulff piece cannot reach the target area");
  const double s = solve_bracketed(area, lo, hi, flo, fhi, 50);
  return clip_wulff(body, domain, p, s);
}

/// Clip of a convex polygon (CCW) by {x : <x, n> <= c}.
inline std::vector<Vec2> clip_polygon(const std::vector<Vec2>& poly, const Vec2& n, double c) {
  std::vector<Vec2> out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    const double da = a.dot(n) - c, db = b.dot(n) - c;
    if (da <= 0) out.push_back(a);
    if ((da < 0 && db > 0) || (da > 0 && db < 0)) out.push_back(a + da / (da - db) * (b - a));
  }
  return out;
}

inline double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

/// {x in Omega : <x, nu> <= c}; the free curve is a chord with outer normal nu.
struct ChordPiece {
  Vec2 normal = Vec2::Zero();
  double offset = 0.0;
  Vec2 a = Vec2::Zero(), b = Vec2::Zero();  // chord ends, the piece on the left going a -> b
  double area = 0.0;
  double length = 0.0;
};

inline std::pair<double, double> support_interval(const Domain2& domain, const Vec2& nu) {
  if (domain.kind() == DomainKind::disk2d) {
    const double c = domain.center().dot(nu);
    return {c - domain.radius(), c + domain.radius()};
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : domain.vertices()) lo = std::min(lo, v.dot(nu)), hi = std::max(hi, v.dot(nu));
  return {lo, hi};
}

inline ChordPiece chord_cut(const Domain2& domain, const Vec2& nu, double c) {
  ChordPiece k;
  k.normal = nu;
  k.offset = c;
  const Vec2 t = rot_ccw(nu);
  if (domain.kind() == DomainKind::disk2d) {
    const double r = domain.radius();
    const double s = c - domain.center().dot(nu);  // signed distance of the line from the centre
    const double clamped = std::clamp(s / r, -1.0, 1.0);
    const double half = r * std::sqrt(1 - clamped * clamped);
    const Vec2 foot = domain.center() + s * nu;
    k.a = foot - half * t;
    k.b = foot + half * t;
    k.length = 2 * half;
    const double alpha = std::acos(clamped);  // half-angle of the cap beyond the line
    k.area = kPi * r * r - (r * r * (alpha - std::sin(alpha) * std::cos(alpha)));
    return k;
  }
  const auto poly = clip_polygon(domain.vertices(), nu, c);
  k.area = poly.size() >= 3 ? polygon_area(poly) : 0.0;
  // chord ends: the clipped points lying on the line
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  for (const auto& q : poly)
    if (std::abs(q.dot(nu) - c) <= 1e-12 * (1 + std::abs(c))) tmin = std::min(tmin, q.dot(t)), tmax = std::max(tmax, q.dot(t));
  if (tmax > tmin) {
    k.a = c * nu + tmin * t;
    k.b = c * nu + tmax * t;
    k.length = tmax - tmin;
  }
  return k;
}

inline ChordPiece chord_for_area(const Domain2& domain, const Vec2& nu, double v) {
  const auto [lo, hi] = support_interval(domain, nu);
  auto f = [&](double c) { return chord_cut(domain, nu, c).area - v; };
  const double c = solve_bracketed(f, lo, hi, -v, domain.volume() - v, 52);
  return chord_cut(domain, nu, c);
}

/// Centres p with p + lambda K inside the polygon: the polygon with every
/// facet pushed inward by lambda h_K(-n).
inline std::vector<Vec2> inner_parallel(const Body2& body, const Domain2& domain, double scale) {
  std::vector<Vec2> poly = domain.vertices();
  const auto& pts = domain.facet_points();
  const auto& ns = domain.facet_normals();
  for (std::size_t i = 0; i < ns.size() && poly.size() >= 3; ++i)
    poly = clip_polygon(poly, -ns[i], -(pts[i].dot(ns[i]) + scale * body.support(-ns[i])));
  if (poly.size() < 3 || polygon_area(poly) <= 0) return {};
  return poly;
}

}  // namespace wulffkit
