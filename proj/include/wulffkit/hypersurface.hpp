#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"
#include "wulffkit/quadrature.hpp"

namespace wulffkit {

/// Smallest admissible |x'| (curves) or |x_u x x_v| (surfaces).
inline constexpr double kImmersionFloor = 1e-8;

template <int Dim>
using Param = Eigen::Matrix<double, Dim - 1, 1>;
template <int Dim>
using Tangents = Eigen::Matrix<double, Dim, Dim - 1>;
template <int Dim>
using SmallMat = Eigen::Matrix<double, Dim - 1, Dim - 1>;

/// Point and parameter derivatives up to order two. d2 holds x_uu (curves) or
/// x_uu, x_uv, x_vv (surfaces).
template <int Dim>
struct Jet {
  Vec<Dim> x;
  Tangents<Dim> d1;
  std::array<Vec<Dim>, Dim == 2 ? 1 : 3> d2;

  const Vec<Dim>& second(int i, int j) const {
    if constexpr (Dim == 2) return d2[0];
    else return d2[i + j];
  }
};

/// Euclidean and anisotropic frame at one point. Matrices with a trailing hat
/// in the math are written here in the orthonormal tangent basis E.
template <int Dim>
struct Frame {
  static constexpr int n = Dim - 1;
  Vec<Dim> point;
  Vec<Dim> normal;
  Tangents<Dim> basis;        // E, orthonormal tangent frame
  SmallMat<Dim> coords;       // C with d1 = E C
  SmallMat<Dim> shape;        // B = -dN
  SmallMat<Dim> q;            // Q restricted to the tangent space
  SmallMat<Dim> shape_k;      // B_K = Q B
  Vec<Dim> normal_k;          // N_K = pi_K(N)
  double phi_k = 0.0;         // h_K(N)
  double mean_k = 0.0;        // H_K = tr(B_K) / n
  double trace_gap = 0.0;     // tr(B_K^2) - n H_K^2
  double area_element = 0.0;  // |det C|

  /// Euclidean gradient from parameter derivatives of a function.
  Vec<Dim> gradient(const Param<Dim>& df) const { return basis * coords.transpose().inverse() * df; }
  /// Anisotropic gradient Q(grad f).
  Vec<Dim> gradient_k(const Param<Dim>& df) const { return basis * q * coords.transpose().inverse() * df; }
};

template <int Dim>
struct QuadNode {
  Param<Dim> u;
  double w;
};

/// A parametric curve (Dim = 2) or surface patch (Dim = 3) on a parameter box.
template <int Dim>
class Hypersurface {
 public:
  static constexpr int n = Dim - 1;
  using VecD = Vec<Dim>;
  using ParamD = Param<Dim>;
  using JetFn = std::function<Jet<Dim>(const ParamD&)>;

  Hypersurface(JetFn map, ParamD lo, ParamD hi, std::array<bool, n> periodic, bool closed, nlohmann::json descriptor)
      : map_(std::move(map)), lo_(lo), hi_(hi), periodic_(periodic), closed_(closed), descriptor_(std::move(descriptor)) {
    panels_.fill(kDefaultPanels);
  }

  Jet<Dim> jet(const ParamD& u) const { return map_(u); }
  VecD point(const ParamD& u) const { return map_(u).x; }
  const ParamD& lo() const { return lo_; }
  const ParamD& hi() const { return hi_; }
  bool periodic(int i) const { return periodic_[i]; }
  bool closed() const { return closed_; }
  int orientation() const { return orientation_; }
  const nlohmann::json& descriptor() const { return descriptor_; }
  const std::array<int, n>& panels() const { return panels_; }

  Hypersurface& set_orientation(int o) {
    orientation_ = o >= 0 ? 1 : -1;
    descriptor_["orientation"] = orientation_;
    return *this;
  }
  Hypersurface& set_panels(int p) {
    panels_.fill(std::max(1, p));
    return *this;
  }
  Hypersurface& set_panels(const std::array<int, n>& p) {
    panels_ = p;
    return *this;
  }
  Hypersurface& set_descriptor(nlohmann::json d) {
    descriptor_ = std::move(d);
    return *this;
  }

  Hypersurface flipped() const {
    Hypersurface s = *this;
    s.set_orientation(-orientation_);
    return s;
  }

  /// The image under x -> scale x + shift.
  Hypersurface transformed(double scale, const VecD& shift) const {
    auto base = map_;
    Hypersurface s = *this;
    s.map_ = [base, scale, shift](const ParamD& u) {
      Jet<Dim> j = base(u);
      j.x = scale * j.x + shift;
      j.d1 *= scale;
      for (auto& d : j.d2) d *= scale;
      return j;
    };
    s.descriptor_ = {{"kind", "transformed"}, {"scale", scale}, {"base", descriptor_}};
    return s;
  }

  /// Tensor-product composite Gauss-Legendre nodes with parameter-space weights.
  std::vector<QuadNode<Dim>> nodes() const {
    std::array<std::vector<QuadNode1D>, n> rules;
    for (int i = 0; i < n; ++i) rules[i] = composite_gauss(lo_[i], hi_[i], panels_[i]);
    std::vector<QuadNode<Dim>> out;
    if constexpr (Dim == 2) {
      out.reserve(rules[0].size());
      for (const auto& a : rules[0]) out.push_back({ParamD(a.t), a.w});
    } else {
      out.reserve(rules[0].size() * rules[1].size());
      for (const auto& a : rules[0])
        for (const auto& b : rules[1]) out.push_back({ParamD(a.t, b.t), a.w * b.w});
    }
    return out;
  }

  /// Unit normal and the Euclidean frame pieces that do not need a body.
  void euclidean(const Jet<Dim>& j, Tangents<Dim>& e, SmallMat<Dim>& c, VecD& nrm) const {
    if constexpr (Dim == 2) {
      const double len = j.d1.col(0).norm();
      if (!(len >= kImmersionFloor)) fail(ErrorCode::degenerate_metric, "curve speed below immersion floor");
      e.col(0) = j.d1.col(0) / len;
      c(0, 0) = len;
      nrm = orientation_ * rot_cw(e.col(0));
    } else {
      const VecD xu = j.d1.col(0), xv = j.d1.col(1);
      const double nu = xu.norm();
      if (!(nu > 0)) fail(ErrorCode::degenerate_metric, "vanishing parameter derivative");
      e.col(0) = xu / nu;
      const VecD r = xv - xv.dot(e.col(0)) * e.col(0);
      const double nr = r.norm();
      if (!(nu * nr >= kImmersionFloor)) fail(ErrorCode::degenerate_metric, "surface metric below immersion floor");
      e.col(1) = r / nr;
      c = e.transpose() * j.d1;
      nrm = orientation_ * e.col(0).cross(e.col(1));
    }
  }

 private:
  JetFn map_;
  ParamD lo_;
  ParamD hi_;
  std::array<bool, n> periodic_;
  bool closed_;
  int orientation_ = 1;
  std::array<int, n> panels_{};
  nlohmann::json descriptor_;
};

using Curve = Hypersurface<2>;
using Surface = Hypersurface<3>;

// ---------------------------------------------------------------------------
// Frames and integrals

template <int Dim>
Frame<Dim> frame_from_jet(const Hypersurface<Dim>& s, const Jet<Dim>& j, const ConvexBody<Dim>& body) {
  constexpr int n = Dim - 1;
  Frame<Dim> f;
  f.point = j.x;
  s.euclidean(j, f.basis, f.coords, f.normal);
  SmallMat<Dim> b;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) b(a, c) = j.second(a, c).dot(f.normal);
  const SmallMat<Dim> cinv = f.coords.inverse();
  f.shape = cinv.transpose() * b * cinv;
  f.q = f.basis.transpose() * body.hessian(f.normal) * f.basis;
  f.shape_k = f.q * f.shape;
  f.normal_k = body.projection(f.normal);
  f.phi_k = body.support(f.normal);
  f.mean_k = f.shape_k.trace() / n;
  f.trace_gap = (f.shape_k * f.shape_k).trace() - n * f.mean_k * f.mean_k;
  f.area_element = std::abs(f.coords.determinant());
  return f;
}

template <int Dim>
Frame<Dim> frame_at(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Param<Dim>& u) {
  return frame_from_jet(s, s.jet(u), body);
}

template <int Dim>
double trace_gap(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Param<Dim>& u) {
  return frame_at(s, body, u).trace_gap;
}

/// Anisotropic gradient of a function given by its parameter derivatives.
template <int Dim>
Vec<Dim> anisotropic_gradient(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Param<Dim>& df,
                              const Param<Dim>& u) {
  return frame_at(s, body, u).gradient_k(df);
}

/// Same, with the parameter derivatives taken by central differences of f.
template <int Dim, class F>
Vec<Dim> anisotropic_gradient_fd(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, F&& f, const Param<Dim>& u,
                                 double step = 1e-6) {
  Param<Dim> df;
  for (int i = 0; i < Dim - 1; ++i) {
    Param<Dim> e = Param<Dim>::Zero();
    e[i] = step;
    df[i] = (f(u + e) - f(u - e)) / (2 * step);
  }
  return anisotropic_gradient(s, body, df, u);
}

template <int Dim>
double anisotropic_area(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body) {
  double sum = 0.0;
  Tangents<Dim> e;
  SmallMat<Dim> c;
  Vec<Dim> nrm;
  for (const auto& q : s.nodes()) {
    s.euclidean(s.jet(q.u), e, c, nrm);
    sum += q.w * std::abs(c.determinant()) * body.support(nrm);
  }
  return sum;
}

/// (1/(n+1)) int <x, N> dA over the surface itself, no closure.
template <int Dim>
double flux_integral(const Hypersurface<Dim>& s) {
  double sum = 0.0;
  Tangents<Dim> e;
  SmallMat<Dim> c;
  Vec<Dim> nrm;
  for (const auto& q : s.nodes()) {
    const Jet<Dim> j = s.jet(q.u);
    s.euclidean(j, e, c, nrm);
    sum += q.w * std::abs(c.determinant()) * j.x.dot(nrm);
  }
  return sum / Dim;
}

template <int Dim>
Vec<Dim> start_point(const Hypersurface<Dim>& s) {
  return s.point(s.lo());
}
template <int Dim>
Vec<Dim> end_point(const Hypersurface<Dim>& s) {
  return s.point(s.hi());
}

/// Volume of the region with outer normal N on the surface. Closed surfaces
/// need no domain; open curves are closed along the domain boundary.
template <int Dim>
double enclosed_volume(const Hypersurface<Dim>& s) {
  if (!s.closed()) fail(ErrorCode::not_closed, "open surface needs a domain to close against");
  return flux_integral(s);
}

inline double enclosed_volume(const Curve& s, const Domain2& domain) {
  if (s.closed()) return flux_integral(s);
  const Vec2 a = start_point(s), b = end_point(s);
  if (!domain.on_boundary(a) || !domain.on_boundary(b))
    fail(ErrorCode::not_closed, "curve endpoints are not on the domain boundary");
  const double wall = s.orientation() > 0 ? domain.wall_path(b, a) : domain.wall_path(a, b);
  return flux_integral(s) + wall;
}

// ---------------------------------------------------------------------------
// Boundary data

template <int Dim>
struct BoundaryFrame {
  Vec<Dim> point;
  Vec<Dim> conormal;    // nu, inner
  Vec<Dim> conormal_k;  // nu_K = phi_K nu - <N_K, nu> N
  Vec<Dim> xi;          // inner normal of the domain
  Vec<Dim> normal;
  Vec<Dim> normal_k;
  double phi_k = 0.0;
  double contact = 0.0;          // <N_K, xi>
  double transversality = 0.0;   // <nu, xi>
  double ii_nk = 0.0;            // II(N_K, N_K)
};

/// Boundary point of the parameter box with the inward parameter direction.
template <int Dim>
struct BoundaryPoint {
  Param<Dim> u;
  Param<Dim> inward;
};

enum class Endpoint { start, end };

inline BoundaryPoint<2> curve_endpoint(const Curve& s, Endpoint which) {
  if (which == Endpoint::start) return {s.lo(), Param<2>(1.0)};
  return {s.hi(), Param<2>(-1.0)};
}

template <int Dim>
BoundaryFrame<Dim> boundary_frame(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Domain<Dim>& domain,
                                  const BoundaryPoint<Dim>& bp) {
  const Jet<Dim> j = s.jet(bp.u);
  if (!domain.on_boundary(j.x)) fail(ErrorCode::not_on_boundary, "surface boundary point is off the domain boundary");
  const Frame<Dim> f = frame_from_jet(s, j, body);
  Vec<Dim> nu = j.d1 * bp.inward;
  if constexpr (Dim == 3) {
    // remove the component along the boundary edge
    const Param<Dim> along(-bp.inward[1], bp.inward[0]);
    const Vec<Dim> t = (j.d1 * along).normalized();
    nu -= nu.dot(t) * t;
  }
  nu -= nu.dot(f.normal) * f.normal;
  nu.normalize();
  BoundaryFrame<Dim> b;
  b.point = j.x;
  b.conormal = nu;
  b.normal = f.normal;
  b.normal_k = f.normal_k;
  b.phi_k = f.phi_k;
  b.conormal_k = f.phi_k * nu - f.normal_k.dot(nu) * f.normal;
  b.xi = domain.inner_normal(j.x);
  b.contact = f.normal_k.dot(b.xi);
  b.transversality = nu.dot(b.xi);
  b.ii_nk = domain.second_fundamental(j.x, f.normal_k);
  return b;
}

inline BoundaryFrame<2> boundary_frame(const Curve& s, const Body2& body, const Domain2& domain, Endpoint which) {
  return boundary_frame(s, body, domain, curve_endpoint(s, which));
}

// ---------------------------------------------------------------------------
// Curves

namespace shapes {

inline nlohmann::json vec_json(const Vec2& v) { return {v[0], v[1]}; }
inline nlohmann::json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

inline Curve circle(const Vec2& center, double r) {
  if (!(r > 0)) fail(ErrorCode::invalid_argument, "circle radius must be positive");
  auto fn = [center, r](const Param<2>& u) {
    const double t = u[0];
    Jet<2> j;
    j.x = center + r * unit_dir(t);
    j.d1.col(0) = r * unit_perp(t);
    j.d2[0] = -r * unit_dir(t);
    return j;
  };
  return Curve(fn, Param<2>(0.0), Param<2>(kTwoPi), {true}, true,
               {{"kind", "circle"}, {"center", vec_json(center)}, {"radius", r}});
}

inline Curve ellipse(const Vec2& center, double a, double b) {
  if (!(a > 0) || !(b > 0)) fail(ErrorCode::invalid_argument, "ellipse semi-axes must be positive");
  auto fn = [center, a, b](const Param<2>& u) {
    const double c = std::cos(u[0]), s = std::sin(u[0]);
    Jet<2> j;
    j.x = center + Vec2(a * c, b * s);
    j.d1.col(0) = Vec2(-a * s, b * c);
    j.d2[0] = Vec2(-a * c, -b * s);
    return j;
  };
  return Curve(fn, Param<2>(0.0), Param<2>(kTwoPi), {true}, true,
               {{"kind", "ellipse"}, {"center", vec_json(center)}, {"axes", {a, b}}});
}

/// Straight segment from p to q; orientation +1 puts the normal on the right of p -> q.
inline Curve segment(const Vec2& p, const Vec2& q) {
  if (!((q - p).norm() > 0)) fail(ErrorCode::invalid_argument, "segment endpoints coincide");
  auto fn = [p, q](const Param<2>& u) {
    Jet<2> j;
    j.x = p + u[0] * (q - p);
    j.d1.col(0) = q - p;
    j.d2[0] = Vec2::Zero();
    return j;
  };
  return Curve(fn, Param<2>(0.0), Param<2>(1.0), {false}, false,
               {{"kind", "segment"}, {"from", vec_json(p)}, {"to", vec_json(q)}});
}

inline Jet<2> wulff_jet(const Body2& body, const Vec2& center, double scale, double t) {
  const AngularJet a = body.angular(t);
  const Vec2 u = unit_dir(t), v = unit_perp(t);
  Jet<2> j;
  j.x = center + scale * (a.h * u + a.h1 * v);
  j.d1.col(0) = scale * a.curvature_radius() * v;
  j.d2[0] = scale * ((a.h1 + a.h3) * v - a.curvature_radius() * u);
  return j;
}

/// center + scale * dK, parametrized by the normal angle.
inline Curve wulff(const Body2& body, const Vec2& center = Vec2::Zero(), double scale = 1.0) {
  if (!(scale > 0)) fail(ErrorCode::invalid_argument, "wulff scale must be positive");
  auto fn = [body, center, scale](const Param<2>& u) { return wulff_jet(body, center, scale, u[0]); };
  return Curve(fn, Param<2>(0.0), Param<2>(kTwoPi), {true}, true,
               {{"kind", "wulff"}, {"center", vec_json(center)}, {"scale", scale}});
}

/// The piece of center + scale * dK whose normal angles lie in [t0, t1].
inline Curve wulff_arc(const Body2& body, const Vec2& center, double scale, double t0, double t1) {
  if (!(scale > 0)) fail(ErrorCode::invalid_argument, "wulff_arc scale must be positive");
  if (!(t1 > t0) || t1 - t0 > kTwoPi) fail(ErrorCode::invalid_argument, "wulff_arc angle range is invalid");
  auto fn = [body, center, scale](const Param<2>& u) { return wulff_jet(body, center, scale, u[0]); };
  return Curve(fn, Param<2>(t0), Param<2>(t1), {false}, false,
               {{"kind", "wulff_arc"}, {"center", vec_json(center)}, {"scale", scale}, {"angles", {t0, t1}}});
}

/// Radial graph over dK: x(t) = (1 + g(t)) pi_K(u(t)) with a trigonometric g.
struct TrigPerturbation {
  std::vector<double> cos;  // index k -> mode k + 1
  std::vector<double> sin;
  double constant = 0.0;

  std::array<double, 3> eval(double t) const {
    std::array<double, 3> g{constant, 0.0, 0.0};
    for (std::size_t i = 0; i < std::max(cos.size(), sin.size()); ++i) {
      const double k = static_cast<double>(i + 1);
      const double a = i < cos.size() ? cos[i] : 0.0, b = i < sin.size() ? sin[i] : 0.0;
      const double c = std::cos(k * t), s = std::sin(k * t);
      g[0] += a * c + b * s;
      g[1] += k * (-a * s + b * c);
      g[2] += -k * k * (a * c + b * s);
    }
    return g;
  }
};

inline Curve perturbed_wulff(const Body2& body, const TrigPerturbation& g) {
  auto fn = [body, g](const Param<2>& u) {
    const Jet<2> p = wulff_jet(body, Vec2::Zero(), 1.0, u[0]);
    const auto f = g.eval(u[0]);
    Jet<2> j;
    j.x = (1 + f[0]) * p.x;
    j.d1.col(0) = f[1] * p.x + (1 + f[0]) * p.d1.col(0);
    j.d2[0] = f[2] * p.x + 2 * f[1] * p.d1.col(0) + (1 + f[0]) * p.d2[0];
    return j;
  };
  return Curve(fn, Param<2>(0.0), Param<2>(kTwoPi), {true}, true,
               {{"kind", "perturbed_wulff"}, {"cos", g.cos}, {"sin", g.sin}, {"constant", g.constant}});
}

/// Cubic spline through control points at uniform parameters. Closed curves
/// use periodic end conditions, open ones natural ends. The quadrature uses
/// one panel per spline piece.
inline Curve sampled(std::vector<Vec2> pts, bool closed) {
  const int m = static_cast<int>(pts.size());
  if (m < (closed ? 4 : 3)) fail(ErrorCode::invalid_argument, "too few control points for a spline");
  const int pieces = closed ? m : m - 1;
  const double h = 1.0 / pieces;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  for (int i = 0; i < m; ++i) {
    if (!closed && (i == 0 || i == m - 1)) {
      a(i, i) = 1.0;
      continue;
    }
    const int ip = (i + 1) % m, im = (i + m - 1) % m;
    a(i, im) += 1.0;
    a(i, i) += 4.0;
    a(i, ip) += 1.0;
    rhs.row(i) = 6.0 / (h * h) * (pts[ip] - 2 * pts[i] + pts[im]).transpose();
  }
  const Eigen::MatrixXd mm = a.partialPivLu().solve(rhs);
  std::vector<Vec2> second(m);
  for (int i = 0; i < m; ++i) second[i] = mm.row(i).transpose();
  auto fn = [pts, second, pieces, h, m](const Param<2>& u) {
    double t = u[0] * pieces;
    int i = std::clamp(static_cast<int>(std::floor(t)), 0, pieces - 1);
    const double s = (t - i) * h;  // offset inside the piece
    const int k = (i + 1) % m;
    const Vec2 &p0 = pts[i], &p1 = pts[k], &m0 = second[i], &m1 = second[k];
    const double b = h - s;
    Jet<2> j;
    j.x = m0 * b * b * b / (6 * h) + m1 * s * s * s / (6 * h) + (p0 / h - m0 * h / 6) * b + (p1 / h - m1 * h / 6) * s;
    j.d1.col(0) = -m0 * b * b / (2 * h) + m1 * s * s / (2 * h) - (p0 / h - m0 * h / 6) + (p1 / h - m1 * h / 6);
    j.d2[0] = m0 * b / h + m1 * s / h;
    return j;
  };
  nlohmann::json cp = nlohmann::json::array();
  for (const auto& p : pts) cp.push_back(vec_json(p));
  Curve c(fn, Param<2>(0.0), Param<2>(1.0), {closed}, closed,
          {{"kind", "sampled"}, {"points", cp}, {"closed", closed}});
  c.set_panels(pieces);
  return c;
}

// ---------------------------------------------------------------------------
// Surfaces

/// Axis-aligned ellipsoid surface over the polar band theta in [t0, t1].
inline Surface ellipsoid_patch(const Vec3& center, const Vec3& axes, double t0 = 0.0, double t1 = kPi) {
  if (!(axes.minCoeff() > 0)) fail(ErrorCode::invalid_argument, "ellipsoid axes must be positive");
  if (!(t0 >= 0 && t1 <= kPi && t1 > t0)) fail(ErrorCode::invalid_argument, "polar band is invalid");
  auto fn = [center, axes](const Param<3>& u) {
    const double st = std::sin(u[0]), ct = std::cos(u[0]), sp = std::sin(u[1]), cp = std::cos(u[1]);
    const Vec3 a = axes;
    Jet<3> j;
    j.x = center + Vec3(a[0] * st * cp, a[1] * st * sp, a[2] * ct);
    j.d1.col(0) = Vec3(a[0] * ct * cp, a[1] * ct * sp, -a[2] * st);
    j.d1.col(1) = Vec3(-a[0] * st * sp, a[1] * st * cp, 0.0);
    j.d2[0] = Vec3(-a[0] * st * cp, -a[1] * st * sp, -a[2] * ct);
    j.d2[1] = Vec3(-a[0] * ct * sp, a[1] * ct * cp, 0.0);
    j.d2[2] = Vec3(-a[0] * st * cp, -a[1] * st * sp, 0.0);
    return j;
  };
  const bool full = t0 == 0.0 && t1 == kPi;
  return Surface(fn, Param<3>(t0, 0.0), Param<3>(t1, kTwoPi), {false, true}, full,
                 {{"kind", full ? "ellipsoid" : "ellipsoid_patch"},
                  {"center", vec_json(center)},
                  {"axes", vec_json(axes)},
                  {"band", {t0, t1}}});
}

inline Surface sphere(const Vec3& center, double r) {
  Surface s = ellipsoid_patch(center, Vec3::Constant(r));
  s.set_descriptor({{"kind", "sphere"}, {"center", vec_json(center)}, {"radius", r}});
  return s;
}

/// Flat disk of the given radius in the plane through `center` orthogonal to
/// e_z; orientation +1 gives normal +e_z.
inline Surface disk(const Vec3& center, double radius) {
  if (!(radius > 0)) fail(ErrorCode::invalid_argument, "disk radius must be positive");
  auto fn = [center](const Param<3>& u) {
    const double r = u[0], c = std::cos(u[1]), s = std::sin(u[1]);
    Jet<3> j;
    j.x = center + Vec3(r * c, r * s, 0.0);
    j.d1.col(0) = Vec3(c, s, 0.0);
    j.d1.col(1) = Vec3(-r * s, r * c, 0.0);
    j.d2[0] = Vec3::Zero();
    j.d2[1] = Vec3(-s, c, 0.0);
    j.d2[2] = Vec3(-r * c, -r * s, 0.0);
    return j;
  };
  return Surface(fn, Param<3>(0.0, 0.0), Param<3>(radius, kTwoPi), {false, true}, false,
                 {{"kind", "disk"}, {"center", vec_json(center)}, {"radius", radius}});
}

/// Flat parallelogram origin + u a + v b, (u, v) in [0, 1]^2.
inline Surface rect(const Vec3& origin, const Vec3& a, const Vec3& b) {
  auto fn = [origin, a, b](const Param<3>& u) {
    Jet<3> j;
    j.x = origin + u[0] * a + u[1] * b;
    j.d1.col(0) = a;
    j.d1.col(1) = b;
    j.d2.fill(Vec3::Zero());
    return j;
  };
  return Surface(fn, Param<3>(0.0, 0.0), Param<3>(1.0, 1.0), {false, false}, false,
                 {{"kind", "rect"}, {"origin", vec_json(origin)}, {"a", vec_json(a)}, {"b", vec_json(b)}});
}

/// Second derivative of pi_K along directions a, b at unit w (ellipsoidal bodies).
inline Vec3 projection_second(const Body3& body, const Vec3& w, const Vec3& a, const Vec3& b) {
  const Mat<3>& m = body.matrix();
  const Vec3 aw = m * w, aa = m * a, ab = m * b;
  const double s = std::sqrt(w.dot(aw));
  const double s3 = s * s * s, s5 = s3 * s * s;
  const double wa = w.dot(aa), wb = w.dot(ab);
  return -aa * wb / s3 - ab * wa / s3 - aw * a.dot(ab) / s3 + 3.0 * aw * wa * wb / s5;
}

struct SphereJet {
  Vec3 w, wt, wp, wtt, wtp, wpp;
};

inline SphereJet sphere_jet(double t, double p) {
  const double st = std::sin(t), ct = std::cos(t), sp = std::sin(p), cp = std::cos(p);
  return {Vec3(st * cp, st * sp, ct),       Vec3(ct * cp, ct * sp, -st),   Vec3(-st * sp, st * cp, 0.0),
          Vec3(-st * cp, -st * sp, -ct),    Vec3(-ct * sp, ct * cp, 0.0),  Vec3(-st * cp, -st * sp, 0.0)};
}

/// Polynomial g(w) = c . w + w^T M w on the unit sphere.
struct PolyPerturbation {
  Vec3 linear = Vec3::Zero();
  Mat<3> quadratic = Mat<3>::Zero();
  double constant = 0.0;
};

inline Jet<3> wulff3_jet(const Body3& body, double t, double p, const PolyPerturbation* g) {
  const SphereJet sj = sphere_jet(t, p);
  const Mat<3> hess = body.hessian(sj.w);
  Jet<3> j;
  j.x = body.projection(sj.w);
  j.d1.col(0) = hess * sj.wt;
  j.d1.col(1) = hess * sj.wp;
  j.d2[0] = projection_second(body, sj.w, sj.wt, sj.wt) + hess * sj.wtt;
  j.d2[1] = projection_second(body, sj.w, sj.wt, sj.wp) + hess * sj.wtp;
  j.d2[2] = projection_second(body, sj.w, sj.wp, sj.wp) + hess * sj.wpp;
  if (g == nullptr) return j;
  const Mat<3> ms = g->quadratic + g->quadratic.transpose();
  auto grad = [&](const Vec3& v) { return g->linear.dot(v) + sj.w.dot(ms * v); };
  const double f = 1.0 + g->constant + g->linear.dot(sj.w) + sj.w.dot(g->quadratic * sj.w);
  const double ft = grad(sj.wt), fp = grad(sj.wp);
  const double ftt = grad(sj.wtt) + sj.wt.dot(ms * sj.wt);
  const double ftp = grad(sj.wtp) + sj.wt.dot(ms * sj.wp);
  const double fpp = grad(sj.wpp) + sj.wp.dot(ms * sj.wp);
  Jet<3> r;
  r.x = f * j.x;
  r.d1.col(0) = ft * j.x + f * j.d1.col(0);
  r.d1.col(1) = fp * j.x + f * j.d1.col(1);
  r.d2[0] = ftt * j.x + 2 * ft * j.d1.col(0) + f * j.d2[0];
  r.d2[1] = ftp * j.x + ft * j.d1.col(1) + fp * j.d1.col(0) + f * j.d2[1];
  r.d2[2] = fpp * j.x + 2 * fp * j.d1.col(1) + f * j.d2[2];
  return r;
}

inline Surface wulff(const Body3& body) {
  auto fn = [body](const Param<3>& u) { return wulff3_jet(body, u[0], u[1], nullptr); };
  return Surface(fn, Param<3>(0.0, 0.0), Param<3>(kPi, kTwoPi), {false, true}, true, {{"kind", "wulff"}});
}

inline Surface perturbed_wulff(const Body3& body, const PolyPerturbation& g) {
  auto fn = [body, g](const Param<3>& u) { return wulff3_jet(body, u[0], u[1], &g); };
  return Surface(fn, Param<3>(0.0, 0.0), Param<3>(kPi, kTwoPi), {false, true}, true,
                 {{"kind", "perturbed_wulff"}, {"constant", g.constant}});
}

}  // namespace shapes

/// Boundary of K traced through the support parametrization, outer normal.
/// `resolution` is the node count per parameter direction.
template <int Dim>
Hypersurface<Dim> wulff_sample(const ConvexBody<Dim>& body, int resolution) {
  if (resolution < 16) fail(ErrorCode::invalid_argument, "wulff_sample needs resolution >= 16");
  Hypersurface<Dim> s = shapes::wulff(body);
  s.set_panels(std::max(1, resolution / kGaussOrder));
  return s;
}

}  // namespace wulffkit
