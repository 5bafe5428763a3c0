#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"

namespace wulffkit {

/// Tolerance, in ambient units, for "this point lies on the domain boundary".
inline constexpr double kBoundaryTol = 1e-8;

enum class DomainKind { full_space, half_space, slab, polyhedral_cone, polygon2d, disk2d };

inline std::string_view to_string(DomainKind k) {
  switch (k) {
    case DomainKind::full_space: return "full_space";
    case DomainKind::half_space: return "half_space";
    case DomainKind::slab: return "slab";
    case DomainKind::polyhedral_cone: return "polyhedral_cone";
    case DomainKind::polygon2d: return "polygon2d";
    case DomainKind::disk2d: return "disk2d";
  }
  return "unknown";
}

inline double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
/// Rotation by -90 degrees: J(a, b) = (b, -a). For a counterclockwise tangent this is the outer normal.
inline Vec2 rot_cw(const Vec2& v) { return {v[1], -v[0]}; }
/// Rotation by +90 degrees.
inline Vec2 rot_ccw(const Vec2& v) { return {-v[1], v[0]}; }

/// One connected component of a planar domain boundary, walked with the
/// domain on the left and parametrized by arclength s. Either a circle, or a
/// polyline whose two ends may continue as rays to infinity.
class BoundaryComponent {
 public:
  static BoundaryComponent circle(const Vec2& center, double radius) {
    BoundaryComponent c;
    c.is_circle_ = true;
    c.center_ = center;
    c.radius_ = radius;
    c.periodic_ = true;
    c.length_ = kTwoPi * radius;
    return c;
  }

  /// Closed polygon, vertices counterclockwise.
  static BoundaryComponent loop(std::vector<Vec2> vertices) {
    BoundaryComponent c;
    c.periodic_ = true;
    c.vertices_ = std::move(vertices);
    c.vertices_.push_back(c.vertices_.front());
    c.accumulate();
    c.length_ = c.cum_.back();
    return c;
  }

  /// Open polyline extended by rays: s < 0 runs along `in_dir` into the first
  /// vertex, s beyond the last vertex continues along `out_dir`.
  static BoundaryComponent path(std::vector<Vec2> vertices, const Vec2& in_dir, const Vec2& out_dir) {
    BoundaryComponent c;
    c.vertices_ = std::move(vertices);
    c.in_dir_ = in_dir.normalized();
    c.out_dir_ = out_dir.normalized();
    c.accumulate();
    c.length_ = std::numeric_limits<double>::infinity();
    return c;
  }

  bool periodic() const { return periodic_; }
  bool is_circle() const { return is_circle_; }
  double length() const { return length_; }
  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  /// Polyline vertices (closed loops repeat the first vertex at the end).
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<double>& vertex_coords() const { return cum_; }

  Vec2 point_at(double s) const {
    if (is_circle_) return center_ + radius_ * unit_dir(s / radius_);
    if (periodic_) s = wrap_periodic(s);
    if (!periodic_ && s <= 0.0) return vertices_.front() + s * in_dir_;
    if (!periodic_ && s >= cum_.back()) return vertices_.back() + (s - cum_.back()) * out_dir_;
    const std::size_t i = segment_index(s);
    const double len = cum_[i + 1] - cum_[i];
    const double f = len > 0 ? (s - cum_[i]) / len : 0.0;
    return (1.0 - f) * vertices_[i] + f * vertices_[i + 1];
  }

  Vec2 tangent_at(double s) const {
    if (is_circle_) return unit_perp(s / radius_);
    if (periodic_) s = wrap_periodic(s);
    if (!periodic_ && s < 0.0) return in_dir_;
    if (!periodic_ && s >= cum_.back()) return out_dir_;
    const std::size_t i = segment_index(s);
    return (vertices_[i + 1] - vertices_[i]).normalized();
  }

  /// Arclength coordinate of the closest boundary point, and its distance.
  std::pair<double, double> locate(const Vec2& x) const {
    if (is_circle_) {
      const Vec2 d = x - center_;
      double a = std::atan2(d[1], d[0]);
      if (a < 0) a += kTwoPi;
      return {a * radius_, std::abs(d.norm() - radius_)};
    }
    double best_s = 0.0, best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](double s) {
      const double d = (point_at(s) - x).norm();
      if (d < best_d) best_d = d, best_s = s;
    };
    for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
      const Vec2 e = vertices_[i + 1] - vertices_[i];
      const double len2 = e.squaredNorm();
      const double f = len2 > 0 ? std::clamp((x - vertices_[i]).dot(e) / len2, 0.0, 1.0) : 0.0;
      consider(cum_[i] + f * (cum_[i + 1] - cum_[i]));
    }
    if (!periodic_) {
      consider(std::min(0.0, (x - vertices_.front()).dot(in_dir_)));
      consider(cum_.back() + std::max(0.0, (x - vertices_.back()).dot(out_dir_)));
    }
    return {best_s, best_d};
  }

  /// 1/2 int x cross dx along the component from s0 to s1 (s1 may be below s0).
  double path_integral(double s0, double s1) const {
    if (s0 == s1) return 0.0;
    if (s1 < s0) return -path_integral(s1, s0);
    if (is_circle_) {
      const double a = s0 / radius_, b = s1 / radius_;
      return 0.5 * (radius_ * radius_ * (b - a) + radius_ * center_[0] * (std::sin(b) - std::sin(a)) -
                    radius_ * center_[1] * (std::cos(b) - std::cos(a)));
    }
    if (!std::isfinite(s0) || !std::isfinite(s1)) fail(ErrorCode::not_closed, "wall path reaches infinity");
    std::vector<double> breaks{s0};
    if (periodic_) {
      const double base = std::floor(s0 / length_) * length_;
      for (double k = base; k < s1 + length_; k += length_)
        for (double c : cum_)
          if (k + c > s0 && k + c < s1) breaks.push_back(k + c);
    } else {
      for (double c : cum_)
        if (c > s0 && c < s1) breaks.push_back(c);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.push_back(s1);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += 0.5 * cross2(point_at(breaks[i]), point_at(breaks[i + 1]));
    return sum;
  }

 private:
  void accumulate() {
    cum_.assign(vertices_.size(), 0.0);
    for (std::size_t i = 1; i < vertices_.size(); ++i) cum_[i] = cum_[i - 1] + (vertices_[i] - vertices_[i - 1]).norm();
  }
  double wrap_periodic(double s) const {
    s = std::fmod(s, length_);
    return s < 0 ? s + length_ : s;
  }
  std::size_t segment_index(double s) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin() - 1);
    return std::min(i, cum_.size() - 2);
  }

  bool is_circle_ = false;
  bool periodic_ = false;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  std::vector<Vec2> vertices_;
  std::vector<double> cum_;
  Vec2 in_dir_ = Vec2::Zero();
  Vec2 out_dir_ = Vec2::Zero();
  double length_ = 0.0;
};

/// A point on a planar domain boundary: component index and arclength coordinate.
struct BoundaryCoord {
  int component;
  double s;
};

/// Ambient convex region. Facets are stored as (point, inner unit normal).
template <int Dim>
class Domain {
 public:
  using VecD = Vec<Dim>;

  static Domain full_space() {
    Domain d;
    d.kind_ = DomainKind::full_space;
    d.finish();
    return d;
  }

  static Domain half_space(const VecD& inner_normal, const VecD& point = VecD::Zero()) {
    if (!(inner_normal.norm() > 0)) fail(ErrorCode::invalid_argument, "half_space normal must be nonzero");
    Domain d;
    d.kind_ = DomainKind::half_space;
    d.points_ = {point};
    d.normals_ = {inner_normal.normalized()};
    d.finish();
    return d;
  }

  /// {0 <= x_last <= width}.
  static Domain slab(double width) {
    if (!(width > 0)) fail(ErrorCode::invalid_argument, "slab width must be positive");
    Domain d;
    d.kind_ = DomainKind::slab;
    d.width_ = width;
    VecD e = VecD::Zero();
    e[Dim - 1] = 1.0;
    d.points_ = {VecD::Zero(), width * e};
    d.normals_ = {e, -e};
    d.finish();
    return d;
  }

  /// {x : <x - apex, n_i> >= 0 for all facets}, normals pointing inside.
  static Domain polyhedral_cone(std::vector<VecD> inner_normals, const VecD& apex = VecD::Zero()) {
    if (inner_normals.empty()) fail(ErrorCode::invalid_argument, "cone needs at least one facet");
    Domain d;
    d.kind_ = DomainKind::polyhedral_cone;
    for (auto& n : inner_normals) {
      if (!(n.norm() > 0)) fail(ErrorCode::invalid_argument, "cone facet normal must be nonzero");
      d.normals_.push_back(n.normalized());
      d.points_.push_back(apex);
    }
    d.apex_ = apex;
    if constexpr (Dim == 2)
      if (d.normals_.size() != 2) fail(ErrorCode::invalid_argument, "a planar cone has exactly two facets");
    d.finish();
    return d;
  }

  static Domain polygon(std::vector<Vec2> vertices)
    requires(Dim == 2)
  {
    const std::size_t m = vertices.size();
    if (m < 3) fail(ErrorCode::invalid_argument, "polygon needs at least three vertices");
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 a = vertices[i], b = vertices[(i + 1) % m], c = vertices[(i + 2) % m];
      if (!(cross2(b - a, c - b) > 1e-12)) fail(ErrorCode::invalid_argument, "polygon must be strictly convex and counterclockwise");
    }
    Domain d;
    d.kind_ = DomainKind::polygon2d;
    d.vertices_ = vertices;
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 e = (vertices[(i + 1) % m] - vertices[i]).normalized();
      d.points_.push_back(vertices[i]);
      d.normals_.push_back(rot_ccw(e));
    }
    d.finish();
    return d;
  }

  static Domain disk(const Vec2& center, double radius)
    requires(Dim == 2)
  {
    if (!(radius > 0)) fail(ErrorCode::invalid_argument, "disk radius must be positive");
    Domain d;
    d.kind_ = DomainKind::disk2d;
    d.apex_ = center;
    d.radius_ = radius;
    d.finish();
    return d;
  }

  DomainKind kind() const { return kind_; }
  bool bounded() const { return kind_ == DomainKind::polygon2d || kind_ == DomainKind::disk2d; }
  const std::vector<VecD>& facet_points() const { return points_; }
  const std::vector<VecD>& facet_normals() const { return normals_; }
  const VecD& apex() const { return apex_; }
  const VecD& center() const { return apex_; }
  double radius() const { return radius_; }
  double width() const { return width_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }

  /// Signed distance to the boundary, positive inside (exact for disks, the
  /// facet minimum otherwise).
  double depth(const VecD& x) const {
    if (kind_ == DomainKind::full_space) return std::numeric_limits<double>::infinity();
    if (kind_ == DomainKind::disk2d) return radius_ - (x - apex_).norm();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < normals_.size(); ++i) m = std::min(m, (x - points_[i]).dot(normals_[i]));
    return m;
  }

  bool contains(const VecD& x, double tol = 0.0) const { return depth(x) >= -tol; }
  bool on_boundary(const VecD& x, double tol = kBoundaryTol) const {
    return kind_ != DomainKind::full_space && std::abs(depth(x)) <= tol;
  }

  /// Inner unit normal xi at a boundary point (the active facet for polyhedral domains).
  VecD inner_normal(const VecD& x) const {
    if (!on_boundary(x)) fail(ErrorCode::not_on_boundary, "point is not on the domain boundary");
    if (kind_ == DomainKind::disk2d) return (apex_ - x).normalized();
    std::size_t best = 0;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < normals_.size(); ++i) {
      const double d = std::abs((x - points_[i]).dot(normals_[i]));
      if (d < m) m = d, best = i;
    }
    return normals_[best];
  }

  /// Second fundamental form of the boundary w.r.t. xi, II(v, v).
  double second_fundamental(const VecD& x, const VecD& v) const {
    if (kind_ != DomainKind::disk2d) return 0.0;
    const VecD xi = inner_normal(x);
    return (v - v.dot(xi) * xi).squaredNorm() / radius_;
  }

  double volume() const
    requires(Dim == 2)
  {
    if (kind_ == DomainKind::disk2d) return kPi * radius_ * radius_;
    if (kind_ != DomainKind::polygon2d) return std::numeric_limits<double>::infinity();
    double a = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross2(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    return 0.5 * a;
  }

  const std::vector<BoundaryComponent>& boundary() const
    requires(Dim == 2)
  {
    return components_;
  }

  BoundaryCoord boundary_coord(const Vec2& x) const
    requires(Dim == 2)
  {
    if (components_.empty()) fail(ErrorCode::not_on_boundary, "domain has no boundary");
    BoundaryCoord best{0, 0.0};
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < components_.size(); ++i) {
      auto [s, d] = components_[i].locate(x);
      if (d < best_d) best_d = d, best = {static_cast<int>(i), s};
    }
    if (best_d > kBoundaryTol) fail(ErrorCode::not_on_boundary, "point is not on the domain boundary");
    return best;
  }

  /// 1/2 int x cross dx along the boundary from a to b, walking with the domain on the left.
  double wall_path(const Vec2& a, const Vec2& b) const
    requires(Dim == 2)
  {
    const BoundaryCoord ca = boundary_coord(a), cb = boundary_coord(b);
    if (ca.component != cb.component) fail(ErrorCode::not_closed, "closure would cross between boundary components");
    const BoundaryComponent& c = components_[ca.component];
    double s1 = cb.s;
    if (c.periodic()) {
      while (s1 < ca.s) s1 += c.length();
    } else if (s1 < ca.s) {
      fail(ErrorCode::not_closed, "closure along an unbounded wall runs through infinity");
    }
    return c.path_integral(ca.s, s1);
  }

  /// Same integral along the shorter way between two nearby points of one component.
  double wall_short(const Vec2& a, const Vec2& b) const
    requires(Dim == 2)
  {
    const BoundaryCoord ca = boundary_coord(a), cb = boundary_coord(b);
    if (ca.component != cb.component) fail(ErrorCode::not_closed, "points lie on different boundary components");
    const BoundaryComponent& c = components_[ca.component];
    double s1 = cb.s;
    if (c.periodic()) s1 = ca.s + std::remainder(s1 - ca.s, c.length());
    return c.path_integral(ca.s, s1);
  }

 private:
  Domain() = default;

  void finish() {
    if constexpr (Dim == 2) build_boundary();
  }

  void build_boundary()
    requires(Dim == 2)
  {
    components_.clear();
    switch (kind_) {
      case DomainKind::full_space: break;
      case DomainKind::disk2d: components_.push_back(BoundaryComponent::circle(apex_, radius_)); break;
      case DomainKind::polygon2d: components_.push_back(BoundaryComponent::loop(vertices_)); break;
      case DomainKind::half_space:
      case DomainKind::slab:
        for (std::size_t i = 0; i < normals_.size(); ++i) {
          const Vec2 d = rot_cw(normals_[i]);
          components_.push_back(BoundaryComponent::path({points_[i]}, d, d));
        }
        break;
      case DomainKind::polyhedral_cone: {
        // Each facet line carries one boundary ray; the walk comes in along one and leaves along the other.
        Vec2 in_dir, out_dir;
        for (std::size_t i = 0; i < 2; ++i) {
          const Vec2 d = rot_cw(normals_[i]);
          const Vec2& other = normals_[1 - i];
          if (d.dot(other) >= 0) out_dir = d;  // ray apex + s d stays inside
          else in_dir = d;
        }
        components_.push_back(BoundaryComponent::path({apex_}, in_dir, out_dir));
        break;
      }
    }
  }

  DomainKind kind_ = DomainKind::full_space;
  std::vector<VecD> points_;
  std::vector<VecD> normals_;
  VecD apex_ = VecD::Zero();
  double radius_ = 0.0;
  double width_ = 0.0;
  std::vector<Vec2> vertices_;
  std::vector<BoundaryComponent> components_;
};

using Domain2 = Domain<2>;
using Domain3 = Domain<3>;

}  // namespace wulffkit
