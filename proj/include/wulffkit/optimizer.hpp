#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wulffkit/clip2d.hpp"
#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"

namespace wulffkit {

struct OptimizerOptions {
  int segments = 48;
  int starts = 8;
  int max_outer = 30;
  int max_inner = 400;
  double perturbation = 0.02;
  double grad_tol = 1e-8;
  double area_tol = 1e-10;
};

/// A free polyline with both ends on the (single) boundary component of a
/// bounded planar domain; E lies on its left.
struct PolylineResult {
  std::vector<Vec2> nodes;
  double length = std::numeric_limits<double>::infinity();
  double inner_length = std::numeric_limits<double>::infinity();
  double area = 0.0;
  double constraint_violation = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  std::string status = "diverged";  // converged | stalled | diverged
  bool valid() const { return status != "diverged"; }
};

namespace detail {

inline bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross2(b - a, c - a), d2 = cross2(b - a, d - a);
  const double d3 = cross2(d - c, a - c), d4 = cross2(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

inline bool simple_polyline(const std::vector<Vec2>& x) {
  const std::size_t m = x.size() - 1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 2; j < m; ++j)
      if (segments_cross(x[i], x[i + 1], x[j], x[j + 1])) return false;
  return true;
}

/// Objective pieces for z = (s_a, s_b, t_1 .. t_{m-1}): the ends slide along
/// the wall and interior node i moves along the seed normal, x_i = b_i + t_i n_i.
class PolylineProblem {
 public:
  PolylineProblem(const Body2& body, const Domain2& domain, const std::vector<Vec2>& seed)
      : body_(body), domain_(domain), wall_(domain.boundary().front()), m_(static_cast<int>(seed.size()) - 1),
        base_(seed), normals_(seed.size(), Vec2::Zero()) {
    for (int i = 1; i < m_; ++i) normals_[i] = rot_cw(Vec2(seed[i + 1] - seed[i - 1])).normalized();
  }

  int size() const { return m_ + 1; }

  std::vector<Vec2> nodes(const Eigen::VectorXd& z) const {
    std::vector<Vec2> x(m_ + 1);
    x[0] = wall_.point_at(z[0]);
    x[m_] = wall_.point_at(z[1]);
    for (int i = 1; i < m_; ++i) x[i] = base_[i] + z[i + 1] * normals_[i];
    return x;
  }

  Eigen::VectorXd start() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(size());
    z[0] = wall_.locate(base_.front()).first;
    z[1] = wall_.locate(base_.back()).first;
    return z;
  }

  double wall_area(double sa, double sb) const {
    const double len = wall_.length();
    double upper = sb + std::fmod(sa - sb, len);
    if (upper < sb) upper += len;
    return wall_.path_integral(sb, upper);
  }

  double area(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
    const auto x = nodes(z);
    double a = wall_area(z[0], z[1]);
    for (int i = 0; i < m_; ++i) a += 0.5 * cross2(x[i], x[i + 1]);
    if (grad) {
      grad->setZero(size());
      (*grad)[0] = 0.5 * rot_cw(x[1]).dot(wall_.tangent_at(z[0])) + 0.5 * cross2(x[0], wall_.tangent_at(z[0]));
      (*grad)[1] = 0.5 * rot_ccw(x[m_ - 1]).dot(wall_.tangent_at(z[1])) - 0.5 * cross2(x[m_], wall_.tangent_at(z[1]));
      for (int i = 1; i < m_; ++i) (*grad)[i + 1] = 0.5 * rot_cw(Vec2(x[i + 1] - x[i - 1])).dot(normals_[i]);
    }
    return a;
  }

  double length(const Eigen::VectorXd& z, Eigen::VectorXd* grad, bool inner = false) const {
    const auto x = nodes(z);
    std::vector<Vec2> gx(m_ + 1, Vec2::Zero());
    double len = 0.0;
    for (int i = 0; i < m_; ++i) {
      const Vec2 e = x[i + 1] - x[i];
      if (e.norm() < 1e-300) continue;
      const Vec2 n = inner ? Vec2(rot_ccw(e)) : Vec2(rot_cw(e));
      len += body_.support(n);
      if (grad) {
        const Vec2 g = inner ? Vec2(rot_cw(body_.projection(n))) : Vec2(rot_ccw(body_.projection(n)));
        gx[i + 1] += g;
        gx[i] -= g;
      }
    }
    if (grad) {
      grad->setZero(size());
      (*grad)[0] = gx[0].dot(wall_.tangent_at(z[0]));
      (*grad)[1] = gx[m_].dot(wall_.tangent_at(z[1]));
      for (int i = 1; i < m_; ++i) (*grad)[i + 1] = gx[i].dot(normals_[i]);
    }
    return len;
  }

  double penalty(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
    if (grad) grad->setZero(size());
    double p = 0.0;
    const auto x = nodes(z);
    for (int i = 1; i < m_; ++i) {
      const double d = domain_.depth(x[i]);
      if (d >= 0) continue;
      p += d * d;
      if (grad) (*grad)[i + 1] += 2 * d * depth_gradient(x[i]).dot(normals_[i]);
    }
    return p;
  }

  Vec2 depth_gradient(const Vec2& x) const {
    if (domain_.kind() == DomainKind::disk2d) return -(x - domain_.center()).normalized();
    const auto& ns = domain_.facet_normals();
    const auto& ps = domain_.facet_points();
    std::size_t best = 0;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double d = (x - ps[i]).dot(ns[i]);
      if (d < m) m = d, best = i;
    }
    return ns[best];
  }

  /// Pulls interior nodes back along their normals into the closed domain.
  void project_inside(Eigen::VectorXd& z) const {
    for (int i = 1; i < m_; ++i) {
      auto depth = [&](double t) { return domain_.depth(base_[i] + t * normals_[i]); };
      if (depth(z[i + 1]) >= 0) continue;
      if (depth(0.0) < 0) continue;
      // bisection that always keeps the inside end
      double in = 0.0, out = z[i + 1];
      for (int k = 0; k < 80 && std::abs(out - in) > 1e-15; ++k) {
        const double mid = 0.5 * (in + out);
        (depth(mid) >= 0 ? in : out) = mid;
      }
      z[i + 1] = in;
    }
  }

  bool on_wall(const Eigen::VectorXd& z, int i) const {
    return domain_.depth(base_[i] + z[i + 1] * normals_[i]) < 1e-9;
  }

 private:
  const Body2& body_;
  const Domain2& domain_;
  const BoundaryComponent& wall_;
  int m_;
  std::vector<Vec2> base_, normals_;
};

}  // namespace detail

/// Resamples a polyline to `segments` pieces of equal Euclidean length.
inline std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, int segments) {
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + (pts[i] - pts[i - 1]).norm());
  std::vector<Vec2> out;
  std::size_t j = 0;
  for (int k = 0; k <= segments; ++k) {
    const double s = cum.back() * k / segments;
    while (j + 2 < cum.size() && cum[j + 1] < s) ++j;
    const double len = cum[j + 1] - cum[j];
    const double f = len > 0 ? std::clamp((s - cum[j]) / len, 0.0, 1.0) : 0.0;
    out.push_back((1 - f) * pts[j] + f * pts[j + 1]);
  }
  return out;
}

/// Minimizes the anisotropic length of a free polyline subject to V(E) = v,
/// by an augmented Lagrangian with a BFGS inner loop. The returned curve is
/// moved back onto the constraint exactly, so its length is an upper bound
/// for the profile at v.
inline PolylineResult optimize_free_curve(const Body2& body, const Domain2& domain, double v,
                                          const std::vector<Vec2>& init, const OptimizerOptions& opt = {}) {
  if (domain.kind() != DomainKind::polygon2d && domain.kind() != DomainKind::disk2d)
    fail(ErrorCode::invalid_argument, "the optimizer needs a bounded planar domain");
  if (init.size() < 2) fail(ErrorCode::invalid_argument, "initial curve needs at least two points");
  const int m = opt.segments;
  const detail::PolylineProblem prob(body, domain, resample_polyline(init, m));
  Eigen::VectorXd z = prob.start();
  const int n = prob.size();

  double mult = 0.0, mu = 10.0, kappa = 1e6;
  Eigen::VectorXd ga(n), gl(n), gp(n);
  auto lagrangian = [&](const Eigen::VectorXd& y, Eigen::VectorXd& g) {
    const double a = prob.area(y, &ga) - v;
    const double l = prob.length(y, &gl);
    const double p = prob.penalty(y, &gp);
    g = gl + (mult + mu * a) * ga + kappa * gp;
    return l + mult * a + 0.5 * mu * a * a + kappa * p;
  };

  PolylineResult res;
  double prev_violation = std::numeric_limits<double>::infinity();
  int total_iters = 0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    Eigen::VectorXd g(n);
    double f = lagrangian(z, g);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n) * 1e-3;
    for (int it = 0; it < opt.max_inner; ++it, ++total_iters) {
      if (!std::isfinite(f) || g.norm() < 0.1 * opt.grad_tol) break;
      Eigen::VectorXd dir = -hinv * g;
      if (dir.dot(g) >= 0) {
        hinv = Eigen::MatrixXd::Identity(n, n) * 1e-3;
        dir = -hinv * g;
      }
      double step = 1.0, fn = 0.0;
      Eigen::VectorXd zn(n), gn(n);
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        zn = z + step * dir;
        fn = lagrangian(zn, gn);
        if (std::isfinite(fn) && fn <= f + 1e-4 * step * dir.dot(g)) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      const Eigen::VectorXd s = zn - z, y = gn - g;
      const double sy = s.dot(y);
      if (sy > 1e-300) {
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = hinv * y;
        hinv += (rho * rho * y.dot(hy) + rho) * s * s.transpose() - rho * (hy * s.transpose() + s * hy.transpose());
      }
      const double drop = f - fn;
      z = zn, f = fn, g = gn;
      if (drop <= 1e-16 * (1 + std::abs(f)) && g.norm() < 1e-6) break;
    }
    const double viol = std::abs(prob.area(z, nullptr) - v);
    res.grad_norm = g.norm();
    mult += mu * (prob.area(z, nullptr) - v);
    if (viol < opt.area_tol && res.grad_norm < opt.grad_tol) {
      res.status = "converged";
      break;
    }
    if (viol > 0.25 * prev_violation) mu = std::min(mu * 10, 1e4);
    prev_violation = viol;
  }
  res.iterations = total_iters;
  if (res.status != "converged") res.status = "stalled";

  // back inside the closed domain, then exactly onto the area constraint
  prob.project_inside(z);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd g(n);
    const double a = prob.area(z, &g) - v;
    g[0] = g[1] = 0.0;
    for (int i = 1; i < m; ++i)
      if (prob.on_wall(z, i)) g[i + 1] = 0.0;
    if (std::abs(a) < 1e-14 * (1 + v) || g.squaredNorm() == 0) break;
    z -= a / g.squaredNorm() * g;
    prob.project_inside(z);
  }
  res.nodes = prob.nodes(z);
  res.area = prob.area(z, nullptr);
  res.constraint_violation = std::abs(res.area - v);
  res.length = prob.length(z, nullptr);
  res.inner_length = prob.length(z, nullptr, true);
  bool inside = true;
  for (const auto& x : res.nodes) inside = inside && domain.depth(x) >= -1e-9;
  if (!std::isfinite(res.length) || res.constraint_violation > 1e-9 * (1 + v) || !inside ||
      !detail::simple_polyline(res.nodes))
    res.status = "diverged";
  return res;
}

/// Multi-start wrapper: starts from the given curves, cycling through them and
/// perturbing every start after the first with counter-based noise.
inline PolylineResult optimize_multistart(const Body2& body, const Domain2& domain, double v,
                                          const std::vector<std::vector<Vec2>>& seeds, std::uint64_t seed,
                                          const OptimizerOptions& opt = {}) {
  PolylineResult best;
  if (seeds.empty()) return best;
  const auto& wall = domain.boundary().front();
  for (int k = 0; k < opt.starts; ++k) {
    std::vector<Vec2> init = resample_polyline(seeds[k % seeds.size()], opt.segments);
    if (k >= static_cast<int>(seeds.size())) {
      double len = 0.0;
      for (std::size_t i = 1; i < init.size(); ++i) len += (init[i] - init[i - 1]).norm();
      const double amp = opt.perturbation * len;
      std::uint64_t idx = static_cast<std::uint64_t>(k) << 20;
      auto noise = [&] { return amp * (2 * counter_uniform(seed, idx++) - 1); };
      for (std::size_t i = 1; i + 1 < init.size(); ++i) init[i] += Vec2(noise(), noise());
      init.front() = wall.point_at(wall.locate(init.front()).first + noise());
      init.back() = wall.point_at(wall.locate(init.back()).first + noise());
    }
    try {
      PolylineResult r = optimize_free_curve(body, domain, v, init, opt);
      if (r.valid() && (!best.valid() || r.length < best.length)) best = r;
      else if (!best.valid() && !r.valid()) best = r;
    } catch (const Error&) {
    }
  }
  return best;
}

}  // namespace wulffkit
