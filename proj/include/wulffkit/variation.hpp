#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/finite_difference.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/omega.hpp"

namespace wulffkit {

enum class FlowMode { straight_line, boundary_straightened };

inline std::string_view to_string(FlowMode m) {
  return m == FlowMode::straight_line ? "straight_line" : "boundary_straightened";
}

/// Threshold on the area-weighted standard deviation of H_K, relative to
/// 1 + |mean|, below which H_K is treated as constant.
inline constexpr double kConstantCurvatureTol = 1e-4;
/// Largest stationarity residual accepted by index_form.
inline constexpr double kStationarityTol = 1e-4;

/// Per-node data of the undeformed surface that the flows and integrals reuse.
template <int Dim>
struct NodeData {
  Param<Dim> u;
  double w;  // parameter weight times area element
  Jet<Dim> jet;
  Frame<Dim> frame;
  double omega;
  Param<Dim> domega;
};

template <int Dim>
std::vector<NodeData<Dim>> node_data(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Omega<Dim>* omega) {
  std::vector<NodeData<Dim>> out;
  const auto nodes = s.nodes();
  out.reserve(nodes.size());
  for (const auto& q : nodes) {
    NodeData<Dim> d;
    d.u = q.u;
    d.jet = s.jet(q.u);
    d.frame = frame_from_jet(s, d.jet, body);
    d.w = q.w * d.frame.area_element;
    if (omega) {
      auto [v, g] = omega->eval(q.u);
      d.omega = v;
      d.domega = g;
    } else {
      d.omega = 0.0;
      d.domega = Param<Dim>::Zero();
    }
    out.push_back(std::move(d));
  }
  return out;
}

struct Functionals {
  double area;
  double volume;
};

/// A one-parameter deformation whose velocity on the surface is omega N_K.
template <int Dim>
class Flow {
 public:
  using VecD = Vec<Dim>;
  using ParamD = Param<Dim>;

  Flow(Hypersurface<Dim> base, ConvexBody<Dim> body, Omega<Dim> omega, FlowMode mode = FlowMode::straight_line,
       std::optional<Domain<Dim>> domain = std::nullopt)
      : base_(std::move(base)), body_(std::move(body)), omega_(std::move(omega)), mode_(mode), domain_(std::move(domain)) {
    if (mode_ == FlowMode::boundary_straightened) {
      if constexpr (Dim == 2) {
        if (!domain_ || domain_->kind() != DomainKind::disk2d)
          fail(ErrorCode::mode_unsupported, "boundary_straightened flows are implemented for disk2d domains");
      } else {
        fail(ErrorCode::mode_unsupported, "boundary_straightened flows are planar only");
      }
    }
    nodes_ = node_data(base_, body_, &omega_);
    flux0_ = flux_at(0.0);
    init_reference_volume();
  }

  const Hypersurface<Dim>& base() const { return base_; }
  const ConvexBody<Dim>& body() const { return body_; }
  const Omega<Dim>& omega() const { return omega_; }
  FlowMode mode() const { return mode_; }
  const std::optional<Domain<Dim>>& domain() const { return domain_; }
  const std::vector<NodeData<Dim>>& nodes() const { return nodes_; }
  /// True when the reported volume is measured from an arbitrary reference
  /// (the region bounded by the base surface is not finite or not closed).
  bool volume_relative() const { return volume_relative_; }

  /// Point and first derivatives of the deformed surface at parameter u.
  Jet<Dim> deformed(const ParamD& u, double t) const { return deformed(base_.jet(u), omega_.eval(u), t); }

  Functionals functionals(double t) const {
    double area = 0.0, flux = 0.0;
    Tangents<Dim> e;
    SmallMat<Dim> c;
    VecD nrm;
    for (const auto& d : nodes_) {
      const Jet<Dim> j = t == 0.0 ? d.jet : deformed(d, t);
      try {
        base_.euclidean(j, e, c, nrm);
      } catch (const Error&) {
        fail(ErrorCode::immersion_lost, "deformed surface is not immersed at t = " + std::to_string(t));
      }
      const double q = d.w / d.frame.area_element * std::abs(c.determinant());
      area += q * body_.support(nrm);
      flux += q * j.x.dot(nrm);
    }
    flux /= Dim;
    return {area, reference_volume_ + flux - flux0_ + wall_delta(t)};
  }

 private:
  Jet<Dim> deformed(const NodeData<Dim>& d, double t) const { return deformed(d.jet, {d.omega, d.domega}, t, &d.frame); }

  Jet<Dim> deformed(const Jet<Dim>& j, const std::pair<double, ParamD>& om, double t, const Frame<Dim>* fr = nullptr) const {
    Frame<Dim> local;
    if (!fr) {
      local = frame_from_jet(base_, j, body_);
      fr = &local;
    }
    const double w = om.first;
    const ParamD& dw = om.second;
    const VecD nk = fr->normal_k;
    // d/du_i N_K = -E B_K C e_i
    const Tangents<Dim> dnk = -fr->basis * fr->shape_k * fr->coords;
    Jet<Dim> out = j;
    if (mode_ == FlowMode::straight_line) {
      out.x = j.x + t * w * nk;
      out.d1 = j.d1 + t * (nk * dw.transpose() + w * dnk);
      return out;
    }
    if constexpr (Dim == 2) {
      // chart (theta, R - |x - c|) flattens the circle; move along a straight line in chart coordinates.
      // The chart is singular at the centre, so it is blended into the straight flow by a cutoff in r.
      const Vec2 c = domain_->center();
      const double big_r = domain_->radius();
      const Vec2 rel = j.x - c;
      const double r = rel.norm();
      const Vec2 x1 = j.d1.col(0);
      const Vec2 v = w * nk;
      const Vec2 dv = dw[0] * nk + w * dnk.col(0);
      const Vec2 lin_x = j.x + t * v;
      const Vec2 lin_d = x1 + t * dv;
      const auto [chi, dchi] = chart_cutoff(r / big_r);
      if (chi == 0.0) {
        out.x = lin_x;
        out.d1.col(0) = lin_d;
        return out;
      }
      const Vec2 er = rel / r, et = rot_ccw(er);
      auto dphi = [&](const Vec2& a) { return Vec2(et.dot(a) / r, -er.dot(a)); };
      // second derivative of the chart, D^2 Phi[a, b]
      auto d2phi = [&](const Vec2& a, const Vec2& b) {
        const double th = -(er.dot(a) * et.dot(b) + et.dot(a) * er.dot(b)) / (r * r);
        const double rr = (a.dot(b) - er.dot(a) * er.dot(b)) / r;
        return Vec2(th, -rr);
      };
      const Vec2 y = Vec2(std::atan2(rel[1], rel[0]), big_r - r) + t * dphi(v);
      const Vec2 dy = dphi(x1) + t * (d2phi(x1, v) + dphi(dv));
      const double rad = big_r - y[1];
      const Vec2 u_t = unit_dir(y[0]);
      const Vec2 chart_x = c + rad * u_t;
      const Vec2 chart_d = rad * dy[0] * rot_ccw(u_t) - dy[1] * u_t;
      const double dr = er.dot(x1) / big_r;
      out.x = lin_x + chi * (chart_x - lin_x);
      out.d1.col(0) = lin_d + chi * (chart_d - lin_d) + dchi * dr * (chart_x - lin_x);
      return out;
    }
    return out;
  }

  /// Smooth step in the relative radius s = r / R: 0 below 1/2, 1 above 4/5.
  static std::pair<double, double> chart_cutoff(double s) {
    constexpr double lo = 0.5, hi = 0.8;
    if (s <= lo) return {0.0, 0.0};
    if (s >= hi) return {1.0, 0.0};
    const double x = (s - lo) / (hi - lo);
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    const double da = a / (x * x), db = -b / ((1.0 - x) * (1.0 - x));
    const double chi = a / (a + b);
    const double dchi = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    return {chi, dchi / (hi - lo)};
  }

  double flux_at(double t) const {
    double flux = 0.0;
    Tangents<Dim> e;
    SmallMat<Dim> c;
    VecD nrm;
    for (const auto& d : nodes_) {
      const Jet<Dim> j = t == 0.0 ? d.jet : deformed(d, t);
      base_.euclidean(j, e, c, nrm);
      flux += d.w / d.frame.area_element * std::abs(c.determinant()) * j.x.dot(nrm);
    }
    return flux / Dim;
  }

  void init_reference_volume() {
    volume_relative_ = false;
    if (base_.closed()) {
      reference_volume_ = flux0_;
      return;
    }
    if constexpr (Dim == 2) {
      if (domain_) {
        try {
          reference_volume_ = enclosed_volume(base_, *domain_);
          return;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::not_closed) throw;
        }
      }
    }
    reference_volume_ = 0.0;
    volume_relative_ = true;
  }

  /// Change of the wall part of the boundary of E_t, relative to t = 0.
  double wall_delta(double t) const {
    if (base_.closed() || t == 0.0) return 0.0;
    if constexpr (Dim == 2) {
      const Vec2 s0 = start_point(base_), e0 = end_point(base_);
      const Vec2 st = deformed(base_.lo(), t).x, et = deformed(base_.hi(), t).x;
      const bool fixed = (st - s0).norm() <= 1e-14 && (et - e0).norm() <= 1e-14;
      if (fixed) return 0.0;
      if (!domain_) fail(ErrorCode::mode_unsupported, "moving endpoints need a domain to close the region");
      if (base_.orientation() > 0) return domain_->wall_short(et, e0) + domain_->wall_short(s0, st);
      return domain_->wall_short(st, s0) + domain_->wall_short(e0, et);
    } else {
      check_fixed_boundary(t);
      return 0.0;
    }
  }

  void check_fixed_boundary(double t) const
    requires(Dim == 3)
  {
    for (int axis = 0; axis < 2; ++axis) {
      if (base_.periodic(axis)) continue;
      const int other = 1 - axis;
      for (double side : {base_.lo()[axis], base_.hi()[axis]}) {
        for (int k = 0; k <= 16; ++k) {
          ParamD u;
          u[axis] = side;
          u[other] = base_.lo()[other] + (base_.hi()[other] - base_.lo()[other]) * k / 16.0;
          const Jet<3> j = base_.jet(u);
          if (j.d1.col(other).norm() < 1e-12) continue;  // collapsed edge (pole or centre)
          if ((deformed(j, omega_.eval(u), t).x - j.x).norm() > 1e-14)
            fail(ErrorCode::mode_unsupported, "surface boundary moves; volume closure needs omega = 0 on the boundary");
        }
      }
    }
  }

  Hypersurface<Dim> base_;
  ConvexBody<Dim> body_;
  Omega<Dim> omega_;
  FlowMode mode_;
  std::optional<Domain<Dim>> domain_;
  std::vector<NodeData<Dim>> nodes_;
  double flux0_ = 0.0;
  double reference_volume_ = 0.0;
  bool volume_relative_ = false;
};

// ---------------------------------------------------------------------------
// Reports

struct VariationReport {
  double a_prime_analytic = 0.0;
  FdEstimate a_prime_fd;
  double v_prime_analytic = 0.0;
  FdEstimate v_prime_fd;
  std::optional<double> a_second_analytic;
  FdEstimate a_second_fd;
  FdEstimate v_second_fd;
  std::optional<double> index_form_value;
  std::optional<FdEstimate> f_second_fd;  // (A + n Hbar V)''(0)
  bool closed_form = false;               // H_K constant: Cor. closed forms used
  double mean_curvature = 0.0;
  std::array<double, 3> steps = kFdSteps;

  /// Max over the reported pairs of |fd - analytic| / (1 + |analytic|).
  double worst_relative_gap() const {
    double g = std::abs(a_prime_fd.value - a_prime_analytic) / (1 + std::abs(a_prime_analytic));
    g = std::max(g, std::abs(v_prime_fd.value - v_prime_analytic) / (1 + std::abs(v_prime_analytic)));
    if (a_second_analytic)
      g = std::max(g, std::abs(a_second_fd.value - *a_second_analytic) / (1 + std::abs(*a_second_analytic)));
    return g;
  }
  double worst_order() const {
    double o = std::numeric_limits<double>::infinity();
    for (const FdEstimate* e : {&a_prime_fd, &v_prime_fd, &a_second_fd})
      if (!e->exact) o = std::min(o, e->order);
    return o;
  }
};

/// Area-weighted mean and standard deviation of H_K.
template <int Dim>
std::pair<double, double> mean_curvature_stats(const std::vector<NodeData<Dim>>& nodes) {
  double a = 0.0, m = 0.0;
  for (const auto& d : nodes) a += d.w, m += d.w * d.frame.mean_k;
  m /= a;
  double var = 0.0;
  for (const auto& d : nodes) var += d.w * (d.frame.mean_k - m) * (d.frame.mean_k - m);
  return {m, std::sqrt(var / a)};
}

template <int Dim>
struct FirstOrderIntegrals {
  double a_prime = 0.0;
  double v_prime = 0.0;
  double a_second = 0.0;
  double bulk_index = 0.0;  // interior part of I_K
};

template <int Dim>
FirstOrderIntegrals<Dim> variation_integrals(const std::vector<NodeData<Dim>>& nodes) {
  constexpr int n = Dim - 1;
  FirstOrderIntegrals<Dim> r;
  for (const auto& d : nodes) {
    const Frame<Dim>& f = d.frame;
    const double w = d.omega;
    const double phi = f.phi_k, h = f.mean_k;
    const double tr2 = (f.shape_k * f.shape_k).trace();
    const double grad = f.gradient_k(d.domega).dot(f.gradient(d.domega));
    r.a_prime += -d.w * n * h * w * phi;
    r.v_prime += d.w * w * phi;
    r.a_second += d.w * (grad * phi * phi + (n * n * h * h - tr2) * w * w * phi);
    r.bulk_index += d.w * (grad * phi * phi - tr2 * w * w * phi);
  }
  return r;
}

template <int Dim>
FdSamples sample_functionals(const Flow<Dim>& flow) {
  return sample_stencil([&](double t) {
    const Functionals f = flow.functionals(t);
    return std::vector<double>{f.area, f.volume};
  });
}

template <int Dim>
VariationReport first_variation(const Flow<Dim>& flow, const FdSamples* samples = nullptr) {
  constexpr int n = Dim - 1;
  VariationReport r;
  const auto [mean, sd] = mean_curvature_stats(flow.nodes());
  const auto in = variation_integrals(flow.nodes());
  r.mean_curvature = mean;
  r.closed_form = sd <= kConstantCurvatureTol * (1 + std::abs(mean));
  r.v_prime_analytic = in.v_prime;
  r.a_prime_analytic = r.closed_form ? -n * mean * in.v_prime : in.a_prime;
  const FdSamples s = samples ? *samples : sample_functionals(flow);
  r.steps = s.steps;
  r.a_prime_fd = s.first(0);
  r.v_prime_fd = s.first(1);
  r.a_second_fd = s.second(0);
  r.v_second_fd = s.second(1);
  return r;
}

template <int Dim>
VariationReport second_variation(const Flow<Dim>& flow) {
  if (flow.mode() != FlowMode::straight_line)
    fail(ErrorCode::mode_unsupported, "the closed-form second variation needs a straight-line flow (Z = 0)");
  VariationReport r = first_variation(flow);
  r.a_second_analytic = variation_integrals(flow.nodes()).a_second;
  return r;
}

struct StationarityResidual {
  double mean_curvature_dev = 0.0;
  double contact_dev = 0.0;
  double mean_curvature = 0.0;
};

/// Curve endpoints, or sampled boundary edges of a surface patch, that lie on the domain boundary.
template <int Dim>
std::vector<BoundaryPoint<Dim>> boundary_points(const Hypersurface<Dim>& s, const Domain<Dim>& domain) {
  std::vector<BoundaryPoint<Dim>> out;
  if (s.closed()) return out;
  if constexpr (Dim == 2) {
    for (Endpoint e : {Endpoint::start, Endpoint::end}) {
      const auto bp = curve_endpoint(s, e);
      if (domain.on_boundary(s.point(bp.u))) out.push_back(bp);
    }
  } else {
    for (int axis = 0; axis < 2; ++axis) {
      if (s.periodic(axis)) continue;
      const int other = 1 - axis;
      for (int side = 0; side < 2; ++side) {
        for (const auto& q : composite_gauss(s.lo()[other], s.hi()[other], 4)) {
          Param<3> u, inward = Param<3>::Zero();
          u[axis] = side == 0 ? s.lo()[axis] : s.hi()[axis];
          u[other] = q.t;
          inward[axis] = side == 0 ? 1.0 : -1.0;
          if (s.jet(u).d1.col(other).norm() < 1e-12) continue;
          if (domain.on_boundary(s.point(u))) out.push_back({u, inward});
        }
      }
    }
  }
  return out;
}

template <int Dim>
StationarityResidual stationarity_residual(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body,
                                           const Domain<Dim>& domain) {
  const auto nodes = node_data<Dim>(s, body, nullptr);
  StationarityResidual r;
  r.mean_curvature = mean_curvature_stats(nodes).first;
  for (const auto& d : nodes) r.mean_curvature_dev = std::max(r.mean_curvature_dev, std::abs(d.frame.mean_k - r.mean_curvature));
  for (const auto& bp : boundary_points(s, domain))
    r.contact_dev = std::max(r.contact_dev, std::abs(boundary_frame(s, body, domain, bp).contact));
  return r;
}

/// Boundary part of I_K: sum (curves) or integral (surfaces) of II(N_K, N_K) / <nu, xi> omega^2 phi_K.
template <int Dim>
double index_boundary_term(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Domain<Dim>& domain,
                           const Omega<Dim>& omega) {
  if (s.closed()) return 0.0;
  double sum = 0.0;
  if constexpr (Dim == 2) {
    for (const auto& bp : boundary_points(s, domain)) {
      const auto b = boundary_frame(s, body, domain, bp);
      const double w = omega.value(bp.u);
      sum += b.ii_nk / b.transversality * w * w * b.phi_k;
    }
  }
  // every three-dimensional domain here has flat walls, so II vanishes there
  return sum;
}

template <int Dim>
double index_form(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, const Domain<Dim>& domain,
                  const Omega<Dim>& omega, double stationarity_tol = kStationarityTol) {
  const StationarityResidual res = stationarity_residual(s, body, domain);
  if (res.mean_curvature_dev > stationarity_tol || res.contact_dev > stationarity_tol)
    fail(ErrorCode::not_stationary, "stationarity residuals (" + std::to_string(res.mean_curvature_dev) + ", " +
                                        std::to_string(res.contact_dev) + ") exceed tolerance");
  const auto nodes = node_data(s, body, &omega);
  return variation_integrals(nodes).bulk_index - index_boundary_term(s, body, domain, omega);
}

/// Index form together with the finite-difference second derivative of
/// A_K + n Hbar V along the flow.
template <int Dim>
VariationReport index_form_check(const Flow<Dim>& flow) {
  constexpr int n = Dim - 1;
  if (!flow.domain()) fail(ErrorCode::invalid_argument, "index form needs a domain");
  const FdSamples s = sample_functionals(flow);
  VariationReport r = first_variation(flow, &s);
  r.index_form_value = index_form(flow.base(), flow.body(), *flow.domain(), flow.omega());
  FdSamples g = s;
  auto combine = [&](std::vector<double>& v) { v = {v[0] + n * r.mean_curvature * v[1]}; };
  combine(g.center);
  for (int i = 0; i < 3; ++i) combine(g.plus[i]), combine(g.minus[i]);
  r.f_second_fd = g.second(0);
  if (flow.mode() == FlowMode::straight_line) r.a_second_analytic = variation_integrals(flow.nodes()).a_second;
  return r;
}

struct ProfileSlope {
  double f_prime = 0.0;
  double f_second = 0.0;
  double f_prime_fd = 0.0;
  double f_second_fd = 0.0;
};

/// Slope and curvature at v0 of f = (A_K o V^{-1})^{(n+1)/n} along the flow.
template <int Dim>
ProfileSlope profile_slope_curvature(const Flow<Dim>& flow, std::optional<double> index_value = std::nullopt) {
  constexpr int n = Dim - 1;
  const auto in = variation_integrals(flow.nodes());
  if (std::abs(in.v_prime) < 1e-12) fail(ErrorCode::zero_volume_velocity, "V'(0) vanishes");
  const auto [mean, sd] = mean_curvature_stats(flow.nodes());
  (void)sd;
  const Functionals f0 = flow.functionals(0.0);
  const double a = f0.area;
  const double p = (n + 1.0) / n;
  double index = 0.0;
  if (index_value) {
    index = *index_value;
  } else if (flow.domain()) {
    index = index_form(flow.base(), flow.body(), *flow.domain(), flow.omega());
  } else {
    index = in.bulk_index;
  }
  ProfileSlope r;
  r.f_prime = -(n + 1) * mean * std::pow(a, 1.0 / n);
  r.f_second = p * std::pow(a, 1.0 / n) * (n * mean * mean / a + index / (in.v_prime * in.v_prime));
  const FdSamples s = sample_functionals(flow);
  const double a1 = s.first(0).value, a2 = s.second(0).value;
  const double v1 = s.first(1).value, v2 = s.second(1).value;
  // f(t) = A(t)^p; df/dv = f'/V', d2f/dv2 = (f'' V' - f' V'') / V'^3
  const double ft1 = p * std::pow(a, p - 1) * a1;
  const double ft2 = p * (p - 1) * std::pow(a, p - 2) * a1 * a1 + p * std::pow(a, p - 1) * a2;
  r.f_prime_fd = ft1 / v1;
  r.f_second_fd = (ft2 * v1 - ft1 * v2) / (v1 * v1 * v1);
  return r;
}

}  // namespace wulffkit
