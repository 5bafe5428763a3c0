#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wulffkit/cone.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/io/cache.hpp"
#include "wulffkit/io/output.hpp"
#include "wulffkit/io/schema.hpp"
#include "wulffkit/profile.hpp"
#include "wulffkit/variation.hpp"
#include "wulffkit/version.hpp"

namespace wulffkit::io {

/// Named tolerances with defaults; overrides for unknown names are rejected.
class Tolerances {
 public:
  Tolerances(std::vector<std::pair<std::string, double>> defaults, std::map<std::string, double> overrides = {})
      : overrides_(std::move(overrides)) {
    for (const auto& [k, v] : defaults) defaults_[k] = v;
    for (const auto& [k, v] : overrides_)
      if (!defaults_.count(k)) {
        std::string known;
        for (const auto& [d, x] : defaults_) known += (known.empty() ? "" : ", ") + d;
        fail(ErrorCode::schema_error, "--tol " + k + ": unknown tolerance (known: " + known + ")");
      }
  }

  double operator()(const std::string& name) const {
    if (auto it = overrides_.find(name); it != overrides_.end()) return it->second;
    auto it = defaults_.find(name);
    if (it == defaults_.end()) fail(ErrorCode::invalid_argument, "tolerance " + name + " is not declared");
    return it->second;
  }
  std::optional<double> override_of(const std::string& name) const {
    if (auto it = overrides_.find(name); it != overrides_.end()) return it->second;
    return std::nullopt;
  }
  const std::map<std::string, double>& defaults() const { return defaults_; }

 private:
  std::map<std::string, double> defaults_;
  std::map<std::string, double> overrides_;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Verdict> checks;
  json notes = json::object();

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Verdict& c) { return c.pass; });
  }
  json to_json() const {
    json c = json::array();
    for (const auto& k : checks) c.push_back(k.to_json());
    json j{{"id", id}, {"title", title}, {"pass", pass()}, {"checks", c}};
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }
  void add(const std::string& name, double value, double tol, const std::string& source, bool pass) {
    checks.push_back({name, pass, value, tol, source});
  }
  void at_most(const std::string& name, double value, double tol, const std::string& source) {
    add(name, value, tol, source, value <= tol);
  }
  void at_least(const std::string& name, double value, double tol, const std::string& source) {
    add(name, value, tol, source, value >= tol);
  }
};

struct BatteryOptions {
  std::uint64_t seed = 7;
  int jobs = 1;
  std::map<std::string, double> tolerances;
};

inline std::vector<std::pair<std::string, double>> battery_tolerance_defaults() {
  return {{"c1.mean_curvature", 1e-6}, {"c1.trace_gap", 1e-8},       {"c1.area_identity", 1e-6},
          {"c2.relative", 1e-4},       {"c2.min_order", 1.95},        {"c3.relative", 1e-3},
          {"c3.contact", 1e-8},        {"c4.identity_floor", 1e-6},  {"c4.sigma_multiple", 3.0},
          {"c4.mc_relative_sigma", 1e-3}, {"c4.sqrt_pi", 1e-10},     {"c5.value", 1e-3},
          {"c5.symmetry", 1e-3},       {"c5.concavity", 1e-3},       {"c5.comparison", 1e-4},
          {"c5.tight", 1e-3},          {"c6.concavity_relative", 1e-3}, {"c6.slope", 1e-3},
          {"c7.second_variation", 1e-6}, {"c7.ratio", 1e-8}};
}

namespace scenes {

inline Body2 ellipse41() { return Body2::ellipsoid((Mat<2>() << 4, 0, 0, 1).finished()); }
inline Body3 ellipsoid421() { return Body3::ellipsoid(Vec3(4, 2, 1).asDiagonal()); }
inline Body2 cos2_body() { return Body2::fourier(2.0, {0.0, 0.3}, {}); }
inline Body2 lopsided_body() { return Body2::fourier(2.0, {0.2, 0.3}, {}); }
inline Domain2 unit_square() { return Domain2::polygon({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}); }

/// Arc of p + lambda K inside the unit disk, p = (d, 0), with d chosen so the
/// arc meets the circle in the stationary contact geometry <N_K, xi> = 0.
/// K must be symmetric about the x-axis.
inline Curve stationary_disk_arc(const Body2& k, double lambda) {
  auto hit = [&](double d) {
    return solve_bracketed([&](double t) { return (Vec2(d, 0) + lambda * k.projection(unit_dir(t))).norm() - 1; },
                           1e-9, kPi, 60);
  };
  auto contact = [&](double d) {
    const double t = hit(d);
    const Vec2 x = Vec2(d, 0) + lambda * k.projection(unit_dir(t));
    return -k.projection(unit_dir(t)).dot(x) / x.norm();
  };
  // bracket from the right until the far side of the shape stays inside the disk
  double lo = 1.0, hi = 1.0;
  while (contact(lo) > 0) lo -= 0.05;
  while (contact(hi) < 0) hi += 0.05;
  const double d = solve_bracketed(contact, lo, hi, 62);
  const double t = hit(d);
  return shapes::wulff_arc(k, Vec2(d, 0), lambda, t, kTwoPi - t);
}

}  // namespace scenes

namespace detail {

inline double rel_gap(double fd, double analytic) { return std::abs(fd - analytic) / (1 + std::abs(analytic)); }

inline int default_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

}  // namespace detail

// ---------------------------------------------------------------- criteria

/// Wulff identities on the boundary of K.
inline CriterionResult criterion_wulff_identities(const Tolerances& tol) {
  CriterionResult r{1, "Wulff identities on the boundary of K"};
  double h_dev = 0.0, gap = 0.0, area = 0.0;
  auto run = [&](const auto& body, int resolution) {
    constexpr int Dim = std::decay_t<decltype(body)>::dim;
    constexpr int n = Dim - 1;
    const auto s = wulff_sample(body, resolution);
    for (const auto& q : s.nodes()) {
      const auto f = frame_at(s, body, q.u);
      h_dev = std::max(h_dev, std::abs(f.mean_k + 1.0));
      gap = std::max(gap, std::abs(f.trace_gap));
    }
    const double a = anisotropic_area(s, body), want = (n + 1) * body.volume();
    area = std::max(area, std::abs(a - want) / want);
  };
  run(Body2::ball(1), 256);
  run(Body3::ball(1), 64);
  run(scenes::ellipse41(), 256);
  run(scenes::ellipsoid421(), 64);
  run(scenes::cos2_body(), 256);
  run(scenes::lopsided_body(), 256);
  r.at_most("sup |H_K + 1|", h_dev, tol("c1.mean_curvature"), "analytic");
  r.at_most("sup |trace_gap|", gap, tol("c1.trace_gap"), "analytic");
  r.at_most("max relative |A_K(dK) - (n+1)V(K)|", area, tol("c1.area_identity"), "analytic");
  r.notes["bodies"] = 6;
  return r;
}

/// First and second variation formulas against Richardson finite differences.
inline CriterionResult criterion_variations(const Tolerances& tol) {
  CriterionResult r{2, "First and second variation formulas"};
  double worst = 0.0, order = std::numeric_limits<double>::infinity();
  json per = json::array();
  auto run = [&](const std::string& name, const auto& surface, const auto& body, const auto& omega) {
    constexpr int Dim = std::decay_t<decltype(body)>::dim;
    const auto rep = second_variation(Flow<Dim>(surface, body, omega));
    const double g = std::max({detail::rel_gap(rep.a_prime_fd.value, rep.a_prime_analytic),
                               detail::rel_gap(rep.v_prime_fd.value, rep.v_prime_analytic),
                               detail::rel_gap(rep.a_second_fd.value, rep.a_second_analytic.value())});
    worst = std::max(worst, g);
    order = std::min(order, rep.worst_order());
    json row{{"scene", name}, {"worst_relative_gap", g}};
    row["order"] = std::isfinite(rep.worst_order()) ? json(rep.worst_order()) : json("exact");
    per.push_back(row);
  };
  const Body2 ball2 = Body2::ball(1), e41 = scenes::ellipse41(), c2 = scenes::cos2_body(), lop = scenes::lopsided_body();
  const Body3 ball3 = Body3::ball(1), e421 = scenes::ellipsoid421();
  {
    const auto s = shapes::circle(Vec2::Zero(), 1.0);
    run("circle/ball/constant", s, ball2, Omega<2>::constant(1.0));
    run("circle/ball/bump", s, ball2, Omega<2>::bump(s, Param<2>(kPi), Param<2>(1.0)));
  }
  {
    const auto s = shapes::circle(Vec2(0.1, -0.2), 1.2);
    run("circle/ellipse/fourier", s, e41, Omega<2>::fourier_mode(s, 2, 0.3));
  }
  {
    const auto s = shapes::ellipse(Vec2::Zero(), 2.0, 1.0);
    run("ellipse/cos2/constant", s, c2, Omega<2>::constant(1.0));
    run("ellipse/lopsided/bump", s, lop, Omega<2>::bump(s, Param<2>(2.0), Param<2>(1.2)));
  }
  {
    const auto s = wulff_sample(c2, 512);
    run("wulff/cos2/fourier", s, c2, Omega<2>::fourier_mode(s, 3, 0.2));
  }
  run("wulff/lopsided/constant", wulff_sample(lop, 512), lop, Omega<2>::constant(1.0));
  {
    const auto s = wulff_sample(e41, 512);
    run("wulff/ellipse/bump", s, e41, Omega<2>::bump(s, Param<2>(1.0), Param<2>(0.8)));
  }
  {
    auto s = shapes::sphere(Vec3::Zero(), 1.0);
    s.set_panels(8);
    run("sphere/ball/constant", s, ball3, Omega<3>::constant(1.0));
    run("sphere/ellipsoid/fourier", s, e421, Omega<3>::fourier_mode(s, 2, 0.4, 1.0, 1, true));
  }
  {
    const auto s = shapes::segment(Vec2(0, 0), Vec2(1, 0.5));
    run("segment/ellipse/bump", s, e41, Omega<2>::bump(s, Param<2>(0.5), Param<2>(0.4)));
  }
  {
    auto s = shapes::disk(Vec3::Zero(), 1.0);
    s.set_panels(8);
    run("flat_disk/ellipsoid/bump", s, e421, Omega<3>::bump(s, Param<3>(0.0, 0.0), Param<3>(0.8, 0.0)));
  }
  r.at_most("worst relative gap (A', V', A'')", worst, tol("c2.relative"), "fd");
  if (std::isfinite(order)) r.at_least("minimum observed FD order", order, tol("c2.min_order"), "fd");
  r.notes["scenes"] = per;
  return r;
}

/// Index form against FD of (A_K + n Hbar V)'' on stationary free-boundary scenes.
inline CriterionResult criterion_index_form(const Tolerances& tol) {
  CriterionResult r{3, "Index form on stationary free-boundary scenes"};
  double worst = 0.0;
  json per = json::array();
  auto run = [&](const std::string& name, const Curve& s, const Body2& body, const Domain2& domain, const Omega<2>& om,
                 FlowMode mode) {
    const auto rep = index_form_check(Flow<2>(s, body, om, mode, domain));
    const double i = *rep.index_form_value;
    const double g = std::abs(rep.f_second_fd->value - i) / std::abs(i);
    worst = std::max(worst, g);
    per.push_back({{"scene", name}, {"index_form", i}, {"fd", rep.f_second_fd->value}, {"relative_gap", g}});
  };
  const Body2 e41 = scenes::ellipse41(), c2 = scenes::cos2_body(), ball = Body2::ball(1);
  {
    const auto s = shapes::segment(Vec2(0.3, 0), Vec2(0.3, 1));
    const auto slab = Domain2::slab(1.0);
    const auto bump = Omega<2>::bump(s, Param<2>(0.5), Param<2>(0.3));
    run("segment_in_slab/bump", s, e41, slab, bump, FlowMode::straight_line);
    run("segment_in_slab/fourier", s, e41, slab, Omega<2>::fourier_mode(s, 1), FlowMode::straight_line);
    run("segment_in_slab/bump_plus_constant", s, e41, slab, Omega<2>::combination({bump}, {1.0}, 0.5),
        FlowMode::straight_line);
  }
  {
    const auto s = shapes::wulff_arc(c2, Vec2::Zero(), 1.0, 0.0, kPi / 2);
    const auto quarter = Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)});
    run("quarter_arc/constant", s, c2, quarter, Omega<2>::constant(1.0), FlowMode::straight_line);
    run("quarter_arc/bump", s, c2, quarter, Omega<2>::bump(s, Param<2>(kPi / 4), Param<2>(0.5)), FlowMode::straight_line);
    run("quarter_arc/fourier", s, c2, quarter, Omega<2>::fourier_mode(s, 1, 0.5), FlowMode::straight_line);
  }
  const auto disk = Domain2::disk(Vec2::Zero(), 1.0);
  {
    const auto s = shapes::segment(Vec2(0, -1), Vec2(0, 1));
    run("diameter_chord/constant", s, ball, disk, Omega<2>::constant(1.0), FlowMode::boundary_straightened);
    run("diameter_chord/fourier", s, ball, disk, Omega<2>::fourier_mode(s, 1, 0.3, 0.7), FlowMode::boundary_straightened);
    run("diameter_chord/bump", s, ball, disk, Omega<2>::bump(s, Param<2>(0.5), Param<2>(0.35)), FlowMode::boundary_straightened);
  }
  {
    const auto s = scenes::stationary_disk_arc(e41, 0.5);
    const double contact = stationarity_residual(s, e41, disk).contact_dev;
    r.at_most("disk Wulff arc contact residual", contact, tol("c3.contact"), "analytic");
    const double mid = 0.5 * (s.lo()[0] + s.hi()[0]);
    run("disk_arc/constant", s, e41, disk, Omega<2>::constant(1.0), FlowMode::boundary_straightened);
    run("disk_arc/fourier", s, e41, disk, Omega<2>::fourier_mode(s, 1, 0.4), FlowMode::boundary_straightened);
    run("disk_arc/bump", s, e41, disk, Omega<2>::bump(s, Param<2>(mid), Param<2>(0.6)), FlowMode::boundary_straightened);
  }
  r.at_most("worst relative gap, index form vs FD", worst, tol("c3.relative"), "fd");
  r.notes["scenes"] = per;
  return r;
}

/// Cone identities and the explicit cone profile.
inline CriterionResult criterion_cones(const Tolerances& tol, std::uint64_t seed) {
  CriterionResult r{4, "Cone identities and cone profiles"};
  const double k_sigma = tol("c4.sigma_multiple");
  double worst_excess = -std::numeric_limits<double>::infinity();
  double worst_sigma = 0.0;
  json per = json::array();
  auto record = [&](const std::string& name, const ConeEstimate& v, const ConeEstimate& p, int dim) {
    const double sigma = std::hypot(p.sigma, dim * v.sigma);
    const double gap = std::abs(p.value - dim * v.value);
    const double allowed = std::max(tol("c4.identity_floor"), k_sigma * sigma);
    worst_excess = std::max(worst_excess, gap - allowed);
    per.push_back({{"pair", name}, {"volume", v.value}, {"perimeter", p.value}, {"gap", gap}, {"allowed", allowed},
                   {"method", v.method}});
  };
  auto planar = [&](const std::string& name, const Body2& k, const Domain2& c) {
    record(name, cone_body_volume(k, c), wulff_cone_perimeter(k, c), 2);
  };
  planar("ball/quarter_plane", Body2::ball(1), Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)}));
  planar("ellipse/half_plane", scenes::ellipse41(), Domain2::half_space(Vec2(0.3, 1)));
  planar("ellipse/wedge", scenes::ellipse41(), Domain2::polyhedral_cone({Vec2(0, 1), Vec2(std::sin(kPi / 3), -std::cos(kPi / 3))}));
  planar("cos2/quarter_plane", scenes::cos2_body(), Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)}));
  planar("lopsided/half_plane", scenes::lopsided_body(), Domain2::half_space(Vec2(1, 0.2)));
  planar("lopsided/obtuse_wedge", scenes::lopsided_body(), Domain2::polyhedral_cone({Vec2(0, 1), Vec2(-1, -1)}));
  const auto octant = Domain3::polyhedral_cone({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
  double mc_truth_excess = -std::numeric_limits<double>::infinity();
  std::uint64_t min_samples = std::numeric_limits<std::uint64_t>::max();
  auto spatial = [&](const std::string& name, const Body3& k, double exact_volume) {
    const auto v = cone_body_volume(k, octant, seed);
    const auto p = wulff_cone_perimeter(k, octant, seed);
    record(name, v, p, 3);
    worst_sigma = std::max({worst_sigma, v.sigma / v.value, p.sigma / p.value});
    mc_truth_excess = std::max(mc_truth_excess, std::abs(v.value - exact_volume) - std::max(1e-12, k_sigma * v.sigma));
    min_samples = std::min({min_samples, v.samples, p.samples});
  };
  spatial("ball/octant", Body3::ball(1), kPi / 6);
  spatial("ellipsoid/octant", scenes::ellipsoid421(), scenes::ellipsoid421().volume() / 8);
  r.at_most("perimeter identity excess over max(floor, k sigma)", worst_excess, 0.0, "mc");
  r.at_most("MC sigma, relative", worst_sigma, tol("c4.mc_relative_sigma"), "mc");
  r.at_most("MC volume vs exact, excess over k sigma", mc_truth_excess, 0.0, "mc");
  r.at_least("MC samples per estimate", static_cast<double>(min_samples), 1e6, "mc");
  double corner = 0.0;
  const auto quarter = Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)});
  for (double v : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0})
    corner = std::max(corner, std::abs(cone_profile(Body2::ball(1), quarter, v) - std::sqrt(kPi * v)));
  r.at_most("square-corner profile vs sqrt(pi v)", corner, tol("c4.sqrt_pi"), "analytic");
  r.notes["pairs"] = per;
  r.notes["seed"] = seed;
  return r;
}

// ---------------------------------------------------------------- profiles

inline ProfileOptions battery_profile_options(std::uint64_t seed, int jobs) {
  ProfileOptions o;
  o.method = ProfileMethod::both;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

/// The unit-square / Ball(1) run shared by the profile and determinism criteria.
inline ProfileCurve square_ball_profile(std::uint64_t seed, int jobs) {
  return polygon_profile(Body2::ball(1), scenes::unit_square(), 21, {0.1, 0.9}, battery_profile_options(seed, jobs));
}

inline CriterionResult criterion_square_profile(const Tolerances& tol, const ProfileCurve& p) {
  CriterionResult r{5, "Profile of the unit square with the Euclidean ball"};
  const std::string src = profile_source(p);
  r.at_most("|I(0.1) - 0.560499|", std::abs(*p.at(0.1) - 0.560499), tol("c5.value"), src);
  r.at_most("|I(0.5) - 1|", std::abs(*p.at(0.5) - 1.0), tol("c5.value"), src);
  double sym = 0.0;
  for (const auto& s : p.samples)
    if (auto o = p.at(1.0 - s.v, 1e-9)) sym = std::max(sym, std::abs(s.value - *o));
  r.at_most("max |I(v) - I(1 - v)|", sym, tol("c5.symmetry"), src);
  const auto conc = concavity_report(p, tol("c5.concavity"));
  r.at_most("max second difference of psi", conc.max_second_difference, conc.tolerance, src);
  const auto cmp = comparison_report(p, tol("c5.comparison"), tol("c5.tight"));
  r.at_most("corner bound excess", cmp.worst_corner_excess, cmp.tolerance, src);
  std::vector<double> expected;
  for (const auto& s : p.samples)
    if (s.v <= 1 / kPi) expected.push_back(s.v);
  double mismatch = 0.0;
  for (double v : expected)
    mismatch += std::none_of(cmp.tight_volumes.begin(), cmp.tight_volumes.end(), [&](double t) { return std::abs(t - v) < 1e-12; });
  for (double v : cmp.tight_volumes) mismatch += v > 1 / kPi;
  r.at_most("tight samples differing from {v <= 1/pi}", mismatch, 0.0, src);
  r.add("edge half-space bound gap (strict)", cmp.min_edge_gap, 0.0, src, cmp.min_edge_gap > 0);
  r.notes["tight_volumes"] = cmp.tight_volumes;
  r.notes["samples"] = p.samples.size();
  r.notes["warnings"] = p.warnings;
  return r;
}

inline CriterionResult criterion_anisotropic_profiles(const Tolerances& tol, std::uint64_t seed, int jobs) {
  CriterionResult r{6, "Anisotropic profiles in the square and a random hexagon"};
  const Domain2 hexagon = random_hexagon(derive_seed(seed, 6));
  json hv = json::array();
  for (const auto& v : hexagon.vertices()) hv.push_back({v[0], v[1]});
  r.notes["hexagon"] = hv;
  json runs = json::array();
  auto profile = [&](const Body2& k, const Domain2& d, std::uint64_t stream) {
    return polygon_profile(k, d, 21, {}, battery_profile_options(derive_seed(seed, stream), jobs));
  };
  auto concavity = [&](const ProfileCurve& p) {
    const auto probe = concavity_report(p);
    return concavity_report(p, tol("c6.concavity_relative") / 1e-3 * probe.tolerance);
  };
  std::uint64_t stream = 60;
  for (const auto& [dname, domain] : {std::pair<std::string, Domain2>{"square", scenes::unit_square()}, {"hexagon", hexagon}}) {
    for (const auto& [bname, body] : {std::pair<std::string, Body2>{"ellipse", scenes::ellipse41()}, {"cos2", scenes::cos2_body()}}) {
      const auto p = profile(body, domain, ++stream);
      const std::string src = profile_source(p);
      const auto c = concavity(p);
      const auto s = structure_checks(p, nullptr, 1e-3, 1e-4, tol("c6.slope"));
      const std::string tag = dname + "/" + bname;
      r.at_most(tag + " max second difference of psi", c.max_second_difference, c.tolerance, src);
      r.add(tag + " subadditivity margin (strict)", s.subadditivity_margin, 0.0, src, s.subadditivity_margin > 0);
      r.add(tag + " slope bracketing failures", static_cast<double>(s.slope_failures), 0.0, src,
                          s.slope_failures == 0 && s.slope_checks > 0);
      r.add(tag + " structure checks", s.pass ? 1.0 : 0.0, 1.0, src, s.pass);
      runs.push_back({{"run", tag}, {"structure", s.to_json()}, {"warnings", p.warnings}});
    }
    const auto p = profile(scenes::lopsided_body(), domain, ++stream);
    const std::string src = profile_source(p);
    const auto c = concavity(p);
    const auto s = structure_checks(p);
    const std::string tag = dname + "/lopsided";
    int complements = 0;
    for (const auto& x : p.samples) complements += x.descriptor.value("complement", false);
    r.at_most(tag + " max second difference of psi", c.max_second_difference, c.tolerance, src);
    r.add(tag + " symmetry check skipped", s.symmetry_ok ? 0.0 : 1.0, 1.0, src, !s.symmetry_ok.has_value());
    runs.push_back({{"run", tag}, {"complement_samples", complements}, {"structure", s.to_json()}, {"warnings", p.warnings}});
  }
  r.notes["runs"] = runs;
  return r;
}

// ------------------------------------------------------------- stability

inline CriterionResult criterion_wulff_stability(const Tolerances& tol, std::uint64_t seed) {
  CriterionResult r{7, "Stability of the Wulff shape"};
  double worst_second = std::numeric_limits<double>::infinity();
  double worst_ratio = std::numeric_limits<double>::infinity();
  std::uint64_t stream = 700;
  auto unif = [&](std::uint64_t& idx) { return 2 * counter_uniform(derive_seed(seed, stream), idx++) - 1; };

  auto modes = [&](const auto& body, const auto& s, std::uint64_t& idx) {
    constexpr int Dim = std::decay_t<decltype(body)>::dim;
    const auto nodes = node_data<Dim>(s, body, static_cast<const Omega<Dim>*>(nullptr));
    double mass = 0.0;
    for (const auto& d : nodes) mass += d.w * d.frame.phi_k;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Omega<Dim>> terms;
      std::vector<double> coeffs;
      for (int k = 1; k <= 4; ++k) {
        terms.push_back(Omega<Dim>::fourier_mode(s, k, kPi * unif(idx), 1.0, Dim - 2, Dim == 3));
        coeffs.push_back(unif(idx));
      }
      const auto raw = Omega<Dim>::combination(terms, coeffs, 0.0);
      double proj = 0.0;
      for (const auto& d : nodes) proj += d.w * d.frame.phi_k * raw.value(d.u);
      const auto om = Omega<Dim>::combination({raw}, {1.0}, -proj / mass);
      worst_second = std::min(worst_second, second_variation(Flow<Dim>(s, body, om)).a_second_fd.value);
    }
  };
  auto ratio = [](double a, double v, int n) { return std::pow(a, n + 1) / std::pow(v, n); };

  auto planar = [&](const Body2& k) {
    std::uint64_t idx = 0;
    ++stream;
    const auto s = wulff_sample(k, 512);
    modes(k, s, idx);
    const double base = ratio(anisotropic_area(s, k), enclosed_volume(s), 1);
    for (int trial = 0; trial < 20; ++trial) {
      shapes::TrigPerturbation g;
      for (int m = 0; m < 5; ++m) g.cos.push_back(0.01 * unif(idx)), g.sin.push_back(0.01 * unif(idx));
      g.constant = 0.01 * unif(idx);
      auto c = shapes::perturbed_wulff(k, g);
      c.set_panels(s.panels());
      worst_ratio = std::min(worst_ratio, ratio(anisotropic_area(c, k), enclosed_volume(c), 1) - base);
    }
  };
  auto spatial = [&](const Body3& k) {
    std::uint64_t idx = 0;
    ++stream;
    const auto s = wulff_sample(k, 64);
    modes(k, s, idx);
    const double base = ratio(anisotropic_area(s, k), enclosed_volume(s), 2);
    for (int trial = 0; trial < 20; ++trial) {
      shapes::PolyPerturbation g;
      for (int i = 0; i < 3; ++i) {
        g.linear[i] = 0.01 * unif(idx);
        for (int j = 0; j < 3; ++j) g.quadratic(i, j) = 0.01 * unif(idx);
      }
      g.constant = 0.01 * unif(idx);
      auto c = shapes::perturbed_wulff(k, g);
      c.set_panels(s.panels());
      worst_ratio = std::min(worst_ratio, ratio(anisotropic_area(c, k), enclosed_volume(c), 2) - base);
    }
  };
  planar(Body2::ball(1));
  spatial(Body3::ball(1));
  planar(scenes::ellipse41());
  spatial(scenes::ellipsoid421());
  planar(scenes::cos2_body());
  planar(scenes::lopsided_body());
  r.at_least("min FD A''(0) over volume-preserving omega", worst_second, -tol("c7.second_variation"), "fd");
  r.at_least("min ratio excess A^(n+1)/V^n over the Wulff shape", worst_ratio, -tol("c7.ratio"), "analytic");
  r.notes["seed"] = seed;
  return r;
}

inline CriterionResult criterion_determinism(const std::string& first_csv, const ProfileCurve& rerun) {
  CriterionResult r{8, "Determinism of the square profile"};
  const std::string second = profile_csv(rerun);
  std::size_t diff = first_csv.size() == second.size() ? 0 : std::max(first_csv.size(), second.size());
  for (std::size_t i = 0; i < std::min(first_csv.size(), second.size()); ++i) diff += first_csv[i] != second[i];
  r.at_most("differing bytes in profile.csv", static_cast<double>(diff), 0.0, profile_source(rerun));
  r.notes["sha256"] = {sha256_hex(first_csv), sha256_hex(second)};
  return r;
}

// ------------------------------------------------------------------ driver

struct CriterionRun {
  CriterionResult result;
  double seconds = 0.0;
  double budget = 0.0;
};

inline const std::map<int, double>& runtime_budgets() {
  static const std::map<int, double> b{{1, 10}, {2, 60}, {3, 60}, {4, 120}, {5, 600}, {6, 900}, {7, 120}, {8, 600}};
  return b;
}

/// Runs the battery in order, calling `report` after each criterion.
inline std::vector<CriterionRun> run_battery(const BatteryOptions& opt,
                                             const std::function<void(const CriterionRun&)>& report = {}) {
  const Tolerances tol(battery_tolerance_defaults(), opt.tolerances);
  std::vector<CriterionRun> out;
  auto timed = [&](int id, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionRun run;
    try {
      run.result = fn();
    } catch (const Error& e) {
      run.result.id = id;
      run.result.title = "criterion " + std::to_string(id);
      run.result.add(std::string("raised ") + e.what(), 1.0, 0.0, "analytic", false);
    }
    run.result.id = id;
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.budget = runtime_budgets().at(id);
    if (report) report(run);
    out.push_back(std::move(run));
  };
  timed(1, [&] { return criterion_wulff_identities(tol); });
  timed(2, [&] { return criterion_variations(tol); });
  timed(3, [&] { return criterion_index_form(tol); });
  timed(4, [&] { return criterion_cones(tol, derive_seed(opt.seed, 4)); });
  std::optional<std::string> csv;
  timed(5, [&] {
    const auto p = square_ball_profile(derive_seed(opt.seed, 5), opt.jobs);
    csv = profile_csv(p);
    return criterion_square_profile(tol, p);
  });
  timed(6, [&] { return criterion_anisotropic_profiles(tol, derive_seed(opt.seed, 6), opt.jobs); });
  timed(7, [&] { return criterion_wulff_stability(tol, derive_seed(opt.seed, 7)); });
  timed(8, [&] {
    const auto p = square_ball_profile(derive_seed(opt.seed, 5), opt.jobs);
    if (!csv) csv = profile_csv(square_ball_profile(derive_seed(opt.seed, 5), opt.jobs));
    return criterion_determinism(*csv, p);
  });
  return out;
}

/// Summary without timings, so that repeated runs are byte-identical.
inline json battery_summary(const std::vector<CriterionRun>& runs, const BatteryOptions& opt) {
  json c = json::array();
  bool all = true;
  for (const auto& r : runs) c.push_back(r.result.to_json()), all = all && r.result.pass();
  json tol = json::object();
  for (const auto& [k, v] : opt.tolerances) tol[k] = v;
  return {{"version", kVersion}, {"seed", opt.seed}, {"tolerance_overrides", tol}, {"criteria", c}, {"pass", all}};
}

}  // namespace wulffkit::io
