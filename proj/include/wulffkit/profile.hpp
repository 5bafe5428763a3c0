#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wulffkit/candidates.hpp"
#include "wulffkit/cone.hpp"
#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/optimizer.hpp"

namespace wulffkit {

enum class ProfileMethod { candidates, optimizer, both };

inline const char* to_string(ProfileMethod m) {
  switch (m) {
    case ProfileMethod::candidates: return "candidates";
    case ProfileMethod::optimizer: return "optimizer";
    case ProfileMethod::both: return "both";
  }
  return "?";
}

inline ProfileMethod profile_method_from_string(const std::string& s) {
  if (s == "candidates") return ProfileMethod::candidates;
  if (s == "optimizer") return ProfileMethod::optimizer;
  if (s == "both") return ProfileMethod::both;
  fail(ErrorCode::invalid_argument, "unknown profile method: " + s);
}

struct ProfileOptions {
  ProfileMethod method = ProfileMethod::both;
  std::uint64_t seed = 0;
  CandidateOptions candidates;
  OptimizerOptions optimizer;
  int optimizer_seeds = 3;  // distinct candidate curves used as starts
  int continuation_passes = 8;
  double continuation_gain = 1e-7;  // relative drop that counts as a move
  int jobs = 1;             // worker threads over volume samples
};

struct ProfileSample {
  double v = 0.0;
  double value = 0.0;
  std::string method;  // analytic_cone | candidate_family | optimizer
  nlohmann::json descriptor;
  bool on_grid = false;
  double candidate_value = std::numeric_limits<double>::infinity();
  std::optional<double> optimizer_value;
  std::string optimizer_status;  // empty when the optimizer did not run
  std::optional<double> mean_curvature;
  bool connected = true;
  std::vector<Vec2> curve;
};

/// Sampled anisotropic isoperimetric profile. Numerical values are upper
/// bounds for the true profile.
struct ProfileCurve {
  Body2 body;
  Domain2 domain;
  double total_volume = 0.0;
  std::uint64_t seed = 0;
  bool upper_bound = true;
  std::vector<ProfileSample> samples;
  std::vector<std::string> warnings;

  ProfileCurve(Body2 b, Domain2 d) : body(std::move(b)), domain(std::move(d)) {}

  std::optional<double> at(double v, double tol = 1e-12) const {
    for (const auto& s : samples)
      if (std::abs(s.v - v) <= tol * (1 + std::abs(v))) return s.value;
    return std::nullopt;
  }
};

/// k V / (n + 1), k = 1..n.
inline std::vector<double> volume_grid(double total, int n) {
  if (n < 1) fail(ErrorCode::invalid_argument, "grid needs at least one volume");
  std::vector<double> v;
  for (int k = 1; k <= n; ++k) v.push_back(total * k / (n + 1));
  return v;
}

namespace detail {

inline std::vector<std::vector<Vec2>> optimizer_seeds(const Body2& body, std::vector<Candidate> fams, int count,
                                                      int segments) {
  std::sort(fams.begin(), fams.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  std::vector<std::vector<Vec2>> seeds;
  for (const auto& c : fams) {
    if (static_cast<int>(seeds.size()) >= count) break;
    if (!c.feasible()) continue;
    auto pts = c.free_curve(body, segments);
    if (pts.size() < 2) continue;
    bool dup = false;
    for (const auto& s : seeds) dup = dup || ((s.front() - pts.front()).norm() < 1e-9 && (s.back() - pts.back()).norm() < 1e-9);
    if (!dup) seeds.push_back(std::move(pts));
  }
  return seeds;
}

}  // namespace detail

namespace detail {

/// <N_K, xi> at both ends of a polyline with E on its left; zero means the
/// end meets the wall in the stationary contact geometry.
inline std::array<double, 2> end_contact(const Body2& body, const Domain2& domain, const std::vector<Vec2>& x) {
  auto at = [&](const Vec2& p, const Vec2& d) {
    return body.projection(rot_cw(d).normalized()).dot(domain.inner_normal(p));
  };
  // first edge of nonzero length from each end
  auto edge = [&](bool front) -> Vec2 {
    const std::size_t m = x.size();
    for (std::size_t i = 1; i < m; ++i) {
      const Vec2 d = front ? x[i] - x[0] : x[m - 1] - x[m - 1 - i];
      if (d.norm() > 1e-14) return d;
    }
    return Vec2::Zero();
  };
  const Vec2 a = edge(true), b = edge(false);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {a.isZero() ? nan : at(x.front(), a), b.isZero() ? nan : at(x.back(), b)};
}

}  // namespace detail

/// Profile of a bounded planar domain on the uniform grid of `grid` volumes,
/// plus any extra volumes.
inline ProfileCurve polygon_profile(const Body2& body, const Domain2& domain, int grid,
                                    const std::vector<double>& extra = {}, const ProfileOptions& opt = {}) {
  if (domain.kind() != DomainKind::polygon2d && domain.kind() != DomainKind::disk2d)
    fail(ErrorCode::invalid_argument, "profiles are computed in polygons and disks");
  ProfileCurve p(body, domain);
  p.total_volume = domain.volume();
  p.seed = opt.seed;
  std::vector<std::pair<double, bool>> vols;
  if (grid > 0)
    for (double v : volume_grid(p.total_volume, grid)) vols.push_back({v, true});
  for (double v : extra) {
    if (!(v > 0 && v < p.total_volume)) fail(ErrorCode::invalid_argument, "volumes must lie inside (0, V(Omega))");
    bool dup = false;
    for (const auto& [w, g] : vols) dup = dup || std::abs(w - v) <= 1e-12 * p.total_volume;
    if (!dup) vols.push_back({v, false});
  }
  std::sort(vols.begin(), vols.end());

  std::vector<PolylineResult> opt_results(vols.size());
  std::vector<ProfileSample> samples(vols.size());
  std::vector<std::vector<std::string>> notes(vols.size());
  auto compute = [&](std::size_t idx) {
    const auto [v, on_grid] = vols[idx];
    ProfileSample& s = samples[idx];
    s.v = v;
    s.on_grid = on_grid;
    const auto fams = candidate_families(body, domain, v, opt.candidates);
    Candidate best;
    for (const auto& c : fams) detail::keep_best(best, c);
    if (best.feasible()) {
      s.candidate_value = best.value;
      s.value = best.value;
      s.method = "candidate_family";
      s.descriptor = best.descriptor();
      s.mean_curvature = best.mean_curvature;
      s.connected = best.connected();
      s.curve = best.free_curve(body, 64);
    }
    if (opt.method != ProfileMethod::candidates) {
      const auto seeds = detail::optimizer_seeds(body, fams, opt.optimizer_seeds, opt.optimizer.segments);
      PolylineResult r = optimize_multistart(body, domain, v, seeds, derive_seed(opt.seed, idx), opt.optimizer);
      s.optimizer_status = r.status;
      if (r.valid()) {
        s.optimizer_value = r.length;
        if (opt.method == ProfileMethod::optimizer || !best.feasible() || detail::improves(r.length, s.value)) {
          s.value = r.length;
          s.method = "optimizer";
          s.descriptor = {{"kind", "polyline"}, {"segments", opt.optimizer.segments}, {"status", r.status},
                          {"ends", {{r.nodes.front()[0], r.nodes.front()[1]}, {r.nodes.back()[0], r.nodes.back()[1]}}},
                          {"contact", detail::end_contact(body, domain, r.nodes)}};
          s.mean_curvature.reset();
          s.connected = true;
          s.curve = r.nodes;
        }
        if (best.feasible() && best.value < 0.95 * r.length)
          notes[idx].push_back("optimizer value far above the candidate value at v=" + std::to_string(v));
      } else {
        notes[idx].push_back("OptimizerDiverged at v=" + std::to_string(v));
      }
      opt_results[idx] = std::move(r);
    }
    if (s.method.empty()) fail(ErrorCode::no_feasible_candidate, "no candidate or optimizer result at v=" + std::to_string(v));
  };
  parallel_for(vols.size(), opt.jobs, compute);

  auto set_polyline = [&](ProfileSample& s, const PolylineResult& r) {
    s.value = r.length;
    s.optimizer_value = r.length;
    s.optimizer_status = r.status;
    s.method = "optimizer";
    s.descriptor = {{"kind", "polyline"}, {"segments", opt.optimizer.segments}, {"status", r.status},
                    {"ends", {{r.nodes.front()[0], r.nodes.front()[1]}, {r.nodes.back()[0], r.nodes.back()[1]}}},
                    {"contact", detail::end_contact(body, domain, r.nodes)}};
    s.mean_curvature.reset();
    s.connected = true;
    s.curve = r.nodes;
  };
  // an optimized curve also bounds the profile at the complementary volume
  auto complements = [&] {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const PolylineResult& r = opt_results[i];
      if (!r.valid()) continue;
      for (auto& t : samples) {
        if (std::abs(t.v - (p.total_volume - samples[i].v)) > 1e-12 * p.total_volume) continue;
        if (detail::improves(r.inner_length, t.value)) {
          t.value = r.inner_length;
          t.method = "optimizer";
          t.descriptor = {{"kind", "polyline_complement"}, {"segments", opt.optimizer.segments}, {"status", r.status}};
          t.mean_curvature.reset();
          t.connected = true;
          t.curve.assign(r.nodes.rbegin(), r.nodes.rend());
        }
      }
    }
  };

  if (opt.method != ProfileMethod::candidates) {
    complements();
    // continuation: restart each volume from the curves that just improved at
    // it and its neighbours, until no sample moves
    std::vector<char> moved(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) moved[i] = samples[i].method == "optimizer";
    for (int pass = 0; pass < opt.continuation_passes; ++pass) {
      const std::vector<ProfileSample> prev = samples;
      std::vector<char> next(samples.size(), 0);
      parallel_for(samples.size(), opt.jobs, [&](std::size_t i) {
        for (std::size_t j : {i - 1, i, i + 1}) {
          if (j >= prev.size() || !moved[j] || prev[j].curve.size() < 2) continue;
          OptimizerOptions o = opt.optimizer;
          o.starts = 1;
          PolylineResult r;
          try {
            r = optimize_free_curve(body, domain, samples[i].v, resample_polyline(prev[j].curve, o.segments), o);
          } catch (const Error&) {
            continue;
          }
          if (!r.valid() || !detail::improves(r.length, samples[i].value)) continue;
          next[i] = next[i] || r.length < samples[i].value - opt.continuation_gain * (1 + samples[i].value);
          set_polyline(samples[i], r);
          opt_results[i] = std::move(r);
        }
      });
      complements();
      for (std::size_t i = 0; i < samples.size(); ++i)
        next[i] = next[i] || (samples[i].value < prev[i].value - opt.continuation_gain * (1 + prev[i].value));
      moved = next;
      if (std::none_of(moved.begin(), moved.end(), [](char c) { return c; })) break;
    }
  }
  p.samples = std::move(samples);
  for (const auto& n : notes) p.warnings.insert(p.warnings.end(), n.begin(), n.end());
  for (const auto& s : p.samples)
    if (!s.connected) p.warnings.push_back("reported minimizer is disconnected at v=" + std::to_string(s.v));
  return p;
}

/// Exact profile of a cone on the given volumes.
inline ProfileCurve cone_profile_curve(const Body2& body, const Domain2& cone, const std::vector<double>& volumes) {
  ProfileCurve p(body, cone);
  p.total_volume = std::numeric_limits<double>::infinity();
  p.upper_bound = false;
  const double theta = cone_body_volume(body, cone_at_origin(cone)).value;
  for (double v : volumes) {
    ProfileSample s;
    s.v = v;
    s.value = cone_profile_from_volume(2, theta, v);
    s.method = "analytic_cone";
    s.on_grid = true;
    s.descriptor = {{"kind", "cone_wulff"}, {"cone_volume", theta}};
    s.candidate_value = s.value;
    s.mean_curvature = -1.0 / std::sqrt(v / theta);
    p.samples.push_back(std::move(s));
  }
  return p;
}

// ---------------------------------------------------------------- reports

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string source;  // analytic | fd | mc | optimizer
  nlohmann::json to_json() const {
    return {{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}, {"source", source}};
  }
};

inline std::string profile_source(const ProfileCurve& p) {
  for (const auto& s : p.samples)
    if (s.method == "optimizer") return "optimizer";
  return "analytic";  // closed-form candidate families and cone formulas
}

namespace detail {

struct GridView {
  double step = 0.0;
  std::vector<double> v, value;
  std::vector<const ProfileSample*> sample;  // null at the implicit endpoints
};

/// Grid samples with I(0) = I(V) = 0 added where the grid reaches them.
inline GridView grid_view(const ProfileCurve& p) {
  std::vector<const ProfileSample*> g;
  for (const auto& s : p.samples)
    if (s.on_grid) g.push_back(&s);
  if (g.size() < 3) fail(ErrorCode::insufficient_samples, "at least three grid samples are needed");
  GridView view;
  view.step = g[1]->v - g[0]->v;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::abs(g[i]->v - g[i - 1]->v - view.step) > 1e-9 * (1 + view.step) * g.size())
      fail(ErrorCode::invalid_argument, "grid samples are not uniform");
  const double tol = 1e-9 * view.step;
  if (std::abs(g.front()->v - view.step) <= tol) view.v.push_back(0.0), view.value.push_back(0.0), view.sample.push_back(nullptr);
  for (const auto* s : g) view.v.push_back(s->v), view.value.push_back(s->value), view.sample.push_back(s);
  if (std::isfinite(p.total_volume) && std::abs(p.total_volume - g.back()->v - view.step) <= tol)
    view.v.push_back(p.total_volume), view.value.push_back(0.0), view.sample.push_back(nullptr);
  return view;
}

}  // namespace detail

struct ConcavityReport {
  bool pass = false;
  double max_second_difference = 0.0;
  double at_volume = 0.0;
  double tolerance = 0.0;
  std::vector<double> second_differences;
  int chord_violations = 0;  // points where I itself bends upward beyond tolerance
  double max_second_difference_of_I = 0.0;
  std::string source;

  nlohmann::json to_json() const {
    return {{"pass", pass},
            {"max_second_difference", {{"value", max_second_difference}, {"tolerance", tolerance}, {"source", source}}},
            {"at_volume", at_volume},
            {"second_differences", second_differences},
            {"chord_violations_of_I", chord_violations},
            {"max_second_difference_of_I", max_second_difference_of_I}};
  }
};

/// Discrete second differences of psi = I^2 on the uniform grid (planar
/// profiles, so psi = I^{(n+1)/n} with n = 1).
inline ConcavityReport concavity_report(const ProfileCurve& p, std::optional<double> tol = std::nullopt) {
  std::size_t count = 0;
  for (const auto& s : p.samples) count += s.on_grid;
  if (count < 5) fail(ErrorCode::insufficient_samples, "concavity needs at least five grid samples");
  const auto g = detail::grid_view(p);
  std::vector<double> psi;
  for (double i : g.value) psi.push_back(i * i);
  ConcavityReport r;
  r.source = profile_source(p);
  if (tol) {
    r.tolerance = *tol;
  } else {
    // 1e-3 psi(V/2), taking the grid sample nearest the middle
    std::size_t mid = 0;
    const double half = std::isfinite(p.total_volume) ? p.total_volume / 2 : g.v[g.v.size() / 2];
    for (std::size_t i = 0; i < g.v.size(); ++i)
      if (std::abs(g.v[i] - half) < std::abs(g.v[mid] - half)) mid = i;
    r.tolerance = 1e-3 * psi[mid];
  }
  const double tol_i = r.tolerance / std::max(1e-300, 2 * std::sqrt(std::max(psi[psi.size() / 2], 1e-300)));
  r.max_second_difference = -std::numeric_limits<double>::infinity();
  r.max_second_difference_of_I = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < psi.size(); ++k) {
    const double d = psi[k + 1] - 2 * psi[k] + psi[k - 1];
    r.second_differences.push_back(d);
    if (d > r.max_second_difference) r.max_second_difference = d, r.at_volume = g.v[k];
    const double di = g.value[k + 1] - 2 * g.value[k] + g.value[k - 1];
    r.max_second_difference_of_I = std::max(r.max_second_difference_of_I, di);
    if (di > tol_i) ++r.chord_violations;
  }
  r.pass = r.max_second_difference <= r.tolerance;
  return r;
}

struct ComparisonReport {
  bool pass = false;
  bool corner_bound_ok = true;
  bool edge_bound_strict = true;
  double tolerance = 1e-4;
  double tight_tolerance = 1e-3;
  std::vector<double> vertex_theta;  // theta(p) at every vertex
  double theta0 = 0.0;
  std::vector<double> halfspace_theta;
  double worst_corner_excess = -std::numeric_limits<double>::infinity();  // max I - bound
  double min_edge_gap = std::numeric_limits<double>::infinity();          // min bound - I
  std::vector<double> tight_volumes;
  bool tight_are_corner_truncations = true;
  std::string source;

  nlohmann::json to_json() const {
    return {{"pass", pass},
            {"corner_bound", {{"pass", corner_bound_ok}, {"value", worst_corner_excess}, {"tolerance", tolerance}, {"source", source}}},
            {"edge_bound_strict", {{"pass", edge_bound_strict}, {"value", min_edge_gap}, {"tolerance", 0.0}, {"source", source}}},
            {"vertex_theta", vertex_theta},
            {"theta0", theta0},
            {"halfspace_theta", halfspace_theta},
            {"tight_volumes", tight_volumes},
            {"tight_tolerance", tight_tolerance},
            {"tight_are_corner_truncations", tight_are_corner_truncations}};
  }
};

/// Support cone of a polygon at vertex i, translated to the origin.
inline Domain2 vertex_cone(const Domain2& polygon, std::size_t i) {
  const auto& ns = polygon.facet_normals();
  const std::size_t m = ns.size();
  return Domain2::polyhedral_cone({ns[(i + m - 1) % m], ns[i]});
}

inline ComparisonReport comparison_report(const ProfileCurve& p, double tol = 1e-4, double tight_tol = 1e-3,
                                          int disk_directions = 64) {
  if (p.domain.kind() != DomainKind::polygon2d && p.domain.kind() != DomainKind::disk2d)
    fail(ErrorCode::invalid_argument, "comparison needs a bounded planar domain");
  ComparisonReport r;
  r.tolerance = tol;
  r.tight_tolerance = tight_tol;
  r.source = profile_source(p);
  std::vector<Vec2> support_normals;
  if (p.domain.kind() == DomainKind::polygon2d) {
    for (std::size_t i = 0; i < p.domain.vertices().size(); ++i)
      r.vertex_theta.push_back(cone_body_volume(p.body, vertex_cone(p.domain, i)).value);
    r.theta0 = *std::min_element(r.vertex_theta.begin(), r.vertex_theta.end());
    support_normals = p.domain.facet_normals();
  } else {
    for (int k = 0; k < disk_directions; ++k) support_normals.push_back(-unit_dir(kTwoPi * k / disk_directions));
  }
  for (const auto& n : support_normals) r.halfspace_theta.push_back(cone_body_volume(p.body, Domain2::half_space(n)).value);

  for (const auto& s : p.samples) {
    if (!r.vertex_theta.empty()) {
      const double bound = cone_profile_from_volume(2, r.theta0, s.v);
      r.worst_corner_excess = std::max(r.worst_corner_excess, s.value - bound);
      if (s.value > bound + tol) r.corner_bound_ok = false;
      if (bound - s.value <= tight_tol) {
        r.tight_volumes.push_back(s.v);
        const bool corner = s.descriptor.value("kind", "") == "corner_wulff_arc" && !s.descriptor.value("complement", false);
        r.tight_are_corner_truncations = r.tight_are_corner_truncations && corner;
      }
    }
    for (double th : r.halfspace_theta) {
      const double gap = cone_profile_from_volume(2, th, s.v) - s.value;
      r.min_edge_gap = std::min(r.min_edge_gap, gap);
      if (!(gap > 0)) r.edge_bound_strict = false;
    }
  }
  if (r.vertex_theta.empty()) r.worst_corner_excess = 0.0;
  r.pass = r.corner_bound_ok && r.edge_bound_strict;
  return r;
}

struct StructureReport {
  bool pass = false;
  bool symmetric_body = false;
  double subadditivity_margin = std::numeric_limits<double>::infinity();
  int subadditivity_pairs = 0;
  std::optional<bool> monotone_first_half;
  std::optional<double> monotone_worst_drop;
  std::optional<double> symmetry_deviation;
  double symmetry_tolerance = 1e-3;
  double monotone_tolerance = 1e-4;
  double slope_tolerance = 1e-3;  // relative to 1 + |slope|
  double sandwich_tolerance = 1e-3;
  std::optional<bool> symmetry_ok;
  int slope_checks = 0;
  int slope_failures = 0;
  double worst_slope_excess = -std::numeric_limits<double>::infinity();  // > 0 means a failure
  std::optional<bool> sandwich_ok;
  std::optional<double> sandwich_worst;
  std::string source;

  nlohmann::json to_json() const {
    nlohmann::json j{{"pass", pass},
                     {"symmetric_body", symmetric_body},
                     {"subadditivity", {{"pass", subadditivity_margin > 0}, {"value", subadditivity_margin}, {"tolerance", 0.0},
                                        {"pairs", subadditivity_pairs}, {"source", source}}},
                     {"slope_bracketing", {{"pass", slope_failures == 0}, {"value", worst_slope_excess}, {"tolerance", slope_tolerance},
                                           {"checked", slope_checks}, {"failures", slope_failures}, {"source", source}}}};
    if (monotone_first_half)
      j["monotone_first_half"] = {{"pass", *monotone_first_half}, {"value", *monotone_worst_drop}, {"tolerance", monotone_tolerance}, {"source", source}};
    else
      j["monotone_first_half"] = "skipped";
    if (symmetry_ok)
      j["symmetry"] = {{"pass", *symmetry_ok}, {"value", *symmetry_deviation}, {"tolerance", symmetry_tolerance}, {"source", source}};
    else
      j["symmetry"] = "skipped";
    if (sandwich_ok) j["sandwich"] = {{"pass", *sandwich_ok}, {"value", *sandwich_worst}, {"tolerance", sandwich_tolerance}, {"source", source}};
    return j;
  }
};

/// Subadditivity, monotonicity and symmetry (symmetric bodies), and the
/// bracketing of -n H_K by one-sided difference quotients. With a Euclidean
/// profile on the same volumes, also alpha I_E <= I_K <= beta I_E.
inline StructureReport structure_checks(const ProfileCurve& p, const ProfileCurve* euclidean = nullptr,
                                        double symmetry_tol = 1e-3, double monotone_tol = 1e-4,
                                        double slope_tol = 1e-3, double sandwich_tol = 1e-3) {
  StructureReport r;
  r.monotone_tolerance = monotone_tol;
  r.slope_tolerance = slope_tol;
  r.sandwich_tolerance = sandwich_tol;
  r.source = profile_source(p);
  r.symmetric_body = p.body.centrally_symmetric();
  r.symmetry_tolerance = symmetry_tol;
  const auto g = detail::grid_view(p);
  const bool starts_at_zero = g.sample.front() == nullptr;
  const std::size_t n = g.v.size();

  // pairs of interior grid points whose sum is again an interior grid point
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.sample[i]) continue;
    for (std::size_t j = i; j < n; ++j) {
      if (!g.sample[j]) continue;
      const double target = g.v[i] + g.v[j];
      for (std::size_t k = 0; k < n; ++k) {
        if (!g.sample[k] || std::abs(g.v[k] - target) > 1e-9 * g.step) continue;
        r.subadditivity_margin = std::min(r.subadditivity_margin, g.value[i] + g.value[j] - g.value[k]);
        ++r.subadditivity_pairs;
      }
    }
  }
  bool ok = r.subadditivity_pairs == 0 || r.subadditivity_margin > 0;
  if (!starts_at_zero && r.subadditivity_pairs == 0) r.subadditivity_margin = 0.0;

  if (r.symmetric_body && std::isfinite(p.total_volume)) {
    double worst = 0.0, dev = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k)
      if (g.v[k + 1] <= p.total_volume / 2 + 1e-12) worst = std::max(worst, g.value[k] - g.value[k + 1]);
    r.monotone_worst_drop = worst;
    r.monotone_first_half = worst <= monotone_tol;
    for (const auto& s : p.samples) {
      const auto other = p.at(p.total_volume - s.v, 1e-9);
      if (other) dev = std::max(dev, std::abs(s.value - *other));
    }
    r.symmetry_deviation = dev;
    r.symmetry_ok = dev <= symmetry_tol;
    ok = ok && *r.monotone_first_half && *r.symmetry_ok;
  }

  for (std::size_t k = 1; k + 1 < n; ++k) {
    const ProfileSample* s = g.sample[k];
    if (!s || s->method != "candidate_family" || !s->mean_curvature) continue;
    const double slope = -*s->mean_curvature;  // -n H_K with n = 1
    const double tol = slope_tol * (1 + std::abs(slope));
    const double left = (g.value[k] - g.value[k - 1]) / (g.v[k] - g.v[k - 1]);
    const double right = (g.value[k + 1] - g.value[k]) / (g.v[k + 1] - g.v[k]);
    const double excess = std::max(slope - left, right - slope);
    r.worst_slope_excess = std::max(r.worst_slope_excess, excess);
    ++r.slope_checks;
    if (excess > tol) ++r.slope_failures;
  }
  ok = ok && r.slope_failures == 0;

  if (euclidean) {
    const auto [alpha, beta] = support_range(p.body, 4096);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : p.samples) {
      const auto e = euclidean->at(s.v, 1e-9);
      if (!e) continue;
      worst = std::max({worst, alpha * *e - s.value, s.value - beta * *e});
    }
    r.sandwich_worst = worst;
    r.sandwich_ok = worst <= sandwich_tol;
    ok = ok && *r.sandwich_ok;
  }
  r.pass = ok;
  return r;
}

}  // namespace wulffkit
