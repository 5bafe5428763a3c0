#pragma once

#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wulffkit/io/battery.hpp"
#include "wulffkit/io/cache.hpp"
#include "wulffkit/io/output.hpp"
#include "wulffkit/io/schema.hpp"
#include "wulffkit/profile.hpp"
#include "wulffkit/variation.hpp"
#include "wulffkit/version.hpp"

namespace wulffkit::io {

inline constexpr std::uint64_t kDefaultSeed = 7;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> c{"body", "surface", "variation", "profile", "compare", "suite"};
  return c;
}

struct RunConfig {
  std::string command;
  json scene = json::object();
  std::filesystem::path output_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the scene's "seed"
  std::map<std::string, double> tolerances;
  int jobs = 1;
  bool use_cache = true;
  std::optional<std::filesystem::path> cache_dir;  // default RunCache::default_dir()
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> artifacts;
  std::optional<bool> cache_hit;
};

inline std::vector<std::pair<std::string, double>> command_tolerance_defaults(const std::string& command) {
  if (command == "body") return {{"body.mean_curvature", 1e-6}, {"body.trace_gap", 1e-8}, {"body.area_identity", 1e-6}};
  if (command == "surface") return {{"surface.trace_gap", 1e-8}, {"surface.contact", 1e-6}};
  if (command == "variation")
    return {{"variation.relative", 1e-4}, {"variation.min_order", 1.95}, {"variation.index_relative", 1e-3}};
  if (command == "profile" || command == "compare")
    return {{"profile.concavity", 1e-3}, {"profile.comparison", 1e-4}, {"profile.tight", 1e-3},
            {"profile.symmetry", 1e-3}, {"profile.monotone", 1e-4}, {"profile.slope", 1e-3},
            {"profile.sandwich", 1e-3}};
  if (command == "suite") return battery_tolerance_defaults();
  fail(ErrorCode::schema_error, "unknown command \"" + command + "\"");
}

namespace detail {

inline Verdict verdict(std::string name, double value, double tol, std::string source, bool pass) {
  return {std::move(name), pass, value, tol, std::move(source)};
}
inline Verdict at_most(std::string name, double value, double tol, std::string source) {
  return verdict(std::move(name), value, tol, std::move(source), value <= tol);
}

inline json verdicts_json(const std::vector<Verdict>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.to_json());
  return a;
}

inline bool all_pass(const std::vector<Verdict>& v) {
  return std::all_of(v.begin(), v.end(), [](const Verdict& x) { return x.pass; });
}

/// Seed from the flag, else the scene, else the default. Consumes "seed".
inline std::uint64_t run_seed(const RunConfig& cfg, Fields& f) {
  const std::uint64_t scene_seed = f.has("seed") ? f.unsigned64("seed") : kDefaultSeed;
  return cfg.seed.value_or(scene_seed);
}

struct Writer {
  const RunConfig& cfg;
  RunOutcome& out;
  void operator()(const std::string& name, const std::string& text) {
    const auto p = cfg.output_dir / name;
    write_file(p, text);
    out.artifacts.push_back(p);
  }
};

inline json report_header(const std::string& command, std::uint64_t seed, const json& scene) {
  return {{"version", kVersion}, {"command", command}, {"seed", seed}, {"scene", scene}};
}

// ------------------------------------------------------------------ body

template <int Dim>
void run_body(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  Fields f(cfg.scene, "");
  const auto seed = run_seed(cfg, f);
  const auto body = parse_body<Dim>(f.raw("body"), "body");
  const int res = static_cast<int>(f.integer("resolution", Dim == 2 ? 256 : 64));
  if (res < 8 || res > 4096) schema_fail("resolution", "must lie in [8, 4096]");
  f.finish();
  constexpr int n = Dim - 1;

  const auto s = wulff_sample(body, res);
  double h_dev = 0.0, gap = 0.0;
  for (const auto& q : s.nodes()) {
    const auto fr = frame_at(s, body, q.u);
    h_dev = std::max(h_dev, std::abs(fr.mean_k + 1.0));
    gap = std::max(gap, std::abs(fr.trace_gap));
  }
  const double area = anisotropic_area(s, body), want = (n + 1) * body.volume();
  const json canon = body_to_json(body);
  const bool round_trip = body_to_json(parse_body<Dim>(json::parse(canon.dump()))).dump() == canon.dump();

  out.verdicts = {at_most("sup |H_K + 1| on the Wulff shape", h_dev, tol("body.mean_curvature"), "analytic"),
                  at_most("sup |trace_gap| on the Wulff shape", gap, tol("body.trace_gap"), "analytic"),
                  at_most("relative |A_K(dK) - (n+1)V(K)|", std::abs(area - want) / want, tol("body.area_identity"), "analytic"),
                  verdict("JSON round trip is exact", round_trip ? 0.0 : 1.0, 0.0, "analytic", round_trip)};
  json report = report_header("body", seed, cfg.scene);
  report["volume"] = body.volume();
  report["centrally_symmetric"] = body.centrally_symmetric();
  report["wulff_area"] = area;
  report["resolution"] = res;
  report["verdicts"] = verdicts_json(out.verdicts);

  Writer w{cfg, out};
  w("body.json", dump({{"body", canon}, {"seed", seed}}));  // itself a valid body scene
  w("wulff_frames.csv", frames_csv(s, body, seed));
  w("report.json", dump(report));
}

// --------------------------------------------------------------- surface

template <int Dim>
void run_surface(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  Fields f(cfg.scene, "");
  const auto seed = run_seed(cfg, f);
  const auto body = parse_body<Dim>(f.raw("body"), "body");
  const auto s = parse_surface<Dim>(f.raw("surface"), body, "surface");
  std::optional<Domain<Dim>> domain;
  if (f.has("domain")) domain = parse_domain<Dim>(f.raw("domain"), seed, "domain");
  f.finish();

  const auto nodes = node_data<Dim>(s, body, static_cast<const Omega<Dim>*>(nullptr));
  double gap = 0.0;
  for (const auto& d : nodes) gap = std::max(gap, std::abs(d.frame.trace_gap));
  const auto [mean, sd] = mean_curvature_stats(nodes);

  json report = report_header("surface", seed, cfg.scene);
  report["anisotropic_area"] = anisotropic_area(s, body);
  report["closed"] = s.closed();
  report["mean_curvature"] = {{"mean", mean}, {"std", sd}};
  if (s.closed()) {
    report["enclosed_volume"] = enclosed_volume(s);
  } else if constexpr (Dim == 2) {
    if (domain) {
      try {
        report["enclosed_volume"] = enclosed_volume(s, *domain);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_closed) throw;
        report["enclosed_volume"] = nullptr;
      }
    }
  }
  out.verdicts = {at_most("sup |trace_gap|", gap, tol("surface.trace_gap"), "analytic")};
  if (domain && !s.closed()) {
    const auto st = stationarity_residual(s, body, *domain);
    report["stationarity"] = {{"mean_curvature", st.mean_curvature}, {"mean_curvature_dev", st.mean_curvature_dev},
                              {"contact_dev", st.contact_dev}};
    // informational: a surface need not be stationary
    report["stationary_contact"] = st.contact_dev <= tol("surface.contact");
  }
  report["verdicts"] = verdicts_json(out.verdicts);

  Writer w{cfg, out};
  w("frames.csv", frames_csv(s, body, seed));
  w("report.json", dump(report));
}

// ------------------------------------------------------------- variation

template <int Dim>
void run_variation(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  Fields f(cfg.scene, "");
  const auto seed = run_seed(cfg, f);
  const auto body = parse_body<Dim>(f.raw("body"), "body");
  const auto s = parse_surface<Dim>(f.raw("surface"), body, "surface");
  std::optional<Domain<Dim>> domain;
  if (f.has("domain")) domain = parse_domain<Dim>(f.raw("domain"), seed, "domain");
  const auto omega = parse_omega<Dim>(f.raw("omega"), s, "omega");
  const FlowMode mode = parse_mode(f);
  const bool want_index = f.boolean("index_form", false);
  f.finish();
  if (want_index && !domain) schema_fail("index_form", "needs a domain");

  const Flow<Dim> flow = guarded("scene", [&] { return Flow<Dim>(s, body, omega, mode, domain); });
  const VariationReport rep = want_index                          ? index_form_check(flow)
                              : mode == FlowMode::straight_line ? second_variation(flow)
                                                                : first_variation(flow);
  const double rel = tol("variation.relative");
  auto gap = [](double fd, double a) { return std::abs(fd - a) / (1 + std::abs(a)); };
  out.verdicts.push_back(at_most("A'(0) relative gap", gap(rep.a_prime_fd.value, rep.a_prime_analytic), rel, "fd"));
  out.verdicts.push_back(at_most("V'(0) relative gap", gap(rep.v_prime_fd.value, rep.v_prime_analytic), rel, "fd"));
  if (rep.a_second_analytic)
    out.verdicts.push_back(at_most("A''(0) relative gap", gap(rep.a_second_fd.value, *rep.a_second_analytic), rel, "fd"));
  // no order is observable when every difference quotient is exact
  if (const double order = rep.worst_order(); std::isfinite(order))
    out.verdicts.push_back(verdict("observed FD order", order, tol("variation.min_order"), "fd", order >= tol("variation.min_order")));
  if (rep.index_form_value) {
    const double i = *rep.index_form_value, fd = rep.f_second_fd->value;
    out.verdicts.push_back(at_most("index form vs FD of (A + n H V)'', relative", std::abs(fd - i) / std::max(std::abs(i), 1e-12),
                                   tol("variation.index_relative"), "fd"));
  }

  json report = report_header("variation", seed, cfg.scene);
  report["report"] = variation_report_json(rep);
  report["verdicts"] = verdicts_json(out.verdicts);
  Writer w{cfg, out};
  w("variation.json", dump(report));
  w("variation.csv", variation_samples_csv(sample_functionals(flow), seed));
}

// --------------------------------------------------------------- profile

struct ProfileScene {
  json body_json;
  Body2 body = Body2::ball(1);
  Domain2 domain = Domain2::full_space();
  std::optional<int> grid;
  std::vector<double> volumes;
  ProfileMethod method = ProfileMethod::both;
  std::uint64_t seed = kDefaultSeed;
};

inline ProfileScene parse_profile_scene(const RunConfig& cfg) {
  Fields f(cfg.scene, "");
  ProfileScene ps;
  ps.seed = run_seed(cfg, f);
  ps.body_json = f.raw("body");
  ps.body = parse_body<2>(ps.body_json, "body");
  ps.domain = parse_domain<2>(f.raw("domain"), ps.seed, "domain");
  if (f.has("grid")) {
    const auto n = f.integer("grid");
    if (n < 1 || n > 1000) schema_fail("grid", "must lie in [1, 1000]");
    ps.grid = static_cast<int>(n);
  }
  if (f.has("volumes")) {
    ps.volumes = f.numbers("volumes");
    for (std::size_t i = 0; i < ps.volumes.size(); ++i)
      if (!(ps.volumes[i] > 0)) schema_fail("volumes[" + std::to_string(i) + "]", "must be positive");
  }
  if (!ps.grid && ps.volumes.empty()) schema_fail("", "give \"grid\" or \"volumes\"");
  if (f.has("method")) ps.method = profile_method_from_string(f.one_of("method", {"candidates", "optimizer", "both"}));
  f.finish();
  if (ps.domain.bounded()) {
    for (std::size_t i = 0; i < ps.volumes.size(); ++i)
      if (!(ps.volumes[i] < ps.domain.volume())) schema_fail("volumes[" + std::to_string(i) + "]", "must be below the domain volume");
  } else if (ps.domain.kind() != DomainKind::polyhedral_cone && ps.domain.kind() != DomainKind::half_space) {
    schema_fail("domain", "profiles need a polygon, a disk, a cone or a half-plane");
  }
  return ps;
}

/// Profile for one body. Cones get the explicit curve; grid n there means v = 1..n.
inline ProfileCurve compute_profile(const ProfileScene& ps, const Body2& body, int jobs) {
  if (ps.domain.bounded()) {
    ProfileOptions o;
    o.method = ps.method;
    o.seed = ps.seed;
    o.jobs = jobs;
    return polygon_profile(body, ps.domain, ps.grid.value_or(0), ps.volumes, o);
  }
  std::vector<double> vols = ps.volumes;
  if (ps.grid)
    for (int k = 1; k <= *ps.grid; ++k) vols.push_back(k);
  std::sort(vols.begin(), vols.end());
  vols.erase(std::unique(vols.begin(), vols.end()), vols.end());
  auto p = cone_profile_curve(body, ps.domain, vols);
  p.seed = ps.seed;
  return p;
}

/// Cached profile computation; the key covers the scene, the seed and the version.
inline ProfileCurve cached_profile(const RunConfig& cfg, const ProfileScene& ps, const Body2& body, const std::string& tag,
                                   RunOutcome& out) {
  std::optional<RunCache> cache;
  std::string key;
  if (cfg.use_cache) {
    json scene = cfg.scene;
    scene.erase("seed");
    scene["body"] = body_to_json(body);
    scene["__profile"] = tag;
    cache.emplace(cfg.cache_dir.value_or(RunCache::default_dir()));
    key = RunCache::key(scene, ps.seed);
    if (auto hit = cache->load(key)) {
      ProfileCurve p(body, ps.domain);
      p.total_volume = ps.domain.bounded() ? ps.domain.volume() : std::numeric_limits<double>::infinity();
      p.upper_bound = ps.domain.bounded();
      profile_from_json(*hit, p);
      out.cache_hit = out.cache_hit.value_or(true);
      return p;
    }
  }
  ProfileCurve p = compute_profile(ps, body, cfg.jobs);
  if (cache) {
    cache->store(key, profile_to_json(p));
    out.cache_hit = false;
  }
  return p;
}

struct ProfileReports {
  std::optional<ConcavityReport> concavity;
  std::optional<ComparisonReport> comparison;
  StructureReport structure;
};

inline ProfileReports profile_reports(const ProfileCurve& p, const Tolerances& tol, const ProfileCurve* euclid,
                                      std::vector<Verdict>& verdicts, json& report) {
  ProfileReports r;
  const std::string src = profile_source(p);
  try {
    // the tolerance is relative to psi(V/2); the default report uses 1e-3
    r.concavity = concavity_report(p);
    if (auto rel = tol.override_of("profile.concavity")) r.concavity = concavity_report(p, r.concavity->tolerance * *rel / 1e-3);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_samples) throw;
    report["concavity"] = "skipped: fewer than 5 grid samples";
  }
  if (r.concavity) {
    verdicts.push_back(at_most("max second difference of psi", r.concavity->max_second_difference, r.concavity->tolerance, src));
    report["concavity"] = r.concavity->to_json();
  }
  if (p.domain.bounded()) {
    r.comparison = comparison_report(p, tol("profile.comparison"), tol("profile.tight"));
    verdicts.push_back(at_most("cone comparison excess", r.comparison->worst_corner_excess, r.comparison->tolerance, src));
    if (std::isfinite(r.comparison->min_edge_gap))
      verdicts.push_back(verdict("half-space bound gap (strict)", r.comparison->min_edge_gap, 0.0, src, r.comparison->edge_bound_strict));
    report["comparison"] = r.comparison->to_json();
  } else {
    report["comparison"] = "skipped: the profile of a cone is its own comparison";
  }
  r.structure = structure_checks(p, euclid, tol("profile.symmetry"), tol("profile.monotone"), tol("profile.slope"),
                                 tol("profile.sandwich"));
  if (r.structure.subadditivity_pairs > 0)
    verdicts.push_back(verdict("subadditivity margin (strict)", r.structure.subadditivity_margin, 0.0, src,
                               r.structure.subadditivity_margin > 0));
  verdicts.push_back(verdict("slope bracketing failures", r.structure.slope_failures, 0.0, src, r.structure.slope_failures == 0));
  if (r.structure.monotone_first_half)
    verdicts.push_back(verdict("monotone on the first half, worst drop", *r.structure.monotone_worst_drop,
                               r.structure.monotone_tolerance, src, *r.structure.monotone_first_half));
  if (r.structure.symmetry_ok)
    verdicts.push_back(verdict("|I(v) - I(V - v)|", *r.structure.symmetry_deviation, r.structure.symmetry_tolerance, src,
                               *r.structure.symmetry_ok));
  if (r.structure.sandwich_ok)
    verdicts.push_back(verdict("sandwich alpha I_E <= I_K <= beta I_E, worst excess", *r.structure.sandwich_worst,
                               r.structure.sandwich_tolerance, src, *r.structure.sandwich_ok));
  report["structure"] = r.structure.to_json();
  return r;
}

inline void run_profile(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  const ProfileScene ps = parse_profile_scene(cfg);
  const ProfileCurve p = cached_profile(cfg, ps, ps.body, "body", out);
  json report = report_header("profile", ps.seed, cfg.scene);
  report["source"] = profile_source(p);
  report["upper_bound"] = p.upper_bound;
  report["warnings"] = p.warnings;
  const auto r = profile_reports(p, tol, nullptr, out.verdicts, report);
  report["verdicts"] = verdicts_json(out.verdicts);
  Writer w{cfg, out};
  w("profile.csv", profile_csv(p));
  w("reports.json", dump(report));
  w("profile.svg", profile_svg(p, r.comparison ? &*r.comparison : nullptr));
}

/// The body's profile next to the Euclidean one on the same volumes.
inline void run_compare(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  const ProfileScene ps = parse_profile_scene(cfg);
  const ProfileCurve p = cached_profile(cfg, ps, ps.body, "body", out);
  const ProfileCurve e = cached_profile(cfg, ps, Body2::ball(1), "euclidean", out);
  json report = report_header("compare", ps.seed, cfg.scene);
  report["source"] = profile_source(p);
  const auto r = profile_reports(p, tol, &e, out.verdicts, report);
  report["verdicts"] = verdicts_json(out.verdicts);

  const auto [alpha, beta] = support_range(ps.body);
  std::string csv = artifact_header(ps.seed) + "v,I_K,I_euclidean,alpha_I_euclidean,beta_I_euclidean,corner_bound,halfspace_bound\n";
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const double v = p.samples[i].v, ie = e.at(v, 1e-9).value_or(std::nan(""));
    double half = std::numeric_limits<double>::infinity();
    std::string corner;
    if (r.comparison) {
      for (double th : r.comparison->halfspace_theta) half = std::min(half, cone_profile_from_volume(2, th, v));
      if (!r.comparison->vertex_theta.empty()) corner = fmt(cone_profile_from_volume(2, r.comparison->theta0, v));
    }
    csv += fmt(v) + "," + fmt(p.samples[i].value) + "," + fmt(ie) + "," + fmt(alpha * ie) + "," + fmt(beta * ie) + "," + corner +
           "," + (std::isfinite(half) ? fmt(half) : "") + "\n";
  }
  report["alpha"] = alpha;
  report["beta"] = beta;
  Writer w{cfg, out};
  w("compare.csv", csv);
  w("compare.json", dump(report));
}

// ----------------------------------------------------------------- suite

inline void run_suite(const RunConfig& cfg, RunOutcome& out, std::ostream& log) {
  Fields f(cfg.scene, "");
  BatteryOptions o;
  o.seed = run_seed(cfg, f);
  f.finish();
  o.jobs = cfg.jobs;
  o.tolerances = cfg.tolerances;
  const auto runs = run_battery(o, [&](const CriterionRun& r) {
    log << "criterion " << r.result.id << ": " << (r.result.pass() ? "PASS" : "FAIL") << "  " << r.result.title << "\n";
    for (const auto& c : r.result.checks)
      if (!c.pass) log << "    failed: " << c.name << " = " << fmt(c.value) << " (tolerance " << fmt(c.tolerance) << ")\n";
    log.flush();
  });
  for (const auto& r : runs)
    for (const auto& c : r.result.checks)
      out.verdicts.push_back(verdict("c" + std::to_string(r.result.id) + ": " + c.name, c.value, c.tolerance, c.source, c.pass));
  Writer w{cfg, out};
  w("summary.json", dump(battery_summary(runs, o)));
}

template <int Dim>
void dispatch(const RunConfig& cfg, const Tolerances& tol, RunOutcome& out) {
  if (cfg.command == "body") return run_body<Dim>(cfg, tol, out);
  if (cfg.command == "surface") return run_surface<Dim>(cfg, tol, out);
  return run_variation<Dim>(cfg, tol, out);
}

}  // namespace detail

/// Runs one command: 0 when every gated check passes, 1 on a failed check,
/// 2 on invalid input.
inline RunOutcome run(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  RunOutcome out;
  try {
    const Tolerances tol(command_tolerance_defaults(cfg.command), cfg.tolerances);
    if (cfg.jobs < 1) fail(ErrorCode::schema_error, "--jobs: must be at least 1");
    if (cfg.command == "suite") {
      detail::run_suite(cfg, out, log);
    } else if (cfg.command == "profile") {
      detail::run_profile(cfg, tol, out);
    } else if (cfg.command == "compare") {
      detail::run_compare(cfg, tol, out);
    } else {
      if (!cfg.scene.is_object() || !cfg.scene.contains("body")) schema_fail("body", "required field is missing");
      if (body_dimension(cfg.scene["body"], "body") == 2)
        detail::dispatch<2>(cfg, tol, out);
      else
        detail::dispatch<3>(cfg, tol, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    out.exit_code = 2;
    return out;
  } catch (const json::exception& e) {
    err << "error: SchemaError: " << e.what() << "\n";
    out.exit_code = 2;
    return out;
  }
  if (cfg.command != "suite")
    for (const auto& v : out.verdicts)
      log << (v.pass ? "PASS  " : "FAIL  ") << v.name << " = " << fmt(v.value) << " (tolerance " << fmt(v.tolerance) << ", "
          << v.source << ")\n";
  out.exit_code = detail::all_pass(out.verdicts) ? 0 : 1;
  return out;
}

}  // namespace wulffkit::io
