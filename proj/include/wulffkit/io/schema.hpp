#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/numerics.hpp"
#include "wulffkit/omega.hpp"
#include "wulffkit/variation.hpp"

namespace wulffkit::io {

using nlohmann::json;

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::schema_error, path + ": " + what);
}

/// Read access to one JSON object that remembers which keys were used, so
/// that `finish()` can reject everything else.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) schema_fail(at(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) schema_fail(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema_fail(at(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0)) schema_fail(at(key), "must be positive");
    return x;
  }
  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) schema_fail(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

  std::uint64_t unsigned64(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      schema_fail(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) schema_fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) schema_fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

  std::string one_of(const std::string& key, const std::vector<std::string>& allowed) {
    const std::string s = string(key);
    for (const auto& a : allowed)
      if (a == s) return s;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    schema_fail(at(key), "unknown value \"" + s + "\" (expected one of: " + list + ")");
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) schema_fail(at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) schema_fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) schema_fail(at(key) + "[" + std::to_string(i) + "]", "must be finite");
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    return has(key) ? numbers(key) : fallback;
  }

  template <int D>
  Vec<D> vec(const std::string& key) {
    const auto v = numbers(key);
    if (static_cast<int>(v.size()) != D) schema_fail(at(key), "expected " + std::to_string(D) + " components");
    Vec<D> out;
    for (int i = 0; i < D; ++i) out[i] = v[i];
    return out;
  }
  template <int D>
  Vec<D> vec(const std::string& key, const Vec<D>& fallback) {
    return has(key) ? vec<D>(key) : fallback;
  }

  template <int D>
  std::vector<Vec<D>> vecs(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) schema_fail(at(key), "expected an array of points");
    std::vector<Vec<D>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string here = at(key) + "[" + std::to_string(i) + "]";
      const json& p = v[i];
      if (!p.is_array() || static_cast<int>(p.size()) != D) schema_fail(here, "expected " + std::to_string(D) + " components");
      Vec<D> x;
      for (int k = 0; k < D; ++k) {
        if (!p[k].is_number()) schema_fail(here, "expected numbers");
        x[k] = p[k].get<double>();
      }
      out.push_back(x);
    }
    return out;
  }

  Fields object(const std::string& key) { return Fields(raw(key), at(key)); }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) schema_fail(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

/// Wraps constructor failures of the core types as schema errors naming the field.
template <class F>
auto guarded(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema_error) throw;
    schema_fail(path, e.what());
  }
}

// ------------------------------------------------------------------ bodies

/// Ambient dimension implied by a body description.
inline int body_dimension(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) schema_fail(path + ".kind", "required string");
  const std::string kind = j["kind"];
  if (kind == "fourier2d" || kind == "fourier") return 2;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer() || (j["dim"] != 2 && j["dim"] != 3)) schema_fail(path + ".dim", "expected 2 or 3");
    return j["dim"].get<int>();
  }
  if (kind == "ellipsoid") {
    if (j.contains("diag") && j["diag"].is_array()) return static_cast<int>(j["diag"].size());
    if (j.contains("matrix") && j["matrix"].is_array()) return static_cast<int>(j["matrix"].size());
    schema_fail(path, "ellipsoid needs \"diag\" or \"matrix\"");
  }
  if (kind == "ball") return 2;
  schema_fail(path + ".kind", "unknown body kind \"" + kind + "\" (expected ball, ellipsoid, fourier2d)");
}

template <int Dim>
ConvexBody<Dim> parse_body(const json& j, const std::string& path = "body") {
  Fields f(j, path);
  const std::string kind = f.one_of("kind", {"ball", "ellipsoid", "fourier2d", "fourier"});
  if (body_dimension(j, path) != Dim) schema_fail(path, "body must be " + std::to_string(Dim) + "-dimensional here");
  if (f.has("dim")) f.integer("dim");
  ConvexBody<Dim> body = [&] {
    if (kind == "ball") {
      const double r = f.positive("radius", 1.0);
      return ConvexBody<Dim>::ball(r);
    }
    if (kind == "ellipsoid") {
      Mat<Dim> a = Mat<Dim>::Zero();
      if (f.has("diag") == f.has("matrix")) schema_fail(path, "give exactly one of \"diag\" and \"matrix\"");
      if (f.has("diag")) {
        const auto d = f.vec<Dim>("diag");
        for (int i = 0; i < Dim; ++i)
          if (!(d[i] > 0)) schema_fail(f.at("diag"), "entries must be positive");
        a = d.asDiagonal();
      } else {
        const auto rows = f.vecs<Dim>("matrix");
        if (static_cast<int>(rows.size()) != Dim) schema_fail(f.at("matrix"), "expected a square matrix");
        for (int i = 0; i < Dim; ++i) a.row(i) = rows[i].transpose();
      }
      return guarded(path, [&] { return ConvexBody<Dim>::ellipsoid(a); });
    }
    if constexpr (Dim == 2) {
      const double a0 = f.positive("a0");
      const auto c = f.numbers("cos", {});
      const auto s = f.numbers("sin", {});
      return guarded(path, [&] { return Body2::fourier(a0, c, s); });
    }
    schema_fail(path, "fourier bodies are planar");
  }();
  f.finish();
  return body;
}

/// Canonical form; doubles are written with round-trip precision.
template <int Dim>
json body_to_json(const ConvexBody<Dim>& body) {
  switch (body.kind()) {
    case BodyKind::ball:
      return {{"dim", Dim}, {"kind", "ball"}, {"radius", body.radius()}};
    case BodyKind::ellipsoid: {
      json rows = json::array();
      for (int i = 0; i < Dim; ++i) {
        json row = json::array();
        for (int k = 0; k < Dim; ++k) row.push_back(body.matrix()(i, k));
        rows.push_back(row);
      }
      return {{"dim", Dim}, {"kind", "ellipsoid"}, {"matrix", rows}};
    }
    case BodyKind::fourier2d:
      break;
  }
  return {{"dim", 2}, {"kind", "fourier2d"}, {"a0", body.a0()}, {"cos", body.cos_coeffs()}, {"sin", body.sin_coeffs()}};
}

// ----------------------------------------------------------------- domains

/// Convex hexagon with vertex angles 2 pi k / 6 + U(-jitter, jitter).
inline Domain2 random_hexagon(std::uint64_t seed, double jitter = 0.2, double radius = 1.0) {
  if (!(jitter >= 0 && jitter < kPi / 6)) fail(ErrorCode::invalid_argument, "hexagon jitter must lie in [0, pi/6)");
  std::vector<Vec2> v;
  for (int k = 0; k < 6; ++k) {
    const double a = kTwoPi * k / 6 + jitter * (2 * counter_uniform(seed, k) - 1);
    v.push_back(radius * unit_dir(a));
  }
  return Domain2::polygon(v);
}

template <int Dim>
Domain<Dim> parse_domain(const json& j, std::uint64_t run_seed, const std::string& path = "domain") {
  Fields f(j, path);
  const std::string kind =
      f.one_of("kind", {"full_space", "half_space", "slab", "cone", "polygon", "hexagon", "disk"});
  Domain<Dim> d = [&]() -> Domain<Dim> {
    if (kind == "full_space") return Domain<Dim>::full_space();
    if (kind == "half_space") {
      const auto n = f.vec<Dim>("normal");
      const auto p = f.vec<Dim>("point", Vec<Dim>::Zero());
      return guarded(path, [&] { return Domain<Dim>::half_space(n, p); });
    }
    if (kind == "slab") return Domain<Dim>::slab(f.positive("width"));
    if (kind == "cone") {
      const auto n = f.vecs<Dim>("normals");
      const auto apex = f.vec<Dim>("apex", Vec<Dim>::Zero());
      return guarded(path, [&] { return Domain<Dim>::polyhedral_cone(n, apex); });
    }
    if constexpr (Dim == 2) {
      if (kind == "polygon") {
        const auto v = f.vecs<2>("vertices");
        return guarded(f.at("vertices"), [&] { return Domain2::polygon(v); });
      }
      if (kind == "hexagon") {
        const double jitter = f.number("jitter", 0.2);
        const double r = f.positive("radius", 1.0);
        const std::uint64_t seed = f.has("seed") ? f.unsigned64("seed") : run_seed;
        return guarded(path, [&] { return random_hexagon(seed, jitter, r); });
      }
      if (kind == "disk") {
        const auto c = f.vec<2>("center", Vec2::Zero());
        return Domain2::disk(c, f.positive("radius"));
      }
    }
    schema_fail(f.at("kind"), "\"" + kind + "\" domains are planar only");
  }();
  f.finish();
  return d;
}

// ---------------------------------------------------------------- surfaces

template <int Dim>
Hypersurface<Dim> parse_surface(const json& j, const ConvexBody<Dim>& body, const std::string& path = "surface") {
  Fields f(j, path);
  Hypersurface<Dim> s = [&]() -> Hypersurface<Dim> {
    if constexpr (Dim == 2) {
      const std::string kind = f.one_of("kind", {"circle", "ellipse", "segment", "wulff", "wulff_arc", "sampled"});
      if (kind == "circle") return shapes::circle(f.vec<2>("center", Vec2::Zero()), f.positive("radius"));
      if (kind == "ellipse") {
        const auto c = f.vec<2>("center", Vec2::Zero());
        const auto ax = f.vec<2>("axes");
        if (!(ax.minCoeff() > 0)) schema_fail(f.at("axes"), "entries must be positive");
        return shapes::ellipse(c, ax[0], ax[1]);
      }
      if (kind == "segment") {
        const auto p = f.vec<2>("from"), q = f.vec<2>("to");
        if (!((q - p).norm() > 0)) schema_fail(f.at("to"), "segment has zero length");
        return shapes::segment(p, q);
      }
      if (kind == "wulff") return shapes::wulff(body, f.vec<2>("center", Vec2::Zero()), f.positive("scale", 1.0));
      if (kind == "wulff_arc") {
        const auto c = f.vec<2>("center", Vec2::Zero());
        const double scale = f.positive("scale", 1.0);
        const auto a = f.vec<2>("angles");
        if (!(a[1] > a[0])) schema_fail(f.at("angles"), "need angles[1] > angles[0]");
        return shapes::wulff_arc(body, c, scale, a[0], a[1]);
      }
      const auto pts = f.vecs<2>("points");
      const bool closed = f.boolean("closed", false);
      return guarded(f.at("points"), [&] { return shapes::sampled(pts, closed); });
    } else {
      const std::string kind = f.one_of("kind", {"sphere", "ellipsoid_patch", "disk", "rect", "wulff"});
      if (kind == "sphere") return shapes::sphere(f.vec<3>("center", Vec3::Zero()), f.positive("radius"));
      if (kind == "ellipsoid_patch") {
        const auto c = f.vec<3>("center", Vec3::Zero());
        const auto ax = f.vec<3>("axes");
        if (!(ax.minCoeff() > 0)) schema_fail(f.at("axes"), "entries must be positive");
        const auto band = f.vec<2>("band", Vec2(0.0, kPi));
        return guarded(f.at("band"), [&] { return shapes::ellipsoid_patch(c, ax, band[0], band[1]); });
      }
      if (kind == "disk") return shapes::disk(f.vec<3>("center", Vec3::Zero()), f.positive("radius"));
      if (kind == "rect") {
        const auto o = f.vec<3>("origin"), a = f.vec<3>("a"), b = f.vec<3>("b");
        if (!(a.cross(b).norm() > 0)) schema_fail(f.at("b"), "edges must not be parallel");
        return shapes::rect(o, a, b);
      }
      return shapes::wulff(body);
    }
  }();
  if (f.has("orientation")) {
    const auto o = f.integer("orientation");
    if (o != 1 && o != -1) schema_fail(f.at("orientation"), "expected 1 or -1");
    s.set_orientation(static_cast<int>(o));
  }
  if (f.has("panels")) {
    const auto p = f.integer("panels");
    if (p < 1 || p > 4096) schema_fail(f.at("panels"), "expected an integer in [1, 4096]");
    s.set_panels(static_cast<int>(p));
  }
  f.finish();
  return s;
}

// ------------------------------------------------------------------- omega

template <int Dim>
Omega<Dim> parse_omega(const json& j, const Hypersurface<Dim>& s, const std::string& path = "omega") {
  constexpr int n = Dim - 1;
  Fields f(j, path);
  const std::string kind = f.one_of("kind", {"constant", "bump", "fourier_mode"});
  static const json empty = json::object();
  Fields p = f.has("params") ? f.object("params") : Fields(empty, f.at("params"));
  Omega<Dim> om = [&] {
    if (kind == "constant") return Omega<Dim>::constant(p.number("value", 1.0));
    if (kind == "bump") {
      const auto c = p.vec<n>("center");
      const auto w = p.vec<n>("width");
      const double amp = p.number("amplitude", 1.0);
      Param<Dim> cc, ww;
      for (int i = 0; i < n; ++i) cc[i] = c[i], ww[i] = w[i];
      bool any = false;
      for (int i = 0; i < n; ++i) any = any || ww[i] > 0;
      if (!any) schema_fail(p.at("width"), "at least one width must be positive");
      return Omega<Dim>::bump(s, cc, ww, amp);
    }
    const auto k = p.integer("k");
    if (k < 0) schema_fail(p.at("k"), "must be non-negative");
    const double phase = p.number("phase", 0.0);
    const double amp = p.number("amplitude", 1.0);
    const auto axis = p.integer("axis", n - 1);
    if (axis < 0 || axis >= n) schema_fail(p.at("axis"), "out of range");
    const bool polar = p.boolean("polar", false);
    return Omega<Dim>::fourier_mode(s, static_cast<int>(k), phase, amp, static_cast<int>(axis), polar);
  }();
  p.finish();
  f.finish();
  return om;
}

inline FlowMode parse_mode(Fields& f) {
  const std::string m = f.has("mode") ? f.one_of("mode", {"straight_line", "boundary_straightened"}) : "straight_line";
  return m == "straight_line" ? FlowMode::straight_line : FlowMode::boundary_straightened;
}

}  // namespace wulffkit::io
