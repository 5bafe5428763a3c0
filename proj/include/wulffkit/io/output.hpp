#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <array>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "wulffkit/error.hpp"
#include "wulffkit/finite_difference.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/profile.hpp"
#include "wulffkit/variation.hpp"
#include "wulffkit/version.hpp"

namespace wulffkit::io {

using nlohmann::json;

/// Shortest round-trip decimal form, fixed across runs and platforms.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string artifact_header(std::uint64_t seed) {
  return "# wulffkit " + std::string(kVersion) + " seed=" + std::to_string(seed) + "\n";
}

/// RFC 4180 quoting where needed.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::invalid_argument, "cannot write " + path.string());
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_argument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON with a trailing newline; key order is sorted, so output is stable.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --------------------------------------------------------------- profiles

inline std::string profile_csv(const ProfileCurve& p) {
  std::string out = artifact_header(p.seed) + "v,I,psi,method,descriptor\n";
  for (const auto& s : p.samples)
    out += fmt(s.v) + "," + fmt(s.value) + "," + fmt(s.value * s.value) + "," + s.method + "," +
           csv_field(s.descriptor.dump()) + "\n";
  return out;
}

inline json sample_to_json(const ProfileSample& s) {
  json curve = json::array();
  for (const auto& x : s.curve) curve.push_back({x[0], x[1]});
  json j{{"v", s.v},
         {"value", s.value},
         {"method", s.method},
         {"descriptor", s.descriptor},
         {"on_grid", s.on_grid},
         {"optimizer_status", s.optimizer_status},
         {"connected", s.connected},
         {"curve", curve}};
  if (std::isfinite(s.candidate_value)) j["candidate_value"] = s.candidate_value;
  if (s.optimizer_value) j["optimizer_value"] = *s.optimizer_value;
  if (s.mean_curvature) j["mean_curvature"] = *s.mean_curvature;
  return j;
}

inline ProfileSample sample_from_json(const json& j) {
  ProfileSample s;
  s.v = j.at("v").get<double>();
  s.value = j.at("value").get<double>();
  s.method = j.at("method").get<std::string>();
  s.descriptor = j.at("descriptor");
  s.on_grid = j.at("on_grid").get<bool>();
  s.optimizer_status = j.at("optimizer_status").get<std::string>();
  s.connected = j.at("connected").get<bool>();
  for (const auto& x : j.at("curve")) s.curve.push_back(Vec2(x[0].get<double>(), x[1].get<double>()));
  if (j.contains("candidate_value")) s.candidate_value = j["candidate_value"].get<double>();
  if (j.contains("optimizer_value")) s.optimizer_value = j["optimizer_value"].get<double>();
  if (j.contains("mean_curvature")) s.mean_curvature = j["mean_curvature"].get<double>();
  return s;
}

inline json profile_to_json(const ProfileCurve& p) {
  json samples = json::array();
  for (const auto& s : p.samples) samples.push_back(sample_to_json(s));
  return {{"version", kVersion}, {"seed", p.seed}, {"samples", samples}, {"warnings", p.warnings}};
}

/// Restores samples and warnings into a curve already holding body and domain.
inline void profile_from_json(const json& j, ProfileCurve& p) {
  p.samples.clear();
  for (const auto& s : j.at("samples")) p.samples.push_back(sample_from_json(s));
  p.warnings = j.at("warnings").get<std::vector<std::string>>();
  p.seed = j.at("seed").get<std::uint64_t>();
}

// ------------------------------------------------------------------ frames

/// Per-node frames at the quadrature nodes. Planar rows carry v = z = Nz = 0.
template <int Dim>
std::string frames_csv(const Hypersurface<Dim>& s, const ConvexBody<Dim>& body, std::uint64_t seed) {
  std::string out = artifact_header(seed) + "u,v,x,y,z,Nx,Ny,Nz,phiK,HK,trace_gap\n";
  for (const auto& q : s.nodes()) {
    const Frame<Dim> f = frame_at(s, body, q.u);
    const double u = q.u[0], v = Dim == 3 ? q.u[Dim - 2] : 0.0;
    const double z = Dim == 3 ? f.point[Dim - 1] : 0.0, nz = Dim == 3 ? f.normal[Dim - 1] : 0.0;
    out += fmt(u) + "," + fmt(v) + "," + fmt(f.point[0]) + "," + fmt(f.point[1]) + "," + fmt(z) + "," +
           fmt(f.normal[0]) + "," + fmt(f.normal[1]) + "," + fmt(nz) + "," + fmt(f.phi_k) + "," + fmt(f.mean_k) + "," +
           fmt(f.trace_gap) + "\n";
  }
  return out;
}

inline json fd_to_json(const FdEstimate& e) {
  json j{{"value", e.value}, {"error", e.error}, {"raw", e.raw}, {"exact", e.exact}};
  j["order"] = e.exact ? json("exact") : json(e.order);
  return j;
}

inline json variation_report_json(const VariationReport& r) {
  json j{{"a_prime_analytic", r.a_prime_analytic}, {"a_prime_fd", fd_to_json(r.a_prime_fd)},
         {"v_prime_analytic", r.v_prime_analytic}, {"v_prime_fd", fd_to_json(r.v_prime_fd)},
         {"a_second_fd", fd_to_json(r.a_second_fd)}, {"v_second_fd", fd_to_json(r.v_second_fd)},
         {"closed_form", r.closed_form}, {"mean_curvature", r.mean_curvature},
         {"fd_steps", r.steps}, {"extrapolation_order", 6}};
  if (r.a_second_analytic) j["a_second_analytic"] = *r.a_second_analytic;
  if (r.index_form_value) j["index_form_value"] = *r.index_form_value;
  if (r.f_second_fd) j["f_second_fd"] = fd_to_json(*r.f_second_fd);
  return j;
}

/// (t, A_K(t), V(t)) at every stencil point, in increasing t.
inline std::string variation_samples_csv(const FdSamples& s, std::uint64_t seed) {
  std::vector<std::array<double, 3>> rows;
  rows.push_back({0.0, s.center[0], s.center[1]});
  for (int i = 0; i < 3; ++i) {
    rows.push_back({s.steps[i], s.plus[i][0], s.plus[i][1]});
    rows.push_back({-s.steps[i], s.minus[i][0], s.minus[i][1]});
  }
  std::sort(rows.begin(), rows.end());
  std::string out = artifact_header(seed) + "t,A,V\n";
  for (const auto& r : rows) out += fmt(r[0]) + "," + fmt(r[1]) + "," + fmt(r[2]) + "\n";
  return out;
}

// --------------------------------------------------------------------- svg

namespace detail {

struct Panel {
  double x0, y0, w, h;
  double vmax, ymax;
  double px(double v) const { return x0 + w * v / vmax; }
  double py(double y) const { return y0 + h - h * std::min(y, 1.5 * ymax) / ymax; }
};

inline std::string svg_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string svg_path(const Panel& p, const std::vector<double>& v, const std::vector<double>& y,
                            const std::string& style) {
  std::string d;
  for (std::size_t i = 0; i < v.size(); ++i) d += (i ? " L" : "M") + svg_num(p.px(v[i])) + "," + svg_num(p.py(y[i]));
  return "  <path d=\"" + d + "\" fill=\"none\" " + style + "/>\n";
}

inline std::string svg_frame(const Panel& p, const std::string& title) {
  std::string s = "  <rect x=\"" + svg_num(p.x0) + "\" y=\"" + svg_num(p.y0) + "\" width=\"" + svg_num(p.w) +
                  "\" height=\"" + svg_num(p.h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  s += "  <text x=\"" + svg_num(p.x0 + 6) + "\" y=\"" + svg_num(p.y0 + 16) + "\" font-size=\"13\">" + title + "</text>\n";
  s += "  <text x=\"" + svg_num(p.x0 + p.w - 70) + "\" y=\"" + svg_num(p.y0 + p.h + 16) +
       "\" font-size=\"11\">v max " + svg_num(p.vmax) + "</text>\n";
  s += "  <text x=\"" + svg_num(p.x0 - 4) + "\" y=\"" + svg_num(p.y0 + 4) + "\" font-size=\"11\" text-anchor=\"end\">" +
       svg_num(p.ymax) + "</text>\n";
  return s;
}

}  // namespace detail

/// I(v) and psi(v) = I^2 with the cone comparison curves (corner bound for
/// polygons, half-space bounds always) drawn dashed.
inline std::string profile_svg(const ProfileCurve& p, const ComparisonReport* cmp) {
  std::vector<double> v, i, psi;
  for (const auto& s : p.samples) v.push_back(s.v), i.push_back(s.value), psi.push_back(s.value * s.value);
  const double vmax = std::isfinite(p.total_volume) ? p.total_volume : (v.empty() ? 1.0 : v.back());
  const double imax = i.empty() ? 1.0 : std::max(1e-12, *std::max_element(i.begin(), i.end())) * 1.15;
  const detail::Panel left{60, 30, 320, 260, vmax, imax};
  const detail::Panel right{450, 30, 320, 260, vmax, imax * imax};

  std::vector<double> fine;
  for (int k = 0; k <= 200; ++k) fine.push_back(vmax * k / 200);
  auto overlay = [&](double theta, const std::string& style) {
    std::vector<double> a, b;
    for (double x : fine) {
      const double c = cone_profile_from_volume(2, theta, x);
      a.push_back(c), b.push_back(c * c);
    }
    return detail::svg_path(left, fine, a, style) + detail::svg_path(right, fine, b, style);
  };

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!-- wulffkit " + std::string(kVersion) + " seed=" + std::to_string(p.seed) + " -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"330\" viewBox=\"0 0 800 330\">\n";
  s += "  <rect width=\"800\" height=\"330\" fill=\"white\"/>\n";
  s += detail::svg_frame(left, "I(v)") + detail::svg_frame(right, "psi(v) = I(v)^2");
  if (cmp) {
    for (double th : cmp->halfspace_theta) s += overlay(th, "stroke=\"#9ab\" stroke-dasharray=\"2,3\"");
    if (!cmp->vertex_theta.empty()) s += overlay(cmp->theta0, "stroke=\"#c33\" stroke-dasharray=\"6,4\"");
  }
  s += detail::svg_path(left, v, i, "stroke=\"#14a\" stroke-width=\"2\"");
  s += detail::svg_path(right, v, psi, "stroke=\"#14a\" stroke-width=\"2\"");
  for (std::size_t k = 0; k < v.size(); ++k) {
    s += "  <circle cx=\"" + detail::svg_num(left.px(v[k])) + "\" cy=\"" + detail::svg_num(left.py(i[k])) +
         "\" r=\"2.5\" fill=\"#14a\"/>\n";
    s += "  <circle cx=\"" + detail::svg_num(right.px(v[k])) + "\" cy=\"" + detail::svg_num(right.py(psi[k])) +
         "\" r=\"2.5\" fill=\"#14a\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace wulffkit::io
