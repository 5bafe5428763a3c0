#pragma once

#include <json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wulffkit/clip2d.hpp"
#include "wulffkit/convex_body.hpp"
#include "wulffkit/domain.hpp"
#include "wulffkit/error.hpp"
#include "wulffkit/numerics.hpp"

namespace wulffkit {

enum class CandidateKind { corner_wulff_arc, edge_wulff_arc, chord, full_wulff };

inline const char* to_string(CandidateKind k) {
  switch (k) {
    case CandidateKind::corner_wulff_arc: return "corner_wulff_arc";
    case CandidateKind::edge_wulff_arc: return "edge_wulff_arc";
    case CandidateKind::chord: return "chord";
    case CandidateKind::full_wulff: return "full_wulff";
  }
  return "?";
}

/// One member of a candidate family. For complements the set E is Omega
/// minus the Wulff piece and the free curve carries the reversed normal.
struct Candidate {
  CandidateKind kind = CandidateKind::chord;
  bool complement = false;
  double value = std::numeric_limits<double>::infinity();  // anisotropic length of the free curve
  double area = 0.0;                                        // V(E)
  std::optional<double> mean_curvature;                     // H_K of the free curve when constant
  int vertex = -1, edge = -1;
  double placement = 0.0;  // edge parameter, or boundary angle on a disk
  double offset = 0.0;     // normal offset of the centre (disk), or chord offset
  Vec2 center = Vec2::Zero();
  double scale = 0.0;
  std::vector<ArcInterval> arcs;
  ChordPiece chord;

  bool feasible() const { return std::isfinite(value); }
  bool connected() const { return kind == CandidateKind::chord || kind == CandidateKind::full_wulff || arcs.size() <= 1; }

  nlohmann::json descriptor() const {
    nlohmann::json j{{"kind", to_string(kind)}, {"complement", complement}, {"value", value}, {"area", area}};
    if (kind == CandidateKind::chord) {
      j["normal"] = {chord.normal[0], chord.normal[1]};
      j["ends"] = {{chord.a[0], chord.a[1]}, {chord.b[0], chord.b[1]}};
    } else {
      j["center"] = {center[0], center[1]};
      j["scale"] = scale;
      nlohmann::json a = nlohmann::json::array();
      for (const auto& r : arcs) a.push_back({r.t0, r.t1});
      j["arcs"] = a;
    }
    if (vertex >= 0) j["vertex"] = vertex;
    if (edge >= 0) j["edge"] = edge, j["placement"] = placement;
    if (mean_curvature) j["mean_curvature"] = *mean_curvature;
    return j;
  }

  /// Free curve sampled with E on the left; empty for closed interior curves.
  /// Complements are cut by pieces of p + lambda(-K).
  std::vector<Vec2> free_curve(const Body2& k, int segments) const {
    const Body2 body = complement ? k.reflected() : k;
    std::vector<Vec2> pts;
    if (kind == CandidateKind::chord) {
      for (int i = 0; i <= segments; ++i) pts.push_back(chord.a + (chord.b - chord.a) * (double(i) / segments));
      return pts;
    }
    if (kind == CandidateKind::full_wulff || arcs.size() != 1) return pts;
    const ArcInterval a = arcs.front();
    for (int i = 0; i <= segments; ++i) pts.push_back(wulff_point(body, center, scale, a.t0 + (a.t1 - a.t0) * i / segments));
    if (complement) std::reverse(pts.begin(), pts.end());
    return pts;
  }
};

struct CandidateOptions {
  int edge_grid = 11;
  int chord_directions = 360;
  int disk_grid = 24;
  bool complements = true;
};

namespace detail {

/// For complements, w must be a piece of p + lambda(-K): the complement's
/// free curve has normal -N, and h_K(-N) = h_{-K}(N), so its K-length is the
/// piece's outer (-K)-length.
inline Candidate from_piece(const WulffPiece& w, CandidateKind kind, bool complement, double total) {
  Candidate c;
  c.kind = kind;
  c.complement = complement;
  c.center = w.center;
  c.scale = w.scale;
  c.arcs = w.arcs;
  c.area = complement ? total - w.area : w.area;
  c.value = w.outer_length;
  if (w.covers || (w.arcs.empty() && !w.full)) c.value = std::numeric_limits<double>::infinity();
  c.mean_curvature = complement ? 1.0 / w.scale : -1.0 / w.scale;
  return c;
}

/// Later families must improve by more than rounding to replace an earlier one.
inline bool improves(double challenger, double incumbent) {
  return challenger < incumbent - 1e-12 * (1 + std::abs(incumbent));
}

inline void keep_best(Candidate& best, const Candidate& c) {
  if (c.feasible() && (!best.feasible() || improves(c.value, best.value))) best = c;
}

}  // namespace detail

/// Best member of each candidate family at area v (complements included).
inline std::vector<Candidate> candidate_families(const Body2& body, const Domain2& domain, double v,
                                                 const CandidateOptions& opt = {}) {
  if (!domain.bounded()) fail(ErrorCode::invalid_argument, "candidate families need a bounded planar domain");
  const double total = domain.volume();
  if (!(v > 0 && v < total)) fail(ErrorCode::invalid_argument, "volume must lie strictly inside (0, V(Omega))");
  std::vector<Candidate> out;
  const Body2 mirror = body.reflected();

  auto wulff_pair = [&](const Vec2& p, CandidateKind kind, Candidate& direct, Candidate& comp) {
    try {
      detail::keep_best(direct, detail::from_piece(wulff_piece_for_area(body, domain, p, v), kind, false, total));
    } catch (const Error&) {
    }
    if (!opt.complements) return;
    try {
      detail::keep_best(comp, detail::from_piece(wulff_piece_for_area(mirror, domain, p, total - v), kind, true, total));
    } catch (const Error&) {
    }
  };

  if (domain.kind() == DomainKind::polygon2d) {
    const auto& verts = domain.vertices();
    const int m = static_cast<int>(verts.size());
    for (int i = 0; i < m; ++i) {
      Candidate direct, comp;
      wulff_pair(verts[i], CandidateKind::corner_wulff_arc, direct, comp);
      direct.vertex = comp.vertex = i;
      out.push_back(direct);
      if (opt.complements) out.push_back(comp);
    }
    for (int i = 0; i < m; ++i) {
      const Vec2 a = verts[i], b = verts[(i + 1) % m];
      for (bool complement : {false, true}) {
        if (complement && !opt.complements) continue;
        const double target = complement ? total - v : v;
        auto eval = [&](double s) {
          Candidate c;
          c.value = std::numeric_limits<double>::infinity();
          try {
            c = detail::from_piece(wulff_piece_for_area(complement ? mirror : body, domain, a + s * (b - a), target),
                                   CandidateKind::edge_wulff_arc, complement, total);
          } catch (const Error&) {
          }
          c.edge = i;
          c.placement = s;
          return c;
        };
        Candidate best;
        best.edge = i;
        int best_k = -1;
        for (int k = 1; k <= opt.edge_grid; ++k) {
          Candidate c = eval(double(k) / (opt.edge_grid + 1));
          if (c.feasible() && c.value < best.value) best = c, best_k = k;
        }
        if (best_k > 0) {
          const double h = 1.0 / (opt.edge_grid + 1);
          auto [s, val] = minimize_scalar([&](double s) { return eval(s).value; }, (best_k - 1) * h, (best_k + 1) * h);
          Candidate c = eval(s);
          if (c.feasible() && c.value < best.value) best = c;
        }
        out.push_back(best);
      }
    }
  } else {
    // disk: centres on rays through the boundary point at angle phi, offset along the outer normal
    const Vec2 c0 = domain.center();
    const double r = domain.radius();
    for (bool complement : {false, true}) {
      if (complement && !opt.complements) continue;
      const double target = complement ? total - v : v;
      auto eval = [&](double phi, double d) {
        Candidate c;
        try {
          c = detail::from_piece(wulff_piece_for_area(complement ? mirror : body, domain, c0 + (r + d) * unit_dir(phi), target),
                                 CandidateKind::edge_wulff_arc, complement, total);
        } catch (const Error&) {
        }
        c.placement = phi;
        c.offset = d;
        return c;
      };
      auto best_offset = [&](double phi) {
        auto [d, val] = minimize_scalar([&](double d) { return eval(phi, d).value; }, -0.9 * r, 3 * r);
        return eval(phi, d);
      };
      Candidate best;
      int best_k = -1;
      for (int k = 0; k < opt.disk_grid; ++k) {
        Candidate c = best_offset(kTwoPi * k / opt.disk_grid);
        if (c.feasible() && c.value < best.value) best = c, best_k = k;
      }
      if (best_k >= 0 && !body.centrally_symmetric()) {
        const double h = kTwoPi / opt.disk_grid;
        auto [phi, val] = minimize_scalar([&](double p) { return best_offset(p).value; }, (best_k - 1) * h, (best_k + 1) * h);
        Candidate c = best_offset(phi);
        if (c.feasible() && c.value < best.value) best = c;
      }
      out.push_back(best);
    }
  }

  // chords over a direction grid, refined near the best direction
  {
    auto eval = [&](double a) {
      Candidate c;
      c.kind = CandidateKind::chord;
      c.chord = chord_for_area(domain, unit_dir(a), v);
      c.area = c.chord.area;
      c.value = c.chord.length * body.support(unit_dir(a));
      c.mean_curvature = 0.0;
      c.placement = a;
      return c;
    };
    Candidate best;
    int best_k = -1;
    for (int k = 0; k < opt.chord_directions; ++k) {
      Candidate c = eval(kTwoPi * k / opt.chord_directions);
      if (c.value < best.value) best = c, best_k = k;
    }
    const double h = kTwoPi / opt.chord_directions;
    auto [a, val] = minimize_scalar([&](double a) { return eval(a).value; }, (best_k - 1) * h, (best_k + 1) * h, 40);
    Candidate c = eval(a);
    if (c.value < best.value) best = c;
    out.push_back(best);
  }

  // interior Wulff shapes
  for (bool complement : {false, true}) {
    if (complement && !opt.complements) continue;
    const double target = complement ? total - v : v;
    const Body2& k = complement ? mirror : body;
    const double lambda = std::sqrt(target / k.volume());
    std::optional<Vec2> centre;
    if (domain.kind() == DomainKind::polygon2d) {
      const auto poly = inner_parallel(k, domain, lambda);
      if (!poly.empty()) {
        Vec2 g = Vec2::Zero();
        for (const auto& q : poly) g += q;
        centre = g / static_cast<double>(poly.size());
      }
    } else {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, lo2 = lo, hi2 = hi;
      for (int i = 0; i < kClipSamples; ++i) {
        const Vec2 q = k.projection(unit_dir(kTwoPi * i / kClipSamples));
        lo = std::min(lo, q[0]), hi = std::max(hi, q[0]), lo2 = std::min(lo2, q[1]), hi2 = std::max(hi2, q[1]);
      }
      centre = domain.center() - lambda * Vec2(0.5 * (lo + hi), 0.5 * (lo2 + hi2));
    }
    Candidate c;
    c.kind = CandidateKind::full_wulff;
    c.complement = complement;
    if (centre) {
      const WulffPiece w = clip_wulff(k, domain, *centre, lambda);
      if (w.full) c = detail::from_piece(w, CandidateKind::full_wulff, complement, total);
    }
    out.push_back(c);
  }
  return out;
}

inline Candidate candidate_oracle(const Body2& body, const Domain2& domain, double v, const CandidateOptions& opt = {}) {
  Candidate best;
  for (const auto& c : candidate_families(body, domain, v, opt)) detail::keep_best(best, c);
  if (!best.feasible()) fail(ErrorCode::no_feasible_candidate, "no candidate family reaches the requested volume");
  return best;
}

}  // namespace wulffkit
