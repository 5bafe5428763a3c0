#include <gtest/gtest.h>

#include <cmath>

#include "wulffkit/profile.hpp"

using namespace wulffkit;

namespace {

Body2 ellipse41() { return Body2::ellipsoid((Mat<2>() << 4, 0, 0, 1).finished()); }
Body2 cos2_body() { return Body2::fourier(2.0, {0.0, 0.3}, {0.0, 0.0}); }
Body2 lopsided_body() { return Body2::fourier(2.0, {0.2, 0.3}, {0.0, 0.0}); }
Domain2 unit_square() { return Domain2::polygon({Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}); }

Domain2 fine_polygon_disk(int m) {
  std::vector<Vec2> v;
  for (int k = 0; k < m; ++k) v.push_back(unit_dir(kTwoPi * k / m));
  return Domain2::polygon(v);
}

CandidateOptions quick() {
  CandidateOptions o;
  o.edge_grid = 5;
  o.chord_directions = 90;
  o.disk_grid = 8;
  return o;
}

}  // namespace

TEST(Clip, BallAtSquareCorner) {
  const WulffPiece w = clip_wulff(Body2::ball(1), unit_square(), Vec2(0, 0), 0.3);
  EXPECT_NEAR(w.area, kPi * 0.09 / 4, 1e-13);
  EXPECT_NEAR(w.outer_length, kPi * 0.3 / 2, 1e-13);
  ASSERT_EQ(w.arcs.size(), 1u);
  EXPECT_NEAR(w.arcs[0].t0, 0.0, 1e-12);
  EXPECT_NEAR(w.arcs[0].t1, kPi / 2, 1e-12);
}

TEST(Clip, HalfDiskOnAnEdge) {
  const WulffPiece w = clip_wulff(Body2::ball(1), unit_square(), Vec2(0.5, 0), 0.2);
  EXPECT_NEAR(w.area, kPi * 0.04 / 2, 1e-13);
  EXPECT_NEAR(w.outer_length, kPi * 0.2, 1e-13);
}

TEST(Clip, FullShapeInside) {
  const Body2 k = lopsided_body();
  const WulffPiece w = clip_wulff(k, unit_square(), Vec2(0.5, 0.5), 0.1);
  EXPECT_TRUE(w.full);
  EXPECT_NEAR(w.area, 0.01 * k.volume(), 1e-13);
  EXPECT_NEAR(w.outer_length, 2 * 0.01 * k.volume() / 0.1, 1e-12);
}

TEST(Clip, CornerPieceMatchesConeVolume) {
  for (const Body2& k : {ellipse41(), cos2_body(), lopsided_body()}) {
    const double lambda = 0.05;  // small enough to touch only the two corner edges
    const WulffPiece w = clip_wulff(k, unit_square(), Vec2(1, 0), lambda);
    const double theta = cone_body_volume(k, vertex_cone(unit_square(), 1)).value;
    EXPECT_NEAR(w.area, lambda * lambda * theta, 1e-13);
    EXPECT_NEAR(w.outer_length, 2 * lambda * theta, 1e-12);
  }
}

TEST(Clip, CoveringShapeHasNoFreeCurve) {
  const WulffPiece w = clip_wulff(Body2::ball(1), unit_square(), Vec2(0.5, 0.5), 2.0);
  EXPECT_TRUE(w.covers);
  EXPECT_DOUBLE_EQ(w.area, 1.0);
}

TEST(Chord, SquareAndDisk) {
  const ChordPiece c = chord_for_area(unit_square(), Vec2(1, 0), 0.3);
  EXPECT_NEAR(c.offset, 0.3, 1e-13);
  EXPECT_NEAR(c.length, 1.0, 1e-13);
  // disk against a fine inscribed polygon
  const Domain2 disk = Domain2::disk(Vec2::Zero(), 1.0);
  const Domain2 poly = fine_polygon_disk(20000);
  const Vec2 nu = unit_dir(0.7);
  for (double c0 : {-0.6, 0.1, 0.8}) {
    const ChordPiece a = chord_cut(disk, nu, c0), b = chord_cut(poly, nu, c0);
    EXPECT_NEAR(a.area, b.area, 1e-6);
    EXPECT_NEAR(a.length, b.length, 1e-6);
  }
}

TEST(Clip, InnerParallelOfSquare) {
  const auto poly = inner_parallel(Body2::ball(1), unit_square(), 0.2);
  EXPECT_NEAR(polygon_area(poly), 0.36, 1e-14);
  EXPECT_TRUE(inner_parallel(Body2::ball(1), unit_square(), 0.6).empty());
}

TEST(Candidates, SquareBallCornerAndChord) {
  const Candidate a = candidate_oracle(Body2::ball(1), unit_square(), 0.1);
  EXPECT_NEAR(a.value, std::sqrt(0.1 * kPi), 1e-10);
  EXPECT_EQ(a.kind, CandidateKind::corner_wulff_arc);
  EXPECT_NEAR(a.scale, std::sqrt(0.4 / kPi), 1e-10);
  const Candidate b = candidate_oracle(Body2::ball(1), unit_square(), 0.5);
  EXPECT_NEAR(b.value, 1.0, 1e-10);
  EXPECT_EQ(b.kind, CandidateKind::chord);
}

TEST(Candidates, ReflectionSymmetryForAsymmetricBody) {
  // the point reflection of the square maps E to a set with P_K = P_{-K}(E)
  const Body2 k = lopsided_body();
  for (double v : {0.15, 0.4, 0.8}) {
    const double a = candidate_oracle(k, unit_square(), v, quick()).value;
    EXPECT_NEAR(a, candidate_oracle(k.reflected(), unit_square(), v, quick()).value, 1e-9);
    EXPECT_NEAR(a, candidate_oracle(k, unit_square(), 1 - v, quick()).value, 1e-9);
  }
}

TEST(Candidates, ComplementCurveHasPositiveCurvature) {
  const Candidate c = candidate_oracle(Body2::ball(1), unit_square(), 0.9);
  EXPECT_TRUE(c.complement);
  ASSERT_TRUE(c.mean_curvature);
  EXPECT_NEAR(*c.mean_curvature, 1.0 / std::sqrt(0.4 / kPi), 1e-8);
}

TEST(Candidates, DiskHasNoChordOptimumForSmallArea) {
  const Candidate c = candidate_oracle(Body2::ball(1), Domain2::disk(Vec2::Zero(), 1.0), 0.2, quick());
  EXPECT_EQ(c.kind, CandidateKind::edge_wulff_arc);
  EXPECT_LT(c.value, chord_for_area(Domain2::disk(Vec2::Zero(), 1.0), Vec2(1, 0), 0.2).length);
}

TEST(Candidates, RejectsVolumesOutsideRange) {
  EXPECT_THROW(candidate_oracle(Body2::ball(1), unit_square(), 1.0), Error);
  EXPECT_THROW(candidate_oracle(Body2::ball(1), unit_square(), 0.0), Error);
}

TEST(Optimizer, RecoversQuarterDiskFromFlatArc) {
  // a flattened elliptical arc at the corner, noticeably longer than optimal
  const double v = 0.1;
  std::vector<Vec2> init;
  for (int i = 0; i <= 32; ++i) init.push_back(Vec2(0.5 * std::cos(kPi / 64 * i), 0.25 * std::sin(kPi / 64 * i)));
  OptimizerOptions o;
  o.segments = 32;
  const PolylineResult r = optimize_free_curve(Body2::ball(1), unit_square(), v, init, o);
  ASSERT_TRUE(r.valid());
  EXPECT_NEAR(r.area, v, 1e-12);
  for (const auto& x : r.nodes) EXPECT_GE(unit_square().depth(x), 0.0);
  EXPECT_GE(r.length, std::sqrt(v * kPi) - 1e-12);
  EXPECT_NEAR(r.length, std::sqrt(v * kPi), 2e-3);
}

TEST(Optimizer, InscribedPolylineIsAnUpperBound) {
  const Body2 k = ellipse41();
  const Candidate c = candidate_oracle(k, unit_square(), 0.2);
  const PolylineResult r = optimize_multistart(k, unit_square(), 0.2, {c.free_curve(k, 48)}, 3);
  ASSERT_TRUE(r.valid());
  EXPECT_GE(r.length, c.value - 1e-9);
  EXPECT_LT(r.length, c.value * 1.001);
}

TEST(Profile, SquareBallCandidates) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  const ProfileCurve p = polygon_profile(Body2::ball(1), unit_square(), 21, {0.1, 0.9}, o);
  EXPECT_NEAR(*p.at(0.1), 0.560499, 1e-6);
  EXPECT_NEAR(*p.at(0.5), 1.0, 1e-10);
  EXPECT_NEAR(*p.at(0.9), *p.at(0.1), 1e-12);
  const auto conc = concavity_report(p);
  EXPECT_TRUE(conc.pass);
  EXPECT_EQ(conc.second_differences.size(), 21u);
  const auto cmp = comparison_report(p);
  EXPECT_TRUE(cmp.pass);
  for (double v : cmp.tight_volumes) EXPECT_LE(v, 1 / kPi);
  EXPECT_TRUE(cmp.tight_are_corner_truncations);
  const auto st = structure_checks(p);
  EXPECT_TRUE(st.pass);
  EXPECT_GT(st.subadditivity_margin, 0);
  EXPECT_GT(st.slope_checks, 10);
}

TEST(Profile, SlopeAtQuarterDisk) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  const ProfileCurve p = polygon_profile(Body2::ball(1), unit_square(), 9, {}, o);
  const ProfileSample& s = p.samples.front();  // v = 0.1
  ASSERT_TRUE(s.mean_curvature);
  EXPECT_NEAR(-*s.mean_curvature, (kPi / 2) / std::sqrt(0.1 * kPi), 1e-8);
}

TEST(Profile, CorruptedSampleFailsConcavity) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  ProfileCurve p = polygon_profile(Body2::ball(1), unit_square(), 21, {}, o);
  p.samples[10].value *= 1.05;
  EXPECT_FALSE(concavity_report(p).pass);
}

TEST(Profile, ConeProfileIsExactlyLinearInPsi) {
  std::vector<double> v;
  for (int k = 1; k <= 9; ++k) v.push_back(0.1 * k);
  const ProfileCurve p = cone_profile_curve(lopsided_body(), Domain2::polyhedral_cone({Vec2(1, 0), Vec2(1, 2)}), v);
  const auto r = concavity_report(p);
  EXPECT_TRUE(r.pass);
  for (double d : r.second_differences) EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(Profile, InsufficientSamples) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  const ProfileCurve p = polygon_profile(Body2::ball(1), unit_square(), 3, {}, o);
  try {
    concavity_report(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_samples);
  }
}

TEST(Profile, DiskHalfSpaceBoundIsStrict) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  o.candidates = quick();
  const ProfileCurve p = polygon_profile(Body2::ball(1), Domain2::disk(Vec2::Zero(), 1.0), 5, {}, o);
  const auto r = comparison_report(p);
  EXPECT_TRUE(r.edge_bound_strict);
  EXPECT_GT(r.min_edge_gap, 0);
}

TEST(Profile, SandwichAgainstEuclidean) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  const ProfileCurve e = polygon_profile(Body2::ball(1), unit_square(), 9, {}, o);
  const ProfileCurve p = polygon_profile(ellipse41(), unit_square(), 9, {}, o);
  const auto r = structure_checks(p, &e);
  ASSERT_TRUE(r.sandwich_ok);
  EXPECT_TRUE(*r.sandwich_ok);
}

TEST(Profile, AsymmetricBodySkipsSymmetryChecks) {
  ProfileOptions o;
  o.method = ProfileMethod::candidates;
  o.candidates = quick();
  const ProfileCurve p = polygon_profile(lopsided_body(), unit_square(), 7, {}, o);
  const auto r = structure_checks(p);
  EXPECT_FALSE(r.symmetry_ok.has_value());
  EXPECT_FALSE(r.monotone_first_half.has_value());
  EXPECT_TRUE(concavity_report(p).pass);
}

TEST(Profile, OptimizerRunIsDeterministicAcrossThreads) {
  ProfileOptions o;
  o.seed = 42;
  o.optimizer.starts = 3;
  o.optimizer.segments = 24;
  o.candidates = quick();
  const ProfileCurve a = polygon_profile(cos2_body(), unit_square(), 3, {}, o);
  o.jobs = 3;
  const ProfileCurve b = polygon_profile(cos2_body(), unit_square(), 3, {}, o);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].value, b.samples[i].value);
    EXPECT_EQ(a.samples[i].optimizer_value, b.samples[i].optimizer_value);
  }
}
