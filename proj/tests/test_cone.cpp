#include <gtest/gtest.h>

#include <cmath>

#include "wulffkit/cone.hpp"

using namespace wulffkit;

namespace {

Body2 cos2_body() { return Body2::fourier(2.0, {0.0, 0.3}, {0.0, 0.0}); }
Body2 lopsided_body() { return Body2::fourier(2.0, {0.2, 0.3}, {0.0, 0.0}); }
Body2 ellipse41() { return Body2::ellipsoid((Mat<2>() << 4, 0, 0, 1).finished()); }

Domain2 quarter_plane() { return Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)}); }

Domain2 wedge(double a, double b) {
  // the cone between polar angles a < b, with b - a < pi
  return Domain2::polyhedral_cone({unit_perp(a), -unit_perp(b)});
}

// Sector of an axis-aligned ellipse with semi-axes (p, q) between two polar angles.
double ellipse_sector(double p, double q, double a, double b) {
  auto f = [&](double t) { return std::atan2(p * std::sin(t), q * std::cos(t)); };
  double d = f(b) - f(a);
  while (d < 0) d += kTwoPi;
  return 0.5 * p * q * d;
}

}  // namespace

TEST(ConeVolume, BallQuarterPlane) {
  const auto v = cone_body_volume(Body2::ball(1), quarter_plane());
  EXPECT_NEAR(v.value, kPi / 4, 1e-13);
  EXPECT_NEAR(wulff_cone_perimeter(Body2::ball(1), quarter_plane()).value, kPi / 2, 1e-12);
}

TEST(ConeVolume, HalfPlaneOfEllipse) {
  const auto h = Domain2::half_space(Vec2(0, 1));
  EXPECT_NEAR(cone_body_volume(ellipse41(), h).value, kPi, 1e-12);
  EXPECT_NEAR(cone_body_volume(Body2::ball(1), h).value, kPi / 2, 1e-13);
}

TEST(ConeVolume, EllipseWedgeMatchesSectorFormula) {
  for (auto [a, b] : {std::pair{0.3, 1.4}, std::pair{-0.5, 2.0}, std::pair{2.0, 4.0}}) {
    const auto v = cone_body_volume(ellipse41(), wedge(a, b));
    EXPECT_NEAR(v.value, ellipse_sector(2.0, 1.0, a, b), 1e-11) << a << " " << b;
  }
}

TEST(ConeVolume, OppositeHalfPlanesSumToBody) {
  const Body2 k = lopsided_body();
  for (double a : {0.0, 0.7, 2.5}) {
    const Vec2 n = unit_dir(a);
    const double sum = cone_body_volume(k, Domain2::half_space(n)).value +
                       cone_body_volume(k, Domain2::half_space(Vec2(-n))).value;
    EXPECT_NEAR(sum, k.volume(), 1e-11);
  }
}

TEST(ConeVolume, PerimeterIdentityInThePlane) {
  for (const Body2& k : {cos2_body(), lopsided_body(), ellipse41()}) {
    for (const Domain2& c : {quarter_plane(), wedge(0.4, 2.9), Domain2::half_space(Vec2(1, -1))}) {
      const double v = cone_body_volume(k, c).value;
      EXPECT_NEAR(wulff_cone_perimeter(k, c).value, 2 * v, 1e-10);
    }
  }
}

TEST(ConeVolume, TranslatedConeUsesItsApex) {
  const auto c = Domain2::polyhedral_cone({Vec2(1, 0), Vec2(0, 1)}, Vec2(3, -2));
  EXPECT_NEAR(cone_body_volume(Body2::ball(1), cone_at_origin(c)).value, kPi / 4, 1e-13);
}

TEST(ConeVolume, OctantByMonteCarlo) {
  const auto oct = Domain3::polyhedral_cone({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
  const auto v = cone_body_volume(Body3::ball(1), oct, 7);
  EXPECT_EQ(v.samples, 1000000u);
  EXPECT_LE(v.sigma, 1e-3 * v.value);
  // octant faces fall on strata edges, so the estimate is exact up to rounding
  EXPECT_NEAR(v.value, kPi / 6, std::max(1e-12, 3 * v.sigma));
  const auto p = wulff_cone_perimeter(Body3::ball(1), oct, 7);
  EXPECT_NEAR(p.value, kPi / 2, std::max(1e-6, 3 * p.sigma));
}

TEST(ConeVolume, EllipsoidOctantIsAnEighth) {
  const Body3 k = Body3::ellipsoid(Vec3(4, 2, 1).asDiagonal());
  const auto oct = Domain3::polyhedral_cone({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)});
  const auto v = cone_body_volume(k, oct, 11);
  EXPECT_NEAR(v.value, 4.0 / 3.0 * kPi * 2 * std::sqrt(2.0) / 8, 3 * v.sigma);
  const auto p = wulff_cone_perimeter(k, oct, 12);
  EXPECT_NEAR(p.value, 3 * v.value, std::max(1e-6, 3 * std::hypot(p.sigma, 3 * v.sigma)));
}

TEST(ConeVolume, MonteCarloIsDeterministicPerSeed) {
  const auto h = Domain3::half_space(Vec3(1, 2, 3));
  const Body3 k = Body3::ellipsoid(Vec3(4, 2, 1).asDiagonal());
  const double a = cone_body_volume(k, h, 5).value;
  EXPECT_EQ(a, cone_body_volume(k, h, 5).value);
  EXPECT_NE(a, cone_body_volume(k, h, 6).value);
}

TEST(ConeProfile, SquareCornerBall) {
  for (double v : {0.01, 0.1, 0.3}) {
    EXPECT_NEAR(cone_profile(Body2::ball(1), quarter_plane(), v), std::sqrt(kPi * v), 1e-10);
    EXPECT_NEAR(cone_profile(Body2::ball(1), Domain2::half_space(Vec2(0, 1)), v), std::sqrt(2 * kPi * v), 1e-10);
  }
}

TEST(ConeProfile, Homogeneity) {
  const Body2 k = lopsided_body();
  const double base = cone_profile(k, wedge(0.2, 1.9), 0.7);
  for (double t : {0.5, 2.0, 3.3}) EXPECT_NEAR(cone_profile(k, wedge(0.2, 1.9), t * t * 0.7), t * base, 1e-10 * t);
  const double v3 = cone_profile_from_volume(3, 0.4, 0.2);
  EXPECT_NEAR(cone_profile_from_volume(3, 0.4, 8 * 0.2), 4 * v3, 1e-12);
}

TEST(ConeProfile, Errors) {
  EXPECT_THROW(cone_profile(Body2::ball(1), quarter_plane(), -1.0), Error);
  EXPECT_THROW(cone_body_volume(Body2::ball(1), Domain2::disk(Vec2::Zero(), 1)), Error);
}
