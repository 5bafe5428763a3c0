#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "wulffkit/io/commands.hpp"

namespace fs = std::filesystem;
using namespace wulffkit;
using namespace wulffkit::io;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wulffkit_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunOutcome run_quiet(const RunConfig& cfg, std::string* err = nullptr) {
  std::ostringstream o, e;
  auto r = run(cfg, o, e);
  if (err) *err = e.str();
  return r;
}

std::string schema_message(const json& body) {
  try {
    parse_body<2>(body);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::schema_error);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Schema, DiagnosticsNameTheField) {
  EXPECT_NE(schema_message({{"kind", "ball"}, {"radius", -1}}).find("body.radius"), std::string::npos);
  EXPECT_NE(schema_message({{"kind", "ball"}, {"colour", "red"}}).find("body.colour: unknown field"), std::string::npos);
  EXPECT_NE(schema_message({{"kind", "cube"}}).find("body.kind"), std::string::npos);
  EXPECT_NE(schema_message({{"kind", "ellipsoid"}, {"diag", {1, -2}}}).find("body.diag"), std::string::npos);
  try {
    parse_domain<2>({{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1}}}}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("domain.vertices[2]"), std::string::npos);
  }
}

TEST(Schema, BodyRoundTripIsBitFaithful) {
  const json src{{"dim", 2}, {"kind", "fourier2d"}, {"a0", 2.0}, {"cos", {0.1 + 0.2, 0.3}}, {"sin", {1.0 / 3.0, 0}}};
  const Body2 k = parse_body<2>(src);
  const Body2 back = parse_body<2>(json::parse(body_to_json(k).dump()));
  EXPECT_EQ(back.a0(), 2.0);
  EXPECT_EQ(back.cos_coeffs()[0], 0.1 + 0.2);
  EXPECT_EQ(back.sin_coeffs()[0], 1.0 / 3.0);
  EXPECT_EQ(body_to_json(back).dump(), body_to_json(k).dump());

  const Body3 e = parse_body<3>({{"kind", "ellipsoid"}, {"matrix", {{4, 0.5, 0}, {0.5, 2, 0}, {0, 0, 1.0 / 7}}}});
  const Body3 e2 = parse_body<3>(json::parse(body_to_json(e).dump()));
  EXPECT_EQ((e.matrix() - e2.matrix()).norm(), 0.0);
}

TEST(Schema, LegacyFourierKindAndDimension) {
  EXPECT_EQ(body_dimension({{"kind", "fourier"}, {"a0", 1}}, "body"), 2);
  EXPECT_EQ(body_dimension({{"kind", "ball"}, {"dim", 3}}, "body"), 3);
  EXPECT_EQ(body_dimension({{"kind", "ellipsoid"}, {"diag", {1, 2, 3}}}, "body"), 3);
  EXPECT_THROW(parse_body<3>({{"kind", "ball"}}), Error);
}

TEST(Output, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 2.0, 1e-300, -6.02214076e23, 0.560499})
    EXPECT_EQ(std::strtod(fmt(x).c_str(), nullptr), x) << fmt(x);
  EXPECT_EQ(fmt(0.5), "0.5");
}

TEST(Output, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Tolerances, UnknownNamesAreRejected) {
  EXPECT_THROW(Tolerances(battery_tolerance_defaults(), {{"c9.nothing", 1.0}}), Error);
  const Tolerances t(battery_tolerance_defaults(), {{"c5.value", 0.5}});
  EXPECT_EQ(t("c5.value"), 0.5);
  EXPECT_EQ(t("c5.symmetry"), 1e-3);
}

TEST(Run, ExitCodes) {
  const auto dir = scratch("exit");
  RunConfig cfg;
  cfg.command = "body";
  cfg.output_dir = dir;
  cfg.scene = {{"body", {{"dim", 2}, {"kind", "ellipsoid"}, {"diag", {4, 1}}}}};
  EXPECT_EQ(run_quiet(cfg).exit_code, 0);

  cfg.tolerances = {{"body.area_identity", 1e-30}};
  EXPECT_EQ(run_quiet(cfg).exit_code, 1);

  cfg.tolerances = {{"c1.trace_gap", 1.0}};
  EXPECT_EQ(run_quiet(cfg).exit_code, 2);

  cfg.tolerances.clear();
  cfg.scene = {{"body", {{"kind", "ball"}, {"radius", -1}}}};
  std::string err;
  EXPECT_EQ(run_quiet(cfg, &err).exit_code, 2);
  EXPECT_NE(err.find("body.radius"), std::string::npos);

  cfg.command = "variation";
  cfg.scene = {{"body", {{"kind", "ball"}}}, {"surface", {{"kind", "wulff"}}}, {"omega", {{"kind", "constant"}}}, {"extra", 1}};
  EXPECT_EQ(run_quiet(cfg).exit_code, 2);
}

TEST(Run, WulffDilation) {
  const auto dir = scratch("dilation");
  RunConfig cfg;
  cfg.command = "variation";
  cfg.output_dir = dir;
  cfg.scene = {{"body", {{"kind", "ball"}, {"radius", 1}}},
               {"surface", {{"kind", "wulff"}}},
               {"omega", {{"kind", "constant"}, {"params", {{"value", 1}}}}}};
  ASSERT_EQ(run_quiet(cfg).exit_code, 0);
  const json j = json::parse(read_file(dir / "variation.json"));
  EXPECT_NEAR(j["report"]["a_prime_analytic"].get<double>(), 2 * kPi, 1e-12);
  EXPECT_NEAR(j["report"]["a_prime_fd"]["value"].get<double>(), 2 * kPi, 1e-8);
  EXPECT_NEAR(j["report"]["a_second_analytic"].get<double>(), 0.0, 1e-12);
}

TEST(Run, SeedIsRecordedInEveryArtifact) {
  const std::string seed = "18446744073709551557";
  for (const std::string command : {"body", "variation", "profile"}) {
    const auto dir = scratch("seed_" + command);
    RunConfig cfg;
    cfg.command = command;
    cfg.output_dir = dir;
    cfg.use_cache = false;
    cfg.seed = std::stoull(seed);
    if (command == "body") cfg.scene = {{"body", {{"kind", "ball"}}}};
    if (command == "variation")
      cfg.scene = {{"body", {{"kind", "ball"}}}, {"surface", {{"kind", "circle"}, {"radius", 2}}}, {"omega", {{"kind", "constant"}}}};
    if (command == "profile")
      cfg.scene = {{"body", {{"kind", "ball"}}},
                   {"domain", {{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}}},
                   {"grid", 6},
                   {"method", "candidates"}};
    const auto r = run_quiet(cfg);
    ASSERT_EQ(r.exit_code, 0) << command;
    ASSERT_FALSE(r.artifacts.empty());
    for (const auto& a : r.artifacts) EXPECT_NE(read_file(a).find(seed), std::string::npos) << a;
  }
}

TEST(Run, CacheHitIsBitIdentical) {
  const auto cache = scratch("cache_store");
  RunConfig cfg;
  cfg.command = "profile";
  cfg.cache_dir = cache;
  cfg.seed = 11;
  cfg.scene = {{"body", {{"dim", 2}, {"kind", "fourier2d"}, {"a0", 2.0}, {"cos", {0, 0.3}}}},
               {"domain", {{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}}},
               {"grid", 8},
               {"volumes", {0.1}},
               {"method", "candidates"}};
  const auto dir_a = scratch("cache_a");
  cfg.output_dir = dir_a;
  const auto first = run_quiet(cfg);
  ASSERT_EQ(first.exit_code, 0);
  EXPECT_EQ(first.cache_hit, std::optional<bool>(false));

  cfg.output_dir = scratch("cache_b");
  const auto second = run_quiet(cfg);
  EXPECT_EQ(second.cache_hit, std::optional<bool>(true));
  for (const char* name : {"profile.csv", "reports.json", "profile.svg"})
    EXPECT_EQ(read_file(dir_a / name), read_file(cfg.output_dir / name)) << name;

  cfg.output_dir = scratch("cache_c");
  cfg.use_cache = false;
  const auto fresh = run_quiet(cfg);
  EXPECT_FALSE(fresh.cache_hit.has_value());
  EXPECT_EQ(read_file(cfg.output_dir / "profile.csv"), read_file(dir_a / "profile.csv"));

  cfg.use_cache = true;
  cfg.seed = 12;
  cfg.output_dir = scratch("cache_d");
  EXPECT_EQ(run_quiet(cfg).cache_hit, std::optional<bool>(false));
}

TEST(Run, ConeProfileAndComparisonColumns) {
  RunConfig cfg;
  cfg.command = "profile";
  cfg.use_cache = false;
  cfg.output_dir = scratch("cone");
  cfg.scene = {{"body", {{"kind", "ball"}}}, {"domain", {{"kind", "cone"}, {"normals", {{1, 0}, {0, 1}}}}}, {"grid", 6}};
  ASSERT_EQ(run_quiet(cfg).exit_code, 0);
  const std::string csv = read_file(cfg.output_dir / "profile.csv");
  EXPECT_NE(csv.find("\nv,I,psi,method,descriptor\n"), std::string::npos);
  EXPECT_NE(csv.find("analytic_cone"), std::string::npos);

  cfg.command = "compare";
  cfg.output_dir = scratch("compare");
  cfg.scene = {{"body", {{"dim", 2}, {"kind", "ellipsoid"}, {"diag", {4, 1}}}},
               {"domain", {{"kind", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}}},
               {"grid", 6},
               {"method", "candidates"}};
  ASSERT_EQ(run_quiet(cfg).exit_code, 0);
  const std::string cmp = read_file(cfg.output_dir / "compare.csv");
  EXPECT_NE(cmp.find("v,I_K,I_euclidean,alpha_I_euclidean,beta_I_euclidean,corner_bound,halfspace_bound"), std::string::npos);
  const json j = json::parse(read_file(cfg.output_dir / "compare.json"));
  EXPECT_NEAR(j["alpha"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(j["beta"].get<double>(), 2.0, 1e-6);
  for (const auto& v : j["verdicts"]) {
    EXPECT_TRUE(v.contains("source"));
    EXPECT_TRUE(v["pass"].get<bool>()) << v.dump();
  }
}

TEST(Battery, StationaryDiskArcForTheBall) {
  // isotropic case: the arc of radius r centred at d meets the unit circle
  // orthogonally exactly when d^2 = 1 + r^2
  const double r = 0.5;
  const Curve s = scenes::stationary_disk_arc(Body2::ball(1), r);
  const Vec2 a = start_point(s);
  const Vec2 centre = a - r * unit_dir(s.lo()[0]);
  EXPECT_NEAR(centre.norm(), std::sqrt(1 + r * r), 1e-10);
  EXPECT_LT(stationarity_residual(s, Body2::ball(1), Domain2::disk(Vec2::Zero(), 1.0)).contact_dev, 1e-10);
}

TEST(Battery, TightenedToleranceFails) {
  const Tolerances loose(battery_tolerance_defaults());
  const Tolerances tight(battery_tolerance_defaults(), {{"c1.area_identity", 1e-30}});
  EXPECT_TRUE(criterion_wulff_identities(loose).pass());
  const auto r = criterion_wulff_identities(tight);
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(std::count_if(r.checks.begin(), r.checks.end(), [](const Verdict& v) { return !v.pass; }), 1);
}
