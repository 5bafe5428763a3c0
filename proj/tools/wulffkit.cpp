#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "wulffkit/io/commands.hpp"

namespace {

using namespace wulffkit;
using namespace wulffkit::io;

struct Flags {
  std::string scene;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::vector<std::string> tol;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool no_cache = false;
};

void add_flags(CLI::App* sub, Flags& f, bool scene_required) {
  auto* s = sub->add_option("--scene", f.scene, "scene JSON file");
  if (scene_required) s->required();
  sub->add_option("--seed", f.seed, "64-bit seed, recorded in every artifact");
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--tol", f.tol, "tolerance override NAME=VALUE (repeatable)");
  sub->add_option("--jobs", f.jobs, "worker threads")->capture_default_str();
  sub->add_flag("--no-cache", f.no_cache, "ignore and do not update the run cache");
}

std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& t : items) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::schema_error, "--tol " + t + ": expected NAME=VALUE");
    const std::string value = t.substr(eq + 1);
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || !(x >= 0) || !std::isfinite(x))
      fail(ErrorCode::schema_error, "--tol " + t + ": value must be a non-negative number");
    out[t.substr(0, eq)] = x;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic isoperimetry toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Flags flags;
  const std::map<std::string, std::string> help{
      {"body", "check Wulff identities for a convex body"},
      {"surface", "per-node anisotropic frames of a surface"},
      {"variation", "first and second variation against finite differences"},
      {"profile", "isoperimetric profile with concavity, comparison and structure reports"},
      {"compare", "profile next to the Euclidean profile, with sandwich bounds"},
      {"suite", "run the full validation battery"}};
  for (const auto& name : command_names()) add_flags(app.add_subcommand(name, help.at(name)), flags, name != "suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.output_dir = flags.out;
  cfg.seed = flags.seed;
  cfg.jobs = flags.jobs;
  cfg.use_cache = !flags.no_cache;
  try {
    cfg.tolerances = parse_tolerances(flags.tol);
    if (!flags.scene.empty()) {
      try {
        cfg.scene = json::parse(read_file(flags.scene));
      } catch (const json::parse_error& e) {
        fail(ErrorCode::schema_error, flags.scene + ": " + e.what());
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const RunOutcome r = run(cfg);
  if (r.cache_hit) std::cerr << (*r.cache_hit ? "cache: hit\n" : "cache: stored\n");
  for (const auto& a : r.artifacts) std::cerr << "wrote " << a.string() << "\n";
  return r.exit_code;
}
