// attenua: run damped-wave scenarios and write CSV/JSON/SVG artifacts.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "attenua/config.hpp"
#include "attenua/parallel.hpp"
#include "attenua/scenario.hpp"

namespace fs = std::filesystem;
using namespace attenua;

namespace {

void print_summary(const RunManifest& m) {
  for (const auto& v : m.verdicts) std::cout << m.name << "  " << to_string(v.status) << "  " << v.name << "\n";
  if (m.error) std::cout << m.name << "  ERROR  " << *m.error << "\n";
  std::cout << m.name << "  " << (m.passed() ? "passed" : "failed") << " in " << m.wall_time_s << " s\n";
}

// Parses and runs one config; a config that fails to load still gets a manifest.
RunManifest run_one(const std::string& ref, const RunOptions& opt, bool gcc_only) {
  ScenarioConfig cfg;
  try {
    cfg = resolve_config(ref);
  } catch (const Error& e) {
    return failed_manifest(fs::path(ref).stem().string(), e, opt);
  }
  if (gcc_only) cfg.kind = ScenarioKind::Gcc;
  return run_scenario(cfg, opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped wave equation decay lab"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  int threads = 0;
  std::optional<std::uint64_t> seed;
  app.add_option("--out", out_dir, "output directory (ATTENUA_OUT overrides)");
  app.add_option("--threads", threads, "worker threads for stencil kernels (0: hardware)");
  app.add_option("--seed", seed, "override the config seed");

  std::string run_ref, gcc_ref, suite_dir;
  std::optional<std::string> list_dir;
  auto* run = app.add_subcommand("run", "run one scenario (INI path or builtin name)");
  run->add_option("config", run_ref)->required();
  auto* gcc = app.add_subcommand("gcc", "check the geometric control condition for a scenario");
  gcc->add_option("config", gcc_ref)->required();
  auto* suite = app.add_subcommand("suite", "run every *.ini in a directory");
  suite->add_option("dir", suite_dir)->required();
  auto* list = app.add_subcommand("list", "list builtin scenarios (plus *.ini names in dir)");
  list->add_option("dir", list_dir);

  CLI11_PARSE(app, argc, argv);

  if (const char* env = std::getenv("ATTENUA_OUT"); env && *env) out_dir = env;
  if (threads > 0) set_thread_count(threads);
  RunOptions opt;
  opt.out_dir = out_dir;
  opt.seed = seed;

  try {
    if (*list) {
      for (const auto& name : list_scenarios(list_dir ? std::optional<fs::path>(*list_dir) : std::nullopt))
        std::cout << name << "\n";
      return 0;
    }
    if (*run || *gcc) {
      const auto m = run_one(*run ? run_ref : gcc_ref, opt, static_cast<bool>(*gcc));
      print_summary(m);
      if (m.gcc) std::cout << to_json(*m.gcc).dump(2) << "\n";
      return m.passed() ? 0 : 1;
    }
    if (*suite) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(suite_dir))
        if (e.is_regular_file() && e.path().extension() == ".ini") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "no *.ini files in " << suite_dir << "\n";
        return 1;
      }
      bool all = true;
      for (const auto& f : files) {
        const auto m = run_one(f.string(), opt, false);
        print_summary(m);
        all = all && m.passed();
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
