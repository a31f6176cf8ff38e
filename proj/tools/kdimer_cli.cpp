#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdimer/kdimer.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct RunFlags {
  std::string config;
  std::string recipe;
  std::string out;
  std::string cache;
  int workers = 0;
  bool expensive = false;
  std::string verify = "auto";
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool source_required) {
  auto* cfg = cmd->add_option("--config,-c", f.config, "YAML experiment config")
                  ->check(CLI::ExistingFile);
  auto* rec = cmd->add_option("--recipe,-r", f.recipe, "built-in recipe (stem or figNN)");
  cfg->excludes(rec);
  if (source_required) cmd->require_option(1, 0);
  cmd->add_option("--out,-o", f.out, "output directory (overrides the config)");
  cmd->add_option("--cache", f.cache,
                  "cache directory, 'none' disables (overrides KDIMER_CACHE and the config)");
  cmd->add_option("--workers,-j", f.workers, "worker threads (overrides KDIMER_WORKERS)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--expensive", f.expensive, "merge each document's expensive: block");
  cmd->add_option("--verify-cache", f.verify, "recompute one cache hit and compare bitwise")
      ->check(CLI::IsMember({"auto", "always", "never"}));
}

int exit_code_for(kd_status s) {
  switch (s) {
    case KD_OK: return 0;
    case KD_ERR_NUMERIC:
    case KD_ERR_PRECONDITION: return kExitNumeric;
    case KD_ERR_IO: return kExitIo;
    default: return kExitConfig;
  }
}

int run(const RunFlags& f, const char* only_kind) {
  if (f.config.empty() && f.recipe.empty()) {
    std::cerr << "error: one of --config or --recipe is required\n";
    return kExitConfig;
  }
  kd_run_options opts;
  kd_run_options_init(&opts);
  if (!f.out.empty()) opts.out_dir = f.out.c_str();
  if (!f.cache.empty()) opts.cache_dir = f.cache.c_str();
  opts.workers = f.workers;
  opts.expensive = f.expensive ? 1 : 0;
  opts.verify_cache = f.verify.c_str();
  opts.only_kind = only_kind;

  kd_report* report = nullptr;
  const kd_status s = f.recipe.empty() ? kd_run_config_file(f.config.c_str(), &opts, &report)
                                       : kd_run_recipe(f.recipe.c_str(), &opts, &report);
  if (!report) {
    std::cerr << "error: " << kd_last_error() << "\n";
    return exit_code_for(s);
  }
  for (size_t i = 0; i < kd_report_manifest_count(report); ++i)
    std::cout << "wrote " << kd_report_manifest(report, i) << "\n";
  std::cout << "cache: " << kd_report_cache_hits(report) << " hit(s), "
            << kd_report_cache_misses(report) << " miss(es)\n";
  const int code = kd_report_exit_code(report);
  if (code != 0) std::cerr << "error: " << kd_report_message(report) << "\n";
  kd_report_destroy(report);
  return code;
}

// OpenBLAS picks its kernels when it is loaded, so a bad pick can only be
// overridden by restarting the process with OPENBLAS_CORETYPE set.
void ensure_sane_blas(char** argv) {
  double dev = 0.0;
  if (kd_blas_selfcheck(&dev) != KD_OK || dev < 1e-9) return;
  if (!std::getenv("OPENBLAS_CORETYPE") && !std::getenv("KDIMER_NO_REEXEC")) {
    ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    ::execv("/proc/self/exe", argv);
  }
  std::cerr << "warning: BLAS backend self-check deviates by " << dev
            << "; dense linear algebra will refuse to run\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kicked Bose-Hubbard dimer experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kd_version()));

  const char* kinds[] = {"sweep", "poincare", "husimi", "d2map", "avg-d2",
                         "evolve", "otoc", "entangle", "participation", "orbit-period"};
  std::vector<RunFlags> kind_flags(std::size(kinds));
  std::vector<CLI::App*> kind_cmds;
  for (std::size_t i = 0; i < std::size(kinds); ++i) {
    auto* cmd = app.add_subcommand(kinds[i], std::string("run the ") + kinds[i] +
                                                 " documents of a config or recipe");
    add_run_flags(cmd, kind_flags[i], true);
    kind_cmds.push_back(cmd);
  }

  RunFlags all_flags;
  auto* run_cmd = app.add_subcommand("run", "run every document of a config or recipe");
  add_run_flags(run_cmd, all_flags, true);

  RunFlags recipe_flags;
  std::string show;
  auto* recipes_cmd = app.add_subcommand("recipes", "list, show or run the built-in recipes");
  recipes_cmd->add_option("--run", recipe_flags.recipe, "run this recipe");
  recipes_cmd->add_option("--show", show, "print this recipe's YAML");
  recipes_cmd->add_option("--out,-o", recipe_flags.out, "output directory");
  recipes_cmd->add_option("--cache", recipe_flags.cache, "cache directory");
  recipes_cmd->add_option("--workers,-j", recipe_flags.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  recipes_cmd->add_flag("--expensive", recipe_flags.expensive, "use the expensive variant");
  recipes_cmd->add_option("--verify-cache", recipe_flags.verify, "auto, always or never")
      ->check(CLI::IsMember({"auto", "always", "never"}));

  std::string check_path;
  bool check_expensive = false;
  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a config");
  validate_cmd->add_option("config", check_path, "YAML config")->required()->check(CLI::ExistingFile);
  validate_cmd->add_flag("--expensive", check_expensive, "validate the expensive variant");

  auto* cache_cmd = app.add_subcommand("cache", "inspect or trim the result cache");
  cache_cmd->require_subcommand(1);
  std::string cache_dir;
  std::uint64_t max_bytes = 0;
  auto* gc_cmd = cache_cmd->add_subcommand("gc", "delete least recently written records");
  gc_cmd->add_option("--max-bytes", max_bytes, "size budget, e.g. 500000000 or 2GB")
      ->required()
      ->transform(CLI::AsSizeValue(false));
  gc_cmd->add_option("--cache", cache_dir, "cache directory");
  auto* path_cmd = cache_cmd->add_subcommand("path", "print the resolved cache directory");
  path_cmd->add_option("--cache", cache_dir, "cache directory");

  auto* selfcheck_cmd = app.add_subcommand("selfcheck", "probe the BLAS/LAPACK backend");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*selfcheck_cmd) {
    double dev = 0.0;
    if (kd_blas_selfcheck(&dev) != KD_OK) {
      std::cerr << "error: " << kd_last_error() << "\n";
      return kExitNumeric;
    }
    const char* core = std::getenv("OPENBLAS_CORETYPE");
    std::cout << "backend deviation " << dev << " (OPENBLAS_CORETYPE="
              << (core ? core : "unset") << "): " << (dev < 1e-9 ? "ok" : "BROKEN") << "\n";
    return dev < 1e-9 ? 0 : kExitNumeric;
  }

  if (*validate_cmd) {
    std::ifstream in(check_path);
    std::stringstream text;
    text << in.rdbuf();
    size_t docs = 0;
    if (kd_config_check(text.str().c_str(), check_expensive ? 1 : 0, &docs) != KD_OK) {
      std::cerr << check_path << ": " << kd_last_error() << "\n";
      return kExitConfig;
    }
    std::cout << check_path << ": " << docs << " document(s) ok\n";
    return 0;
  }

  if (*cache_cmd) {
    char buf[4096];
    size_t needed = 0;
    if (kd_cache_dir(cache_dir.empty() ? nullptr : cache_dir.c_str(), buf, sizeof buf, &needed) !=
        KD_OK) {
      std::cerr << "error: " << kd_last_error() << "\n";
      return kExitConfig;
    }
    if (*path_cmd) {
      std::cout << buf << "\n";
      return 0;
    }
    kd_gc_report r{};
    const kd_status s = kd_cache_gc(buf, max_bytes, &r);
    if (s != KD_OK) {
      std::cerr << "error: " << kd_last_error() << "\n";
      return exit_code_for(s);
    }
    std::cout << buf << ": removed " << r.removed << " record(s), freed " << r.freed_bytes
              << " bytes; " << r.remaining_entries << " record(s), " << r.remaining_bytes
              << " bytes remain\n";
    return 0;
  }

  if (*recipes_cmd) {
    if (!show.empty()) {
      size_t idx = 0;
      if (kd_recipe_find(show.c_str(), &idx) != KD_OK) {
        std::cerr << "error: " << kd_last_error() << "\n";
        return kExitConfig;
      }
      std::cout << kd_recipe_text(idx);
      return 0;
    }
    if (recipe_flags.recipe.empty()) {
      const auto field = [](size_t i, const char* f) {
        const char* v = kd_recipe_field(i, f);
        return v ? v : "";
      };
      std::printf("%-22s %-8s %-16s %-20s %-27s %s\n", "recipe", "figure", "reference J",
                  "desk J", "runtime", "summary");
      for (size_t i = 0; i < kd_recipe_count(); ++i)
        std::printf("%-22s %-8s %-16s %-20s %-27s %s\n", kd_recipe_name(i), field(i, "figure"),
                    field(i, "reference_j"), field(i, "desk_j"), field(i, "runtime"),
                    field(i, "summary"));
      return 0;
    }
    ensure_sane_blas(argv);
    return run(recipe_flags, nullptr);
  }

  ensure_sane_blas(argv);
  if (*run_cmd) return run(all_flags, nullptr);
  for (std::size_t i = 0; i < kind_cmds.size(); ++i)
    if (*kind_cmds[i]) return run(kind_flags[i], kinds[i]);
  return kExitConfig;
}
