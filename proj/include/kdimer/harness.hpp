#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kdimer/floquet.hpp"
#include "kdimer/phase_space.hpp"

namespace kdimer {

enum class ExperimentKind {
  Sweep,
  Poincare,
  Husimi,
  D2Map,
  AvgD2,
  Evolve,
  Otoc,
  Entangle,
  Participation,
  OrbitPeriod,
};

const char* kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string& name);

struct InitialState {
  std::string label;
  int site = 0;  // 1 or 2 selects a product state; 0 means coherent (theta, phi)
  double theta = 0.0;
  double phi = 0.0;
};

struct RecipeInfo {
  std::string figure;
  std::string reference_j;
  std::string runtime;
  std::string summary;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Sweep;
  std::string name;
  FloquetSpec spec;

  int n_theta = 0;
  int n_phi = 0;
  double q = 2.0;

  std::vector<double> sweep_k;
  std::vector<double> sweep_mu;
  std::vector<double> k_list;
  std::vector<int> two_j_list;

  int classical_kicks = 400;
  double dt = 1e-3;
  int kicks = 200;
  std::vector<InitialState> states;

  std::vector<int> eigen_indices;
  int random_count = 0;
  std::uint64_t random_seed = 0;
  std::vector<int> snapshots;

  int s = 2;
  int fit_min_window = 5;

  int orbit_period = 0;  // 0: detect only, no refinement
  int max_period = 8;
  double orbit_tol = 1e-6;

  std::string output_dir;
  std::string cache_dir;
  int workers = 0;
  bool expensive = false;

  std::optional<RecipeInfo> recipe;
  int document = 0;  // index inside a multi-document file

  // Canonical JSON of every field that influences the numbers. Paths and the
  // worker count are left out so that snapshots compare equal across machines.
  std::string snapshot_json() const;
};

// Parses every YAML document of `text`. With `expensive`, each document's
// `expensive:` mapping is merged over it first. Throws ConfigError carrying
// the 1-based line of the offending node.
std::vector<ExperimentConfig> parse_configs(const std::string& text, bool expensive);

// Field-level checks against the module preconditions; ConfigError names the field.
void validate_config(const ExperimentConfig& config);

// Content-addressed store of eigendecompositions, eigenphase lists and D_q
// maps. Records are written atomically; a record that fails to parse or does
// not match its spec is treated as a miss and overwritten.
class ResultCache {
 public:
  struct Entry {
    std::string key;
    std::string kind;
    FloquetSpec spec;
    std::string detail;  // grid shape for maps
    bool hit = false;
  };

  // An empty directory disables persistence (every request computes).
  explicit ResultCache(std::filesystem::path dir);

  EigenSystem eigensystem(const FloquetSpec& spec);
  RVector eigenphases(const FloquetSpec& spec);
  PhaseGrid dq_map(const FloquetSpec& spec, int n_theta, int n_phi, double q, int workers);

  std::vector<Entry> entries() const;  // sorted by key, one per distinct key
  const std::filesystem::path& dir() const { return dir_; }

  // Recomputes the entry and compares it bitwise with the stored record.
  bool matches_recomputation(const Entry& entry, int workers) const;

 private:
  void record(Entry entry);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

struct GcReport {
  int removed = 0;
  std::uintmax_t freed_bytes = 0;
  std::uintmax_t remaining_bytes = 0;
  int remaining_entries = 0;
};

// Deletes least recently modified records until the total size is at most
// `max_bytes`.
GcReport cache_gc(const std::filesystem::path& dir, std::uintmax_t max_bytes);

struct RunOptions {
  std::string out_dir;    // overrides the config
  std::string cache_dir;  // overrides KDIMER_CACHE and the config
  int workers = 0;        // > 0 overrides KDIMER_WORKERS and the config
  bool expensive = false;
  std::string verify_cache = "auto";  // auto | always | never
  std::optional<ExperimentKind> only_kind;
};

enum class RunStatus { Ok = 0, ConfigFailure = 2, NumericFailure = 3, IoFailure = 4 };

struct RunOutcome {
  RunStatus status = RunStatus::Ok;
  std::string message;
  std::vector<std::string> manifests;
  int cache_hits = 0;
  int cache_misses = 0;
};

RunOutcome run_config_text(const std::string& text, const RunOptions& options);
RunOutcome run_config_file(const std::string& path, const RunOptions& options);
RunOutcome run_recipe(const std::string& name, const RunOptions& options);

struct Recipe {
  std::string name;  // file stem, e.g. fig02_mean_r_vs_k
  std::string text;  // YAML source
};

const std::vector<Recipe>& recipe_catalog();
// Accepts the full stem or its figure prefix ("fig02", "fig2").
const Recipe* find_recipe(const std::string& name);

// Resolved cache directory: explicit > KDIMER_CACHE > config > default.
std::filesystem::path resolve_cache_dir(const std::string& explicit_dir,
                                        const std::string& config_dir);

}  // namespace kdimer
