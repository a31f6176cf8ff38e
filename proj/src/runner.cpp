#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hash.hpp"
#include "kdimer/classical.hpp"
#include "kdimer/csv.hpp"
#include "kdimer/dynamics.hpp"
#include "kdimer/harness.hpp"
#include "kdimer/parallel.hpp"
#include "kdimer/spectral.hpp"

namespace kdimer {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json spec_json(const FloquetSpec& s) {
  return {{"two_j", s.two_j}, {"k", s.k}, {"mu", s.mu}, {"tau", s.tau}};
}

json state_json(const InitialState& st) {
  if (st.site) return {{"label", st.label}, {"site", st.site}};
  return {{"label", st.label}, {"theta", st.theta}, {"phi", st.phi}};
}

struct Failure {
  std::string where;
  std::string message;
};

class RunContext {
 public:
  RunContext(const ExperimentConfig& cfg, fs::path out_dir, ResultCache& cache, int workers)
      : cfg(cfg), out_dir(std::move(out_dir)), cache(cache), workers(workers) {}

  const ExperimentConfig& cfg;
  fs::path out_dir;
  ResultCache& cache;
  int workers;
  std::vector<Failure> failures;
  json phases = json::object();

  void write_file(const std::string& file, const std::string& content) {
    const fs::path path = out_dir / file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
    outputs_[file] = {{"file", file},
                      {"sha256", detail::sha256_hex(content)},
                      {"bytes", content.size()}};
  }

  // `stem`.csv plus the `stem`.json sidecar describing it.
  void emit(const std::string& stem, const std::string& csv, json meta) {
    write_file(stem + ".csv", csv);
    json sidecar = {{"experiment", kind_name(cfg.kind)},
                    {"name", cfg.name},
                    {"data_file", stem + ".csv"},
                    {"code_version", kCodeVersion}};
    for (auto& [k, v] : meta.items()) sidecar[k] = v;
    write_file(stem + ".json", sidecar.dump(2) + "\n");
  }

  template <typename Fn>
  auto timed(const std::string& phase, Fn&& fn) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      add_time(phase, seconds_since(t0));
    } else {
      auto result = fn();
      add_time(phase, seconds_since(t0));
      return result;
    }
  }

  json outputs() const {
    json list = json::array();
    for (const auto& [file, entry] : outputs_) list.push_back(entry);
    return list;
  }

 private:
  void add_time(const std::string& phase, double s) {
    phases[phase] = phases.value(phase, 0.0) + s;
  }

  std::map<std::string, json> outputs_;
};

std::string series_csv(const RVector& values) {
  std::ostringstream os;
  CsvWriter csv(os);
  csv.header({"t", "value"});
  for (Eigen::Index t = 0; t < values.size(); ++t) {
    csv.field(static_cast<long long>(t)).field(values(t));
    csv.end_row();
  }
  return os.str();
}

std::string grid_csv(const PhaseGrid& g) {
  std::ostringstream os;
  write_phase_grid_csv(os, g);
  return os.str();
}

json grid_json(const PhaseGrid& g) {
  return {{"n_theta", g.n_theta()}, {"n_phi", g.n_phi()}, {"rescaled", g.rescaled},
          {"theta", "midpoints of [0, pi]"}, {"phi", "midpoints of [-pi, pi)"}};
}

CVector initial_vector(const InitialState& st, const SpinBasis& basis,
                       const CoherentStateFactory& factory) {
  if (st.site) return product_state(basis, st.site).amplitudes;
  return factory(st.theta, st.phi).amplitudes;
}

void run_sweep(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const RVector k = Eigen::Map<const RVector>(c.sweep_k.data(), c.sweep_k.size());
  const RVector mu = Eigen::Map<const RVector>(c.sweep_mu.data(), c.sweep_mu.size());
  const SweepResult r = ctx.timed("diagonalize", [&] {
    return sweep_mean_r(k, mu, c.spec.two_j, ctx.workers,
                        [&](const FloquetSpec& s) { return ctx.cache.eigenphases(s); },
                        c.spec.tau);
  });
  for (const auto& e : r.errors) ctx.failures.push_back({"cell", e});
  std::ostringstream os;
  write_sweep_csv(os, r);
  ctx.timed("write", [&] {
    ctx.emit(c.name, os.str(),
             {{"columns", {"k", "mu", "two_j", "mean_r", "n_dropped_ratios"}},
              {"two_j", c.spec.two_j},
              {"tau", c.spec.tau},
              {"k_values", c.sweep_k},
              {"mu_values", c.sweep_mu},
              {"cells", k.size() * mu.size()},
              {"failed_cells", r.errors.size()},
              {"reference_mean_r", {{"poisson", kPoissonMeanR}, {"wigner_dyson", kWignerDysonMeanR}}}});
  });
}

void run_poincare(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const MapParams p{c.spec.k, c.spec.mu, c.spec.tau, c.dt};
  const auto trajs = ctx.timed("integrate", [&] {
    return poincare_section(p, c.n_theta, c.n_phi, c.classical_kicks, ctx.workers);
  });
  double drift = 0.0;
  for (const auto& t : trajs) {
    drift = std::max(drift, t.max_norm_drift);
    const std::string where = "trajectory " + std::to_string(t.id) + " (theta0=" +
                              format_double(t.theta0) + ", phi0=" + format_double(t.phi0) + ")";
    if (!t.error.empty()) ctx.failures.push_back({where, t.error});
    else if (t.max_norm_drift > 1e-10)
      ctx.failures.push_back({where, "norm drift " + format_double(t.max_norm_drift)});
  }
  std::ostringstream os;
  write_trajectories_csv(os, trajs);
  ctx.timed("write", [&] {
    ctx.emit(c.name, os.str(),
             {{"columns", {"traj_id", "step", "theta", "phi", "mx", "my", "mz"}},
              {"seed_grid", {{"n_theta", c.n_theta}, {"n_phi", c.n_phi}}},
              {"kicks", c.classical_kicks},
              {"dt", c.dt},
              {"trajectories", trajs.size()},
              {"max_norm_drift", drift},
              {"map", "flow of H0 for tau, then rotation about z by mu"}});
  });
}

std::vector<int> pick_eigenstates(const ExperimentConfig& c) {
  std::vector<int> picks = c.eigen_indices;
  if (c.random_count > 0) {
    const int dim = c.spec.two_j + 1;
    std::vector<int> pool(dim);
    for (int i = 0; i < dim; ++i) pool[i] = i;
    std::mt19937_64 rng(c.random_seed);
    // partial Fisher-Yates on raw engine output, identical on every platform
    for (int i = 0; i < c.random_count; ++i) {
      const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(dim - i));
      std::swap(pool[i], pool[j]);
      picks.push_back(pool[i]);
    }
  }
  return picks;
}

void run_husimi(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const SpinBasis basis = c.spec.basis();
  const CoherentStateFactory factory(basis);
  const PhaseGrid shape = PhaseGrid::midpoint(c.n_theta, c.n_phi);
  if (c.snapshots.empty()) {
    const EigenSystem es = ctx.timed("diagonalize", [&] { return ctx.cache.eigensystem(c.spec); });
    for (int idx : pick_eigenstates(c)) {
      const PhaseGrid raw = ctx.timed("husimi", [&] {
        return husimi(es.eigenvectors.col(idx), shape, factory, false, ctx.workers);
      });
      const double norm = husimi_norm(raw, basis.dim());
      PhaseGrid scaled = raw;
      const double peak = raw.values.maxCoeff();
      if (peak > 0) scaled.values /= peak;
      scaled.rescaled = true;
      ctx.timed("write", [&] {
        ctx.emit(c.name + "_eig" + std::to_string(idx), grid_csv(scaled),
                 {{"columns", {"theta", "phi", "value"}},
                  {"spec", spec_json(c.spec)},
                  {"eigenstate_index", idx},
                  {"eigenphase", es.eigenphases(idx)},
                  {"grid", grid_json(scaled)},
                  {"norm_quadrature", norm}});
      });
    }
    return;
  }
  const CMatrix u = ctx.timed("build", [&] { return build_floquet(c.spec).matrix; });
  for (const auto& st : c.states) {
    const CVector psi0 = initial_vector(st, basis, factory);
    std::vector<PhaseGrid> snaps;
    try {
      snaps = ctx.timed("husimi", [&] {
        return husimi_snapshots(psi0, u, c.snapshots, shape, factory, ctx.workers);
      });
    } catch (const NumericError& e) {
      ctx.failures.push_back({"state " + st.label, e.what()});
      continue;
    }
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      Eigen::Index pi = 0, pj = 0;
      snaps[i].values.maxCoeff(&pi, &pj);
      ctx.timed("write", [&] {
        ctx.emit(c.name + "_" + st.label + "_t" + std::to_string(c.snapshots[i]),
                 grid_csv(snaps[i]),
                 {{"columns", {"theta", "phi", "value"}},
                  {"spec", spec_json(c.spec)},
                  {"state", state_json(st)},
                  {"t", c.snapshots[i]},
                  {"grid", grid_json(snaps[i])},
                  {"norm_quadrature", husimi_norm(snaps[i], basis.dim())},
                  {"peak", {{"theta", snaps[i].theta(pi)}, {"phi", snaps[i].phi(pj)}}}});
      });
    }
  }
}

double median_of(const RMatrix& m) {
  std::vector<double> v(m.data(), m.data() + m.size());
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

void run_d2map(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const PhaseGrid g = ctx.timed("compute", [&] {
    return ctx.cache.dq_map(c.spec, c.n_theta, c.n_phi, c.q, ctx.workers);
  });
  ctx.timed("write", [&] {
    ctx.emit(c.name, grid_csv(g),
             {{"columns", {"theta", "phi", "value"}},
              {"observable", "D_q"},
              {"q", c.q},
              {"spec", spec_json(c.spec)},
              {"grid", grid_json(g)},
              {"min", g.values.minCoeff()},
              {"max", g.values.maxCoeff()},
              {"median", median_of(g.values)},
              {"average", average_d2(g)}});
  });
}

void run_avg_d2(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const std::vector<int> sizes = c.two_j_list.empty() ? std::vector<int>{c.spec.two_j} : c.two_j_list;
  std::ostringstream os;
  CsvWriter csv(os);
  csv.header({"k", "two_j", "avg_d2"});
  for (int two_j : sizes)
    for (double k : c.k_list) {
      FloquetSpec s = c.spec;
      s.two_j = two_j;
      s.k = k;
      double avg = std::numeric_limits<double>::quiet_NaN();
      try {
        const PhaseGrid g = ctx.timed("compute", [&] {
          return ctx.cache.dq_map(s, c.n_theta, c.n_phi, c.q, ctx.workers);
        });
        avg = average_d2(g);
      } catch (const NumericError& e) {
        ctx.failures.push_back({"cell k=" + format_double(k) + ",two_j=" + std::to_string(two_j),
                                e.what()});
      }
      csv.field(k).field(two_j).field(avg);
      csv.end_row();
    }
  ctx.timed("write", [&] {
    ctx.emit(c.name, os.str(),
             {{"columns", {"k", "two_j", "avg_d2"}},
              {"q", c.q},
              {"mu", c.spec.mu},
              {"tau", c.spec.tau},
              {"grid", {{"n_theta", c.n_theta}, {"n_phi", c.n_phi}}},
              {"quadrature", "midpoint rule with sin(theta) weight"}});
  });
}

void run_time_series(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const bool suffix = !c.two_j_list.empty();
  const std::vector<int> sizes = suffix ? c.two_j_list : std::vector<int>{c.spec.two_j};
  for (int two_j : sizes) {
    FloquetSpec s = c.spec;
    s.two_j = two_j;
    const SpinBasis basis = s.basis();
    const CoherentStateFactory factory(basis);
    CMatrix u;
    EigenSystem es;
    if (c.kind == ExperimentKind::Otoc)
      es = ctx.timed("diagonalize", [&] { return ctx.cache.eigensystem(s); });
    else
      u = ctx.timed("build", [&] { return build_floquet(s).matrix; });
    for (const auto& st : c.states) {
      const std::string stem =
          c.name + "_" + st.label + (suffix ? "_2j" + std::to_string(two_j) : "");
      json meta = {{"columns", {"t", "value"}},
                   {"spec", spec_json(s)},
                   {"J", two_j / 2.0},
                   {"state", state_json(st)},
                   {"kicks", c.kicks}};
      RVector series;
      try {
        const CVector psi0 = initial_vector(st, basis, factory);
        series = ctx.timed("evolve", [&] {
          switch (c.kind) {
            case ExperimentKind::Evolve: return sz_series(psi0, u, basis, c.kicks);
            case ExperimentKind::Otoc: return otoc_series(psi0, es, basis, c.kicks);
            default: return entanglement_series(psi0, u, c.s, c.kicks);
          }
        });
      } catch (const NumericError& e) {
        ctx.failures.push_back({"state " + st.label + " (two_j=" + std::to_string(two_j) + ")",
                                e.what()});
        continue;
      } catch (const PreconditionError& e) {
        ctx.failures.push_back({"state " + st.label + " (two_j=" + std::to_string(two_j) + ")",
                                e.what()});
        continue;
      }
      if (c.kind == ExperimentKind::Evolve) {
        meta["observable"] = "S_z = <Jz>/J";
      } else if (c.kind == ExperimentKind::Otoc) {
        meta["observable"] = "C_zz = -<[Jz(t), Jz]^2>/J^2";
        const GrowthFit f = fit_early_growth(series, c.fit_min_window);
        meta["fit"] = {{"found", f.found},
                       {"t_start", f.t_start},
                       {"length", f.length},
                       {"slope", f.slope},
                       {"intercept", f.intercept},
                       {"r2", f.r2},
                       {"saturation", f.saturation},
                       {"t_half_saturation", f.t_half_saturation}};
      } else {
        meta["observable"] = "S_E = -Tr rho_s ln rho_s";
        meta["s"] = c.s;
      }
      ctx.timed("write", [&] { ctx.emit(stem, series_csv(series), meta); });
    }
  }
}

void run_participation(RunContext& ctx) {
  const auto& c = ctx.cfg;
  std::map<int, EigenSystem> memo;
  const EigenSystemProvider provider = [&](const FloquetSpec& s) {
    auto it = memo.find(s.two_j);
    if (it == memo.end())
      it = memo.emplace(s.two_j, ctx.timed("diagonalize", [&] { return ctx.cache.eigensystem(s); }))
               .first;
    return it->second;
  };
  std::ostringstream os;
  CsvWriter csv(os);
  csv.header({"label", "theta", "phi", "two_j", "dim", "m2"});
  json summary = json::object();
  for (const auto& st : c.states) {
    std::vector<ParticipationRow> rows;
    try {
      rows = participation_scaling(st.theta, st.phi, c.spec, c.two_j_list, provider);
    } catch (const NumericError& e) {
      ctx.failures.push_back({"state " + st.label, e.what()});
      continue;
    }
    std::vector<double> m2;
    bool increasing = true;
    for (const auto& r : rows) {
      csv.field(st.label).field(st.theta).field(st.phi).field(r.two_j).field(r.dim).field(r.m2);
      csv.end_row();
      if (!m2.empty() && !(r.m2 > m2.back())) increasing = false;
      m2.push_back(r.m2);
    }
    const auto [lo, hi] = std::minmax_element(m2.begin(), m2.end());
    double mean = 0.0;
    for (double v : m2) mean += v;
    mean /= static_cast<double>(m2.size());
    summary[st.label] = {{"m2", m2},
                         {"relative_variation", (*hi - *lo) / mean},
                         {"strictly_increasing", increasing}};
  }
  ctx.timed("write", [&] {
    ctx.emit(c.name, os.str(),
             {{"columns", {"label", "theta", "phi", "two_j", "dim", "m2"}},
              {"k", c.spec.k},
              {"mu", c.spec.mu},
              {"tau", c.spec.tau},
              {"two_j_list", c.two_j_list},
              {"relative_variation", "(max - min) / mean over the sizes"},
              {"summary", summary}});
  });
}

void run_orbit_period(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const MapParams p{c.spec.k, c.spec.mu, c.spec.tau, c.dt};
  std::ostringstream os;
  CsvWriter csv(os);
  csv.header({"label", "seed_theta", "seed_phi", "seed_period", "theta", "phi", "residual",
              "period", "converged"});
  const auto opt_field = [&](const std::optional<int>& v) -> CsvWriter& {
    return v ? csv.field(*v) : csv.field(std::string_view());
  };
  for (const auto& st : c.states) {
    const ClassicalState seed = ClassicalState::from_angles(st.theta, st.phi);
    const auto seed_period = ctx.timed("detect", [&] {
      return orbit_period(seed, p, c.max_period, c.orbit_tol);
    });
    csv.field(st.label).field(st.theta).field(st.phi);
    opt_field(seed_period);
    if (c.orbit_period > 0) {
      const PeriodicPoint pp = ctx.timed("refine", [&] {
        return refine_periodic_point(st.theta, st.phi, c.orbit_period, p);
      });
      const auto period = orbit_period(pp.state, p, c.max_period, c.orbit_tol);
      csv.field(pp.theta).field(pp.phi).field(pp.residual);
      opt_field(period);
      csv.field(pp.residual < c.orbit_tol ? 1 : 0);
    } else {
      csv.field(std::string_view()).field(std::string_view()).field(std::string_view());
      csv.field(std::string_view()).field(std::string_view());
    }
    csv.end_row();
  }
  ctx.timed("write", [&] {
    ctx.emit(c.name, os.str(),
             {{"columns", {"label", "seed_theta", "seed_phi", "seed_period", "theta", "phi",
                           "residual", "period", "converged"}},
              {"k", c.spec.k},
              {"mu", c.spec.mu},
              {"tau", c.spec.tau},
              {"dt", c.dt},
              {"refine_period", c.orbit_period},
              {"max_period", c.max_period},
              {"tol", c.orbit_tol},
              {"refiner", "Nelder-Mead simplex on |T^p(m) - m| over (theta, phi)"}});
  });
}

void dispatch(RunContext& ctx) {
  switch (ctx.cfg.kind) {
    case ExperimentKind::Sweep: return run_sweep(ctx);
    case ExperimentKind::Poincare: return run_poincare(ctx);
    case ExperimentKind::Husimi: return run_husimi(ctx);
    case ExperimentKind::D2Map: return run_d2map(ctx);
    case ExperimentKind::AvgD2: return run_avg_d2(ctx);
    case ExperimentKind::Evolve:
    case ExperimentKind::Otoc:
    case ExperimentKind::Entangle: return run_time_series(ctx);
    case ExperimentKind::Participation: return run_participation(ctx);
    case ExperimentKind::OrbitPeriod: return run_orbit_period(ctx);
  }
}

int resolve_workers(const RunOptions& options, const ExperimentConfig& cfg) {
  if (options.workers > 0) return options.workers;
  if (const char* env = std::getenv("KDIMER_WORKERS"); env && *env) return default_workers();
  if (cfg.workers > 0) return cfg.workers;
  return default_workers();
}

RunOutcome run_one(const ExperimentConfig& cfg, const std::string& source_text,
                   const RunOptions& options) {
  RunOutcome outcome;
  const fs::path out_dir = !options.out_dir.empty()   ? fs::path(options.out_dir)
                           : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                     : fs::path("out");
  const fs::path cache_dir = resolve_cache_dir(options.cache_dir, cfg.cache_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  ResultCache cache(cache_dir.string() == "none" ? fs::path() : cache_dir);
  RunContext ctx(cfg, out_dir, cache, resolve_workers(options, cfg));
  const auto t0 = Clock::now();
  std::string status = "ok";
  try {
    dispatch(ctx);
  } catch (const ArgumentError& e) {
    outcome.status = RunStatus::ConfigFailure;
    ctx.failures.push_back({cfg.name, e.what()});
    status = "argument_error";
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    ctx.failures.push_back({cfg.name, e.what()});
  }
  if (outcome.status == RunStatus::Ok && !ctx.failures.empty()) {
    outcome.status = RunStatus::NumericFailure;
    status = "numeric_failure";
  }

  const auto entries = cache.entries();
  json cache_list = json::array();
  std::vector<const ResultCache::Entry*> hits;
  for (const auto& e : entries) {
    cache_list.push_back({{"key", e.key},
                          {"kind", e.kind},
                          {"spec", spec_json(e.spec)},
                          {"detail", e.detail},
                          {"hit", e.hit}});
    if (e.hit) hits.push_back(&e);
  }
  outcome.cache_hits = static_cast<int>(hits.size());
  outcome.cache_misses = static_cast<int>(entries.size() - hits.size());

  json check = nullptr;
  const bool verify = options.verify_cache == "always"  ? !hits.empty()
                      : options.verify_cache == "never" ? false
                                                        : hits.size() >= 10;
  if (verify && outcome.status == RunStatus::Ok) {
    const std::string digest = detail::sha256_hex(cfg.snapshot_json());
    const auto pick = std::stoull(digest.substr(0, 12), nullptr, 16) % hits.size();
    const auto& e = *hits[pick];
    const bool same = ctx.timed("cache_check", [&] { return cache.matches_recomputation(e, ctx.workers); });
    check = {{"key", e.key}, {"kind", e.kind}, {"identical", same}};
    if (!same) {
      ctx.failures.push_back({"cache " + e.key, "cached record differs from recomputation"});
      outcome.status = RunStatus::NumericFailure;
      status = "numeric_failure";
    }
  }

  json failures = json::array();
  for (const auto& f : ctx.failures) failures.push_back({{"where", f.where}, {"message", f.message}});

  const std::string timing_file = cfg.name + ".timing.json";
  json manifest = {{"code_version", kCodeVersion},
                   {"experiment", kind_name(cfg.kind)},
                   {"name", cfg.name},
                   {"status", status},
                   {"config", json::parse(cfg.snapshot_json())},
                   {"inputs",
                    {{"config_sha256", detail::sha256_hex(source_text)},
                     {"document", cfg.document}}},
                   {"outputs", ctx.outputs()},
                   {"cache",
                    {{"entries", cache_list},
                     {"hits", outcome.cache_hits},
                     {"misses", outcome.cache_misses},
                     {"check", check}}},
                   {"failures", failures},
                   {"timing_file", timing_file}};
  const std::string manifest_file = cfg.name + ".manifest.json";
  ctx.write_file(manifest_file, manifest.dump(2) + "\n");

  json timing = {{"name", cfg.name},
                 {"workers", ctx.workers},
                 {"total_seconds", seconds_since(t0)},
                 {"phases", ctx.phases},
                 {"cache_dir", cache.dir().string()}};
  ctx.write_file(timing_file, timing.dump(2) + "\n");

  outcome.manifests.push_back((out_dir / manifest_file).string());
  if (!ctx.failures.empty()) {
    std::ostringstream msg;
    msg << cfg.name << ": " << ctx.failures.size() << " failure(s)";
    const std::size_t shown = std::min<std::size_t>(ctx.failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i)
      msg << "\n  " << ctx.failures[i].where << ": " << ctx.failures[i].message;
    outcome.message = msg.str();
  }
  return outcome;
}

}  // namespace

RunOutcome run_config_text(const std::string& text, const RunOptions& options) {
  RunOutcome total;
  std::vector<ExperimentConfig> configs;
  try {
    configs = parse_configs(text, options.expensive);
  } catch (const ConfigError& e) {
    total.status = RunStatus::ConfigFailure;
    total.message = std::string("config error: ") + e.what();
    return total;
  }
  if (options.verify_cache != "auto" && options.verify_cache != "always" &&
      options.verify_cache != "never") {
    total.status = RunStatus::ConfigFailure;
    total.message = "verify_cache must be auto, always or never";
    return total;
  }
  bool matched = false;
  for (const auto& cfg : configs) {
    if (options.only_kind && cfg.kind != *options.only_kind) continue;
    matched = true;
    RunOutcome one;
    try {
      one = run_one(cfg, text, options);
    } catch (const IoError& e) {
      one.status = RunStatus::IoFailure;
      one.message = cfg.name + ": " + e.what();
    }
    total.manifests.insert(total.manifests.end(), one.manifests.begin(), one.manifests.end());
    total.cache_hits += one.cache_hits;
    total.cache_misses += one.cache_misses;
    if (!one.message.empty()) total.message += (total.message.empty() ? "" : "\n") + one.message;
    if (one.status != RunStatus::Ok) {
      total.status = one.status;
      break;
    }
  }
  if (!matched) {
    total.status = RunStatus::ConfigFailure;
    total.message = std::string("config error: no experiment of kind '") +
                    kind_name(*options.only_kind) + "' in this config";
  }
  return total;
}

RunOutcome run_config_file(const std::string& path, const RunOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    RunOutcome out;
    out.status = RunStatus::ConfigFailure;
    out.message = "config error: cannot read " + path;
    return out;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return run_config_text(text.str(), options);
}

RunOutcome run_recipe(const std::string& name, const RunOptions& options) {
  const Recipe* r = find_recipe(name);
  if (!r) {
    RunOutcome out;
    out.status = RunStatus::ConfigFailure;
    out.message = "config error: unknown recipe '" + name + "'";
    return out;
  }
  return run_config_text(r->text, options);
}

}  // namespace kdimer
