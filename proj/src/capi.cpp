#include "kdimer/kdimer.h"

#include <algorithm>
#include <cstring>
#include <map>
#include <new>
#include <string>
#include <vector>

#include "kdimer/backend.hpp"
#include "kdimer/classical.hpp"
#include "kdimer/csv.hpp"
#include "kdimer/dynamics.hpp"
#include "kdimer/harness.hpp"
#include "kdimer/spectral.hpp"

using namespace kdimer;

struct kd_floquet {
  FloquetSpec spec;
  CMatrix matrix;
};

struct kd_eigensystem {
  EigenSystem es;
};

struct kd_report {
  RunOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

kd_status fail(kd_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
kd_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return KD_OK;
  } catch (const ArgumentError& e) {
    return fail(KD_ERR_ARGUMENT, e.what());
  } catch (const PreconditionError& e) {
    return fail(KD_ERR_PRECONDITION, e.what());
  } catch (const NumericError& e) {
    return fail(KD_ERR_NUMERIC, e.what());
  } catch (const IoError& e) {
    return fail(KD_ERR_IO, e.what());
  } catch (const ConfigError& e) {
    return fail(KD_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(KD_ERR_INTERNAL, "unknown exception");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is NULL");
}

void need_len(size_t have, size_t want, const char* what) {
  if (have < want)
    throw ArgumentError(std::string(what) + ": buffer holds " + std::to_string(have) +
                        " doubles, " + std::to_string(want) + " needed");
}

void copy_complex(const cplx* src, size_t n, double* out) {
  std::memcpy(out, src, n * sizeof(cplx));
}

CVector read_state(const double* psi, size_t len, int dim) {
  need(psi, "psi");
  if (len != 2 * static_cast<size_t>(dim))
    throw ArgumentError("psi must hold 2 * dim doubles");
  CVector v(dim);
  std::memcpy(reinterpret_cast<double*>(v.data()), psi, len * sizeof(double));
  return v;
}

void write_series(const RVector& s, double* out, size_t out_len) {
  need_len(out_len, static_cast<size_t>(s.size()), "series");
  std::memcpy(out, s.data(), s.size() * sizeof(double));
}

MapParams map_params(const kd_map_params* p) {
  need(p, "params");
  return {p->k, p->mu, p->tau, p->dt};
}

RunOptions run_options(const kd_run_options* o) {
  RunOptions r;
  if (!o) return r;
  if (o->out_dir) r.out_dir = o->out_dir;
  if (o->cache_dir) r.cache_dir = o->cache_dir;
  r.workers = o->workers > 0 ? o->workers : 0;
  r.expensive = o->expensive != 0;
  if (o->verify_cache) r.verify_cache = o->verify_cache;
  if (o->only_kind) {
    r.only_kind = parse_kind(o->only_kind);
    if (!r.only_kind) throw ArgumentError(std::string("unknown experiment kind '") + o->only_kind + "'");
  }
  return r;
}

kd_status report_status(const kd_report* r) {
  switch (r->outcome.status) {
    case RunStatus::Ok: return KD_OK;
    case RunStatus::ConfigFailure: return fail(KD_ERR_CONFIG, r->outcome.message);
    case RunStatus::NumericFailure: return fail(KD_ERR_NUMERIC, r->outcome.message);
    case RunStatus::IoFailure: return fail(KD_ERR_IO, r->outcome.message);
  }
  return KD_ERR_INTERNAL;
}

template <typename Fn>
kd_status run_with(const kd_run_options* options, kd_report** report, Fn&& fn) {
  if (!report) return fail(KD_ERR_ARGUMENT, "report is NULL");
  *report = nullptr;
  kd_report* r = nullptr;
  const kd_status s = guarded([&] {
    const RunOptions opts = run_options(options);
    r = new kd_report{fn(opts)};
  });
  if (s != KD_OK) return s;
  *report = r;
  return report_status(r);
}

struct RecipeMeta {
  std::map<std::string, std::string> fields;
};

// Distinct J values of the quantum documents, in order of appearance.
std::string desk_j(const std::vector<ExperimentConfig>& docs) {
  std::vector<int> seen;
  for (const auto& d : docs) {
    if (d.kind == ExperimentKind::Poincare || d.kind == ExperimentKind::OrbitPeriod) continue;
    const std::vector<int> sizes = d.two_j_list.empty() ? std::vector<int>{d.spec.two_j} : d.two_j_list;
    for (int t : sizes)
      if (std::find(seen.begin(), seen.end(), t) == seen.end()) seen.push_back(t);
  }
  if (seen.empty()) return "classical";
  std::string out;
  for (int t : seen) out += (out.empty() ? "" : ", ") + format_double(t / 2.0);
  return out;
}

const std::vector<RecipeMeta>& recipe_meta() {
  static const std::vector<RecipeMeta> meta = [] {
    std::vector<RecipeMeta> out;
    for (const auto& r : recipe_catalog()) {
      RecipeMeta m;
      try {
        const auto docs = parse_configs(r.text, false);
        if (!docs.empty() && docs.front().recipe) {
          const RecipeInfo& info = *docs.front().recipe;
          m.fields = {{"figure", info.figure},
                      {"reference_j", info.reference_j},
                      {"runtime", info.runtime},
                      {"summary", info.summary}};
        }
        m.fields["desk_j"] = desk_j(docs);
        m.fields["documents"] = std::to_string(docs.size());
      } catch (const Error& e) {
        m.fields["error"] = e.what();
      }
      out.push_back(std::move(m));
    }
    return out;
  }();
  return meta;
}

}  // namespace

extern "C" {

const char* kd_version(void) { return kCodeVersion; }

const char* kd_last_error(void) { return g_last_error.c_str(); }

const char* kd_status_name(kd_status status) {
  switch (status) {
    case KD_OK: return "ok";
    case KD_ERR_ARGUMENT: return "argument";
    case KD_ERR_PRECONDITION: return "precondition";
    case KD_ERR_NUMERIC: return "numeric";
    case KD_ERR_IO: return "io";
    case KD_ERR_CONFIG: return "config";
    case KD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

kd_status kd_blas_selfcheck(double* deviation) {
  return guarded([&] {
    need(deviation, "deviation");
    *deviation = blas_selfcheck();
  });
}

kd_status kd_floquet_create(int two_j, double k, double mu, double tau, kd_floquet** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const FloquetSpec spec{two_j, k, mu, tau};
    spec.validate();
    *out = new kd_floquet{spec, build_floquet(spec).matrix};
  });
}

void kd_floquet_destroy(kd_floquet* u) { delete u; }

int kd_floquet_dim(const kd_floquet* u) { return u ? static_cast<int>(u->matrix.rows()) : 0; }

kd_status kd_floquet_matrix(const kd_floquet* u, double* out, size_t len) {
  return guarded([&] {
    need(u, "floquet");
    need(out, "out");
    const auto n = static_cast<size_t>(u->matrix.size());
    need_len(len, 2 * n, "floquet matrix");
    copy_complex(u->matrix.data(), n, out);
  });
}

kd_status kd_floquet_unitarity_defect(const kd_floquet* u, double* defect) {
  return guarded([&] {
    need(u, "floquet");
    need(defect, "defect");
    *defect = unitarity_defect(u->matrix);
  });
}

kd_status kd_floquet_parity_defect(const kd_floquet* u, double* defect) {
  return guarded([&] {
    need(u, "floquet");
    need(defect, "defect");
    *defect = commutator_defect(u->matrix, parity_operator(u->spec.basis()).matrix);
  });
}

kd_status kd_eigensystem_compute(const kd_floquet* u, int with_vectors, kd_eigensystem** out) {
  return guarded([&] {
    need(u, "floquet");
    need(out, "out");
    *out = nullptr;
    if (with_vectors)
      *out = new kd_eigensystem{eigensystem(u->matrix)};
    else
      *out = new kd_eigensystem{EigenSystem{eigenphases(u->matrix), CMatrix()}};
  });
}

void kd_eigensystem_destroy(kd_eigensystem* es) { delete es; }

int kd_eigensystem_dim(const kd_eigensystem* es) { return es ? es->es.dim() : 0; }

kd_status kd_eigensystem_phases(const kd_eigensystem* es, double* out, size_t len) {
  return guarded([&] {
    need(es, "eigensystem");
    need(out, "out");
    write_series(es->es.eigenphases, out, len);
  });
}

kd_status kd_eigensystem_vector(const kd_eigensystem* es, int index, double* out, size_t len) {
  return guarded([&] {
    need(es, "eigensystem");
    need(out, "out");
    if (!es->es.has_vectors()) throw PreconditionError("eigensystem was computed without vectors");
    if (index < 0 || index >= es->es.dim()) throw ArgumentError("eigenvector index out of range");
    const auto n = static_cast<size_t>(es->es.dim());
    need_len(len, 2 * n, "eigenvector");
    copy_complex(es->es.eigenvectors.col(index).data(), n, out);
  });
}

kd_status kd_eigensystem_residual(const kd_eigensystem* es, const kd_floquet* u,
                                  double* residual) {
  return guarded([&] {
    need(es, "eigensystem");
    need(u, "floquet");
    need(residual, "residual");
    if (!es->es.has_vectors()) throw PreconditionError("eigensystem was computed without vectors");
    *residual = reconstruction_residual(u->matrix, es->es);
  });
}

kd_status kd_mean_spacing_ratio(const double* phases, size_t n, double* mean, int* dropped) {
  return guarded([&] {
    need(phases, "phases");
    need(mean, "mean_r");
    const RVector p = Eigen::Map<const RVector>(phases, static_cast<Eigen::Index>(n));
    const RatioSeries rs = spacing_ratios(p);
    *mean = mean_r(rs);
    if (dropped) *dropped = rs.n_dropped;
  });
}

kd_status kd_coherent_state(int two_j, double theta, double phi, double* out, size_t len) {
  return guarded([&] {
    need(out, "out");
    const SpinBasis basis(two_j);
    need_len(len, 2 * static_cast<size_t>(basis.dim()), "coherent state");
    const CoherentState cs = coherent_state(basis, theta, phi);
    copy_complex(cs.amplitudes.data(), basis.dim(), out);
  });
}

kd_status kd_fractal_dimension(const kd_eigensystem* es, double theta, double phi, double q,
                               double* dq) {
  return guarded([&] {
    need(es, "eigensystem");
    need(dq, "dq");
    const CoherentStateFactory factory(SpinBasis(es->es.dim() - 1));
    *dq = fractal_dimension(overlap_vector(theta, phi, es->es, factory).c, q);
  });
}

kd_status kd_participation_number(const kd_eigensystem* es, double theta, double phi,
                                  double* m2) {
  return guarded([&] {
    need(es, "eigensystem");
    need(m2, "m2");
    const CoherentStateFactory factory(SpinBasis(es->es.dim() - 1));
    *m2 = participation_number(overlap_vector(theta, phi, es->es, factory).c);
  });
}

kd_status kd_classical_iterate(const kd_map_params* p, double theta, double phi, int times,
                               double* theta_out, double* phi_out) {
  return guarded([&] {
    need(theta_out, "theta_out");
    need(phi_out, "phi_out");
    if (times < 0) throw ArgumentError("times must be non-negative");
    const ClassicalState s =
        iterate_map(ClassicalState::from_angles(theta, phi), map_params(p), times);
    *theta_out = s.theta();
    *phi_out = s.phi();
  });
}

kd_status kd_orbit_period(const kd_map_params* p, double theta, double phi, int max_period,
                          double tol, int* period) {
  return guarded([&] {
    need(period, "period");
    const auto found =
        orbit_period(ClassicalState::from_angles(theta, phi), map_params(p), max_period, tol);
    *period = found.value_or(0);
  });
}

kd_status kd_refine_periodic_point(const kd_map_params* p, double theta, double phi, int period,
                                   double* theta_out, double* phi_out, double* residual) {
  return guarded([&] {
    need(theta_out, "theta_out");
    need(phi_out, "phi_out");
    need(residual, "residual");
    const PeriodicPoint pp = refine_periodic_point(theta, phi, period, map_params(p));
    *theta_out = pp.theta;
    *phi_out = pp.phi;
    *residual = pp.residual;
  });
}

kd_status kd_sz_series(const kd_floquet* u, const double* psi, size_t psi_len, int kicks,
                       double* out, size_t out_len) {
  return guarded([&] {
    need(u, "floquet");
    need(out, "out");
    const CVector v = read_state(psi, psi_len, static_cast<int>(u->matrix.rows()));
    write_series(sz_series(v, u->matrix, u->spec.basis(), kicks), out, out_len);
  });
}

kd_status kd_otoc_series(const kd_eigensystem* es, const double* psi, size_t psi_len, int kicks,
                         double* out, size_t out_len) {
  return guarded([&] {
    need(es, "eigensystem");
    need(out, "out");
    const CVector v = read_state(psi, psi_len, es->es.dim());
    write_series(otoc_series(v, es->es, SpinBasis(es->es.dim() - 1), kicks), out, out_len);
  });
}

kd_status kd_entanglement_series(const kd_floquet* u, const double* psi, size_t psi_len, int s,
                                 int kicks, double* out, size_t out_len) {
  return guarded([&] {
    need(u, "floquet");
    need(out, "out");
    if (kicks < 0) throw ArgumentError("kicks must be non-negative");
    const CVector v = read_state(psi, psi_len, static_cast<int>(u->matrix.rows()));
    write_series(entanglement_series(v, u->matrix, s, kicks), out, out_len);
  });
}

void kd_run_options_init(kd_run_options* options) {
  if (options) *options = kd_run_options{nullptr, nullptr, 0, 0, "auto", nullptr};
}

kd_status kd_run_config_file(const char* path, const kd_run_options* options, kd_report** report) {
  if (!path) return fail(KD_ERR_ARGUMENT, "path is NULL");
  return run_with(options, report,
                  [&](const RunOptions& o) { return run_config_file(path, o); });
}

kd_status kd_run_config_text(const char* yaml, const kd_run_options* options, kd_report** report) {
  if (!yaml) return fail(KD_ERR_ARGUMENT, "yaml is NULL");
  return run_with(options, report,
                  [&](const RunOptions& o) { return run_config_text(yaml, o); });
}

kd_status kd_run_recipe(const char* name, const kd_run_options* options, kd_report** report) {
  if (!name) return fail(KD_ERR_ARGUMENT, "name is NULL");
  return run_with(options, report, [&](const RunOptions& o) { return run_recipe(name, o); });
}

void kd_report_destroy(kd_report* report) { delete report; }

int kd_report_exit_code(const kd_report* report) {
  return report ? static_cast<int>(report->outcome.status) : -1;
}

const char* kd_report_message(const kd_report* report) {
  return report ? report->outcome.message.c_str() : "";
}

size_t kd_report_manifest_count(const kd_report* report) {
  return report ? report->outcome.manifests.size() : 0;
}

const char* kd_report_manifest(const kd_report* report, size_t index) {
  if (!report || index >= report->outcome.manifests.size()) return nullptr;
  return report->outcome.manifests[index].c_str();
}

int kd_report_cache_hits(const kd_report* report) { return report ? report->outcome.cache_hits : 0; }

int kd_report_cache_misses(const kd_report* report) {
  return report ? report->outcome.cache_misses : 0;
}

kd_status kd_config_check(const char* yaml, int expensive, size_t* documents) {
  return guarded([&] {
    need(yaml, "yaml");
    const auto docs = parse_configs(yaml, expensive != 0);
    if (documents) *documents = docs.size();
  });
}

const char* kd_experiment_kinds(void) {
  static const std::string kinds = [] {
    std::string s;
    for (auto k : {ExperimentKind::Sweep, ExperimentKind::Poincare, ExperimentKind::Husimi,
                   ExperimentKind::D2Map, ExperimentKind::AvgD2, ExperimentKind::Evolve,
                   ExperimentKind::Otoc, ExperimentKind::Entangle, ExperimentKind::Participation,
                   ExperimentKind::OrbitPeriod})
      s += (s.empty() ? "" : ",") + std::string(kind_name(k));
    return s;
  }();
  return kinds.c_str();
}

size_t kd_recipe_count(void) { return recipe_catalog().size(); }

const char* kd_recipe_name(size_t index) {
  return index < recipe_catalog().size() ? recipe_catalog()[index].name.c_str() : nullptr;
}

const char* kd_recipe_text(size_t index) {
  return index < recipe_catalog().size() ? recipe_catalog()[index].text.c_str() : nullptr;
}

const char* kd_recipe_field(size_t index, const char* field) {
  if (!field || index >= recipe_meta().size()) return nullptr;
  const auto& f = recipe_meta()[index].fields;
  const auto it = f.find(field);
  return it == f.end() ? nullptr : it->second.c_str();
}

kd_status kd_recipe_find(const char* name, size_t* index) {
  return guarded([&] {
    need(name, "name");
    need(index, "index");
    const Recipe* r = find_recipe(name);
    if (!r) throw ArgumentError(std::string("unknown recipe '") + name + "'");
    *index = static_cast<size_t>(r - recipe_catalog().data());
  });
}

kd_status kd_cache_dir(const char* explicit_dir, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    const std::string dir = resolve_cache_dir(explicit_dir ? explicit_dir : "", "").string();
    if (needed) *needed = dir.size() + 1;
    if (buf && cap > 0) {
      if (cap < dir.size() + 1) throw ArgumentError("buffer too small for the cache path");
      std::memcpy(buf, dir.c_str(), dir.size() + 1);
    }
  });
}

kd_status kd_cache_gc(const char* dir, uint64_t max_bytes, kd_gc_report* report) {
  return guarded([&] {
    need(dir, "dir");
    const GcReport g = cache_gc(dir, max_bytes);
    if (report) *report = {g.removed, g.freed_bytes, g.remaining_bytes, g.remaining_entries};
  });
}

}  // extern "C"
