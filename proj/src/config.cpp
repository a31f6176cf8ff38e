#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "kdimer/harness.hpp"

namespace kdimer {

namespace {

constexpr struct {
  ExperimentKind kind;
  const char* name;
} kKinds[] = {
    {ExperimentKind::Sweep, "sweep"},
    {ExperimentKind::Poincare, "poincare"},
    {ExperimentKind::Husimi, "husimi"},
    {ExperimentKind::D2Map, "d2map"},
    {ExperimentKind::AvgD2, "avg-d2"},
    {ExperimentKind::Evolve, "evolve"},
    {ExperimentKind::Otoc, "otoc"},
    {ExperimentKind::Entangle, "entangle"},
    {ExperimentKind::Participation, "participation"},
    {ExperimentKind::OrbitPeriod, "orbit-period"},
};

int line_of(const YAML::Node& n) {
  const YAML::Mark mark = n.Mark();
  return mark.line >= 0 ? mark.line + 1 : -1;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg, line_of(n));
}

double as_number(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field, "expected a number");
  double v = 0.0;
  try {
    v = n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, field, "expected a number, got '" + n.Scalar() + "'");
  }
  if (!std::isfinite(v)) fail(n, field, "must be finite");
  return v;
}

long long as_integer(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field, "expected an integer");
  try {
    return n.as<long long>();
  } catch (const YAML::Exception&) {
    fail(n, field, "expected an integer, got '" + n.Scalar() + "'");
  }
}

int as_int(const YAML::Node& n, const std::string& field) {
  const long long v = as_integer(n, field);
  if (v < -1000000000LL || v > 1000000000LL) fail(n, field, "out of range");
  return static_cast<int>(v);
}

std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field, "expected a string");
  return n.Scalar();
}

void require_map(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) fail(n, field, "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& field,
                const std::set<std::string>& allowed) {
  for (const auto& kv : n) {
    const std::string key = kv.first.Scalar();
    if (!allowed.count(key))
      fail(kv.first, field.empty() ? key : field + "." + key, "unknown key");
  }
}

// Either a list of numbers or {from, to, count} (inclusive, evenly spaced).
std::vector<double> as_values(const YAML::Node& n, const std::string& field) {
  std::vector<double> out;
  if (n.IsSequence()) {
    for (std::size_t i = 0; i < n.size(); ++i)
      out.push_back(as_number(n[i], field + "[" + std::to_string(i) + "]"));
    if (out.empty()) fail(n, field, "empty list");
    return out;
  }
  if (!n.IsMap()) fail(n, field, "expected a list or {from, to, count}");
  check_keys(n, field, {"from", "to", "count"});
  for (const char* key : {"from", "to", "count"})
    if (!n[key]) fail(n, field, std::string("missing '") + key + "'");
  const double from = as_number(n["from"], field + ".from");
  const double to = as_number(n["to"], field + ".to");
  const int count = as_int(n["count"], field + ".count");
  if (count < 1) fail(n["count"], field + ".count", "must be >= 1");
  for (int i = 0; i < count; ++i)
    out.push_back(count == 1 ? from : from + (to - from) * i / (count - 1));
  return out;
}

std::vector<int> as_int_list(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) fail(n, field, "expected a list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(as_int(n[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

// Deep merge; the nodes themselves are shared so their marks survive.
YAML::Node overlay(const YAML::Node& base, const YAML::Node& over) {
  if (!base.IsMap() || !over.IsMap()) return over;
  YAML::Node out(YAML::NodeType::Map);
  for (const auto& kv : base) out[kv.first.Scalar()] = kv.second;
  for (const auto& kv : over) {
    const std::string key = kv.first.Scalar();
    const YAML::Node existing = base[key];
    out[key] = existing ? overlay(existing, kv.second) : kv.second;
  }
  return out;
}

const std::set<std::string>& keys_for(ExperimentKind kind) {
  static const std::set<std::string> common = {"experiment", "name",  "recipe", "expensive",
                                               "output",     "cache", "workers", "spec"};
  static const auto with = [](std::initializer_list<const char*> extra) {
    std::set<std::string> s = common;
    for (const char* e : extra) s.insert(e);
    return s;
  };
  static const std::set<std::string> sweep = with({"sweep"});
  static const std::set<std::string> poincare = with({"grid", "classical"});
  static const std::set<std::string> husimi = with({"grid", "eigenstates", "states", "snapshots"});
  static const std::set<std::string> d2map = with({"grid", "q"});
  static const std::set<std::string> avg = with({"grid", "q", "k_list", "two_j_list"});
  static const std::set<std::string> evolve = with({"kicks", "states", "two_j_list"});
  static const std::set<std::string> otoc = with({"kicks", "states", "two_j_list", "fit"});
  static const std::set<std::string> entangle = with({"kicks", "states", "two_j_list", "s"});
  static const std::set<std::string> participation = with({"states", "two_j_list"});
  static const std::set<std::string> orbit = with({"classical", "orbit", "states"});
  switch (kind) {
    case ExperimentKind::Sweep: return sweep;
    case ExperimentKind::Poincare: return poincare;
    case ExperimentKind::Husimi: return husimi;
    case ExperimentKind::D2Map: return d2map;
    case ExperimentKind::AvgD2: return avg;
    case ExperimentKind::Evolve: return evolve;
    case ExperimentKind::Otoc: return otoc;
    case ExperimentKind::Entangle: return entangle;
    case ExperimentKind::Participation: return participation;
    case ExperimentKind::OrbitPeriod: return orbit;
  }
  return common;
}

const std::regex& label_pattern() {
  static const std::regex re("[A-Za-z0-9_-]{1,64}");
  return re;
}

std::vector<InitialState> parse_states(const YAML::Node& n) {
  if (!n.IsSequence()) fail(n, "states", "expected a list");
  std::vector<InitialState> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const YAML::Node item = n[i];
    const std::string field = "states[" + std::to_string(i) + "]";
    require_map(item, field);
    check_keys(item, field, {"label", "theta", "phi", "site"});
    InitialState st;
    if (!item["label"]) fail(item, field, "missing 'label'");
    st.label = as_string(item["label"], field + ".label");
    if (!std::regex_match(st.label, label_pattern()))
      fail(item["label"], field + ".label", "use letters, digits, '_' or '-'");
    if (!seen.insert(st.label).second) fail(item["label"], field + ".label", "duplicate label");
    if (item["site"]) {
      if (item["theta"] || item["phi"]) fail(item, field, "give either site or theta/phi");
      st.site = as_int(item["site"], field + ".site");
      if (st.site != 1 && st.site != 2) fail(item["site"], field + ".site", "must be 1 or 2");
    } else {
      if (!item["theta"] || !item["phi"]) fail(item, field, "needs theta and phi (or site)");
      st.theta = as_number(item["theta"], field + ".theta");
      st.phi = as_number(item["phi"], field + ".phi");
      if (st.theta < 0 || st.theta > kPi) fail(item["theta"], field + ".theta", "outside [0, pi]");
    }
    out.push_back(st);
  }
  if (out.empty()) fail(n, "states", "empty list");
  return out;
}

ExperimentConfig parse_document(const YAML::Node& raw, bool expensive, int index) {
  if (!raw.IsMap()) throw ConfigError("document " + std::to_string(index) + ": expected a mapping",
                                      line_of(raw));
  if (!raw["experiment"]) throw ConfigError("experiment: missing", line_of(raw));
  ExperimentConfig c;
  c.document = index;
  c.expensive = expensive;
  const std::string kind_text = as_string(raw["experiment"], "experiment");
  const auto kind = parse_kind(kind_text);
  if (!kind) fail(raw["experiment"], "experiment", "unknown experiment '" + kind_text + "'");
  c.kind = *kind;

  check_keys(raw, "", keys_for(c.kind));
  YAML::Node n = raw;
  if (raw["expensive"]) {
    require_map(raw["expensive"], "expensive");
    check_keys(raw["expensive"], "expensive", keys_for(c.kind));
    for (const char* k : {"experiment", "name", "recipe", "expensive"})
      if (raw["expensive"][k]) fail(raw["expensive"][k], std::string("expensive.") + k,
                                    "cannot be overridden");
    if (expensive) n = overlay(raw, raw["expensive"]);
  }

  c.name = n["name"] ? as_string(n["name"], "name") : kind_text;
  if (!std::regex_match(c.name, label_pattern()))
    fail(n["name"], "name", "use letters, digits, '_' or '-'");

  if (n["recipe"]) {
    const YAML::Node r = n["recipe"];
    require_map(r, "recipe");
    check_keys(r, "recipe", {"figure", "reference_j", "runtime", "summary"});
    RecipeInfo info;
    if (r["figure"]) info.figure = as_string(r["figure"], "recipe.figure");
    if (r["reference_j"]) info.reference_j = as_string(r["reference_j"], "recipe.reference_j");
    if (r["runtime"]) info.runtime = as_string(r["runtime"], "recipe.runtime");
    if (r["summary"]) info.summary = as_string(r["summary"], "recipe.summary");
    c.recipe = info;
  }

  if (!n["spec"]) fail(n, "spec", "missing");
  {
    const YAML::Node s = n["spec"];
    require_map(s, "spec");
    check_keys(s, "spec", {"two_j", "k", "mu", "tau"});
    if (!s["two_j"]) fail(s, "spec.two_j", "missing");
    c.spec.two_j = as_int(s["two_j"], "spec.two_j");
    const bool needs_k = c.kind != ExperimentKind::Sweep && c.kind != ExperimentKind::AvgD2;
    const bool needs_mu = c.kind != ExperimentKind::Sweep;
    if (s["k"]) c.spec.k = as_number(s["k"], "spec.k");
    else if (needs_k) fail(s, "spec.k", "missing");
    if (s["mu"]) c.spec.mu = as_number(s["mu"], "spec.mu");
    else if (needs_mu) fail(s, "spec.mu", "missing");
    c.spec.tau = s["tau"] ? as_number(s["tau"], "spec.tau") : 1.0;
  }

  const bool classical_grid = c.kind == ExperimentKind::Poincare;
  c.n_theta = classical_grid ? 20 : 100;
  c.n_phi = classical_grid ? 20 : 100;
  if (n["grid"]) {
    const YAML::Node g = n["grid"];
    require_map(g, "grid");
    check_keys(g, "grid", {"n_theta", "n_phi"});
    if (g["n_theta"]) c.n_theta = as_int(g["n_theta"], "grid.n_theta");
    if (g["n_phi"]) c.n_phi = as_int(g["n_phi"], "grid.n_phi");
  }
  if (n["q"]) c.q = as_number(n["q"], "q");

  if (c.kind == ExperimentKind::Sweep) {
    if (!n["sweep"]) fail(n, "sweep", "missing");
    const YAML::Node s = n["sweep"];
    require_map(s, "sweep");
    check_keys(s, "sweep", {"k", "mu"});
    if (!s["k"] || !s["mu"]) fail(s, "sweep", "needs both k and mu");
    c.sweep_k = as_values(s["k"], "sweep.k");
    c.sweep_mu = as_values(s["mu"], "sweep.mu");
  }
  if (n["k_list"]) c.k_list = as_values(n["k_list"], "k_list");
  if (n["two_j_list"]) c.two_j_list = as_int_list(n["two_j_list"], "two_j_list");

  if (n["classical"]) {
    const YAML::Node cl = n["classical"];
    require_map(cl, "classical");
    check_keys(cl, "classical", {"kicks", "dt"});
    if (cl["kicks"]) c.classical_kicks = as_int(cl["kicks"], "classical.kicks");
    if (cl["dt"]) c.dt = as_number(cl["dt"], "classical.dt");
  }
  if (n["kicks"]) c.kicks = as_int(n["kicks"], "kicks");
  if (n["states"]) c.states = parse_states(n["states"]);
  if (n["s"]) c.s = as_int(n["s"], "s");
  if (n["fit"]) {
    require_map(n["fit"], "fit");
    check_keys(n["fit"], "fit", {"min_window"});
    if (n["fit"]["min_window"]) c.fit_min_window = as_int(n["fit"]["min_window"], "fit.min_window");
  }
  if (n["eigenstates"]) {
    const YAML::Node e = n["eigenstates"];
    require_map(e, "eigenstates");
    check_keys(e, "eigenstates", {"indices", "random"});
    if (e["indices"]) c.eigen_indices = as_int_list(e["indices"], "eigenstates.indices");
    if (e["random"]) {
      require_map(e["random"], "eigenstates.random");
      check_keys(e["random"], "eigenstates.random", {"count", "seed"});
      if (!e["random"]["count"]) fail(e["random"], "eigenstates.random.count", "missing");
      c.random_count = as_int(e["random"]["count"], "eigenstates.random.count");
      if (e["random"]["seed"]) {
        const long long seed = as_integer(e["random"]["seed"], "eigenstates.random.seed");
        if (seed < 0) fail(e["random"]["seed"], "eigenstates.random.seed", "must be >= 0");
        c.random_seed = static_cast<std::uint64_t>(seed);
      }
    }
  }
  if (n["snapshots"]) c.snapshots = as_int_list(n["snapshots"], "snapshots");
  if (n["orbit"]) {
    const YAML::Node o = n["orbit"];
    require_map(o, "orbit");
    check_keys(o, "orbit", {"period", "max_period", "tol"});
    if (o["period"]) c.orbit_period = as_int(o["period"], "orbit.period");
    if (o["max_period"]) c.max_period = as_int(o["max_period"], "orbit.max_period");
    if (o["tol"]) c.orbit_tol = as_number(o["tol"], "orbit.tol");
  }
  if (n["output"]) c.output_dir = as_string(n["output"], "output");
  if (n["cache"]) c.cache_dir = as_string(n["cache"], "cache");
  if (n["workers"]) c.workers = as_int(n["workers"], "workers");

  // Re-raise validation errors with the line of the field they name when possible.
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    if (e.line() >= 0) throw;
    const std::string msg = e.what();
    const std::string field = msg.substr(0, msg.find(':'));
    YAML::Node at = n;
    std::size_t start = 0;
    while (start <= field.size()) {
      const std::size_t dot = field.find('.', start);
      std::string part = field.substr(start, dot == std::string::npos ? std::string::npos
                                                                       : dot - start);
      const std::size_t bracket = part.find('[');
      std::optional<std::size_t> idx;
      if (bracket != std::string::npos) {
        idx = std::stoul(part.substr(bracket + 1));
        part = part.substr(0, bracket);
      }
      if (!at.IsMap() || !at[part]) break;
      at = at[part];
      if (idx && at.IsSequence() && *idx < at.size()) at = at[*idx];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    throw ConfigError(msg, line_of(at));
  }
  return c;
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  return std::nullopt;
}

std::vector<ExperimentConfig> parse_configs(const std::string& text, bool expensive) {
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error: " + e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
  std::vector<ExperimentConfig> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].IsNull()) continue;
    out.push_back(parse_document(docs[i], expensive, static_cast<int>(i)));
  }
  if (out.empty()) throw ConfigError("no experiment found");
  std::set<std::string> names;
  for (const auto& c : out)
    if (!names.insert(c.name).second) throw ConfigError("name: '" + c.name + "' used twice");
  return out;
}

void validate_config(const ExperimentConfig& c) {
  const auto bad = [](const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
  };
  if (c.spec.two_j < 1) bad("spec.two_j", "must be >= 1");
  if (c.spec.two_j > 20000) bad("spec.two_j", "above the dense-matrix limit 20000");
  if (c.spec.tau < 0) bad("spec.tau", "must be non-negative");
  if (c.n_theta < 1 || c.n_theta > 2000) bad("grid.n_theta", "must lie in [1, 2000]");
  if (c.n_phi < 1 || c.n_phi > 4000) bad("grid.n_phi", "must lie in [1, 4000]");
  if (!(c.q >= 0) || c.q == 1.0) bad("q", "must be >= 0 and != 1");
  if (c.workers < 0) bad("workers", "must be >= 0");
  if (c.kicks < 0 || c.kicks > 1000000) bad("kicks", "must lie in [0, 1000000]");

  const auto check_list = [&](const std::vector<int>& list, const char* field) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] < 1) bad(std::string(field) + "[" + std::to_string(i) + "]", "must be >= 1");
      if (i > 0 && list[i] <= list[i - 1])
        bad(std::string(field) + "[" + std::to_string(i) + "]", "must be strictly ascending");
    }
  };
  check_list(c.two_j_list, "two_j_list");

  const auto need_states = [&] {
    if (c.states.empty()) bad("states", "missing");
  };
  const auto no_sites = [&](const char* why) {
    for (std::size_t i = 0; i < c.states.size(); ++i)
      if (c.states[i].site != 0)
        bad("states[" + std::to_string(i) + "].site", std::string("not allowed for ") + why);
  };
  const auto check_classical = [&] {
    if (c.classical_kicks < 0) bad("classical.kicks", "must be >= 0");
    if (c.spec.tau > 0) {
      if (!(c.dt > 0) || c.dt > c.spec.tau) bad("classical.dt", "must lie in (0, tau]");
      const double steps = c.spec.tau / c.dt;
      if (std::abs(steps - std::round(steps)) > 1e-6) bad("classical.dt", "must divide tau");
    }
  };

  switch (c.kind) {
    case ExperimentKind::Sweep:
      if (c.spec.two_j + 1 < 200) bad("spec.two_j", "sweeps need dimension two_j + 1 >= 200");
      if (c.sweep_k.empty()) bad("sweep.k", "empty");
      if (c.sweep_mu.empty()) bad("sweep.mu", "empty");
      break;
    case ExperimentKind::Poincare:
      check_classical();
      break;
    case ExperimentKind::Husimi: {
      const bool eig_mode = !c.eigen_indices.empty() || c.random_count > 0;
      const bool snap_mode = !c.snapshots.empty() || !c.states.empty();
      if (eig_mode == snap_mode)
        bad("eigenstates", "give either eigenstates or states with snapshots");
      if (eig_mode) {
        const int dim = c.spec.two_j + 1;
        for (std::size_t i = 0; i < c.eigen_indices.size(); ++i)
          if (c.eigen_indices[i] < 0 || c.eigen_indices[i] >= dim)
            bad("eigenstates.indices[" + std::to_string(i) + "]", "outside [0, two_j]");
        if (c.random_count < 0 || c.random_count > dim)
          bad("eigenstates.random.count", "must lie in [0, two_j + 1]");
      } else {
        need_states();
        if (c.snapshots.empty()) bad("snapshots", "missing");
        for (std::size_t i = 0; i < c.snapshots.size(); ++i)
          if (c.snapshots[i] < 0 || (i > 0 && c.snapshots[i] < c.snapshots[i - 1]))
            bad("snapshots[" + std::to_string(i) + "]", "must be non-negative and ascending");
      }
      break;
    }
    case ExperimentKind::D2Map:
      break;
    case ExperimentKind::AvgD2:
      if (c.k_list.empty()) bad("k_list", "missing");
      break;
    case ExperimentKind::Evolve:
    case ExperimentKind::Otoc:
      need_states();
      if (c.kind == ExperimentKind::Otoc && c.fit_min_window < 2)
        bad("fit.min_window", "must be >= 2");
      break;
    case ExperimentKind::Entangle: {
      need_states();
      if (c.s < 1 || c.s > 4) bad("s", "must lie in [1, 4]");
      const int smallest = c.two_j_list.empty() ? c.spec.two_j : c.two_j_list.front();
      if (c.s > smallest) bad("s", "exceeds the qubit count 2J");
      break;
    }
    case ExperimentKind::Participation:
      need_states();
      no_sites("participation");
      if (c.two_j_list.empty()) bad("two_j_list", "missing");
      break;
    case ExperimentKind::OrbitPeriod:
      need_states();
      no_sites("orbit-period");
      check_classical();
      if (c.orbit_period < 0) bad("orbit.period", "must be >= 0");
      if (c.max_period < 1) bad("orbit.max_period", "must be >= 1");
      if (!(c.orbit_tol > 0)) bad("orbit.tol", "must be positive");
      break;
  }
}

std::string ExperimentConfig::snapshot_json() const {
  using nlohmann::json;
  json j;
  j["experiment"] = kind_name(kind);
  j["name"] = name;
  j["expensive"] = expensive;
  j["spec"] = {{"two_j", spec.two_j}, {"k", spec.k}, {"mu", spec.mu}, {"tau", spec.tau}};
  switch (kind) {
    case ExperimentKind::Sweep:
      j["sweep"] = {{"k", sweep_k}, {"mu", sweep_mu}};
      break;
    case ExperimentKind::Poincare:
      j["grid"] = {{"n_theta", n_theta}, {"n_phi", n_phi}};
      j["classical"] = {{"kicks", classical_kicks}, {"dt", dt}};
      break;
    case ExperimentKind::Husimi:
      j["grid"] = {{"n_theta", n_theta}, {"n_phi", n_phi}};
      j["eigenstates"] = {{"indices", eigen_indices},
                          {"random", {{"count", random_count}, {"seed", random_seed}}}};
      j["snapshots"] = snapshots;
      break;
    case ExperimentKind::D2Map:
      j["grid"] = {{"n_theta", n_theta}, {"n_phi", n_phi}};
      j["q"] = q;
      break;
    case ExperimentKind::AvgD2:
      j["grid"] = {{"n_theta", n_theta}, {"n_phi", n_phi}};
      j["q"] = q;
      j["k_list"] = k_list;
      j["two_j_list"] = two_j_list;
      break;
    case ExperimentKind::Evolve:
    case ExperimentKind::Otoc:
    case ExperimentKind::Entangle:
      j["kicks"] = kicks;
      j["two_j_list"] = two_j_list;
      if (kind == ExperimentKind::Otoc) j["fit"] = {{"min_window", fit_min_window}};
      if (kind == ExperimentKind::Entangle) j["s"] = s;
      break;
    case ExperimentKind::Participation:
      j["two_j_list"] = two_j_list;
      break;
    case ExperimentKind::OrbitPeriod:
      j["classical"] = {{"dt", dt}};
      j["orbit"] = {{"period", orbit_period}, {"max_period", max_period}, {"tol", orbit_tol}};
      break;
  }
  if (!states.empty()) {
    json list = json::array();
    for (const auto& st : states) {
      json item = {{"label", st.label}};
      if (st.site) {
        item["site"] = st.site;
      } else {
        item["theta"] = st.theta;
        item["phi"] = st.phi;
      }
      list.push_back(item);
    }
    j["states"] = list;
  }
  return j.dump();
}

}  // namespace kdimer
