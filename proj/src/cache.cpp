#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "binio.hpp"
#include "hash.hpp"
#include "kdimer/harness.hpp"
#include "kdimer/spectral.hpp"

namespace kdimer {

namespace fs = std::filesystem;

namespace {

constexpr char kGridMagic[8] = {'K', 'D', 'P', 'H', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t kGridVersion = 1;
constexpr const char* kSuffix = ".kdc";

std::string grid_detail(int n_theta, int n_phi, double q) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%dx%d q=%.17g", n_theta, n_phi, q);
  return buf;
}

std::string grid_key(const FloquetSpec& spec, int n_theta, int n_phi, double q) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "|%d|%d|%a", n_theta, n_phi, q);
  return detail::sha256_hex(spec_cache_key(spec, "dq_map") + buf);
}

// Writes through a temporary file and renames, so readers never see a torn record.
template <typename Fn>
void write_atomically(const fs::path& target, Fn&& fill) {
  std::ostringstream tag;
  tag << ".tmp." << ::getpid() << "." << std::this_thread::get_id();
  const fs::path tmp = target.string() + tag.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache record " + tmp.string());
    fill(out);
    out.flush();
    if (!out) throw IoError("failed writing cache record " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move cache record into place: " + target.string());
  }
}

void write_grid_record(std::ostream& out, const std::string& key, const PhaseGrid& g) {
  using detail::put_le;
  out.write(kGridMagic, sizeof kGridMagic);
  put_le<std::uint32_t>(out, kGridVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
  out.write(key.data(), static_cast<std::streamsize>(key.size()));
  put_le<std::int32_t>(out, g.n_theta());
  put_le<std::int32_t>(out, g.n_phi());
  for (int i = 0; i < g.n_theta(); ++i) put_le<double>(out, g.theta(i));
  for (int j = 0; j < g.n_phi(); ++j) put_le<double>(out, g.phi(j));
  for (int i = 0; i < g.n_theta(); ++i)
    for (int j = 0; j < g.n_phi(); ++j) put_le<double>(out, g.values(i, j));
}

std::optional<PhaseGrid> read_grid_record(std::istream& in, const std::string& key, int n_theta,
                                          int n_phi) {
  using detail::get_le;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kGridMagic, sizeof magic) != 0)
    return std::nullopt;
  std::uint32_t version = 0, klen = 0;
  if (!get_le(in, version) || version != kGridVersion || !get_le(in, klen) || klen != key.size())
    return std::nullopt;
  std::string stored(klen, '\0');
  if (!in.read(stored.data(), klen) || stored != key) return std::nullopt;
  std::int32_t nt = 0, np = 0;
  if (!get_le(in, nt) || !get_le(in, np) || nt != n_theta || np != n_phi) return std::nullopt;
  PhaseGrid g = PhaseGrid::midpoint(n_theta, n_phi);
  for (int i = 0; i < nt; ++i)
    if (!get_le(in, g.theta(i))) return std::nullopt;
  for (int j = 0; j < np; ++j)
    if (!get_le(in, g.phi(j))) return std::nullopt;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j)
      if (!get_le(in, g.values(i, j))) return std::nullopt;
  return g;
}

template <typename M>
bool same_bits(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(typename M::Scalar) * a.size()) == 0;
}

EigenSystem compute_eigensystem(const FloquetSpec& spec) {
  return eigensystem(build_floquet(spec).matrix);
}

RVector compute_eigenphases(const FloquetSpec& spec) { return floquet_eigenphases(spec); }

}  // namespace

ResultCache::ResultCache(fs::path dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

void ResultCache::record(Entry entry) {
  std::lock_guard lock(mutex_);
  for (auto& e : entries_)
    if (e.key == entry.key) {
      e.hit = e.hit && entry.hit;
      return;
    }
  entries_.push_back(std::move(entry));
}

std::vector<ResultCache::Entry> ResultCache::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<Entry> out = entries_;
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
  return out;
}

EigenSystem ResultCache::eigensystem(const FloquetSpec& spec) {
  const std::string key = spec_cache_key(spec, "eigensystem");
  const fs::path path = dir_ / (key + kSuffix);
  if (!dir_.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      if (auto es = read_eigensystem_record(in, spec); es && es->has_vectors()) {
        record({key, "eigensystem", spec, "", true});
        return std::move(*es);
      }
    }
  }
  EigenSystem es = compute_eigensystem(spec);
  if (!dir_.empty())
    write_atomically(path, [&](std::ostream& out) { write_eigensystem_record(out, spec, es); });
  record({key, "eigensystem", spec, "", false});
  return es;
}

RVector ResultCache::eigenphases(const FloquetSpec& spec) {
  const std::string key = spec_cache_key(spec, "eigenphases");
  const fs::path path = dir_ / (key + kSuffix);
  if (!dir_.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      if (auto es = read_eigensystem_record(in, spec); es && !es->has_vectors()) {
        record({key, "eigenphases", spec, "", true});
        return std::move(es->eigenphases);
      }
    }
  }
  EigenSystem es{compute_eigenphases(spec), CMatrix()};
  if (!dir_.empty())
    write_atomically(path, [&](std::ostream& out) { write_eigensystem_record(out, spec, es); });
  record({key, "eigenphases", spec, "", false});
  return std::move(es.eigenphases);
}

PhaseGrid ResultCache::dq_map(const FloquetSpec& spec, int n_theta, int n_phi, double q,
                              int workers) {
  const std::string key = grid_key(spec, n_theta, n_phi, q);
  const fs::path path = dir_ / (key + kSuffix);
  if (!dir_.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      if (auto g = read_grid_record(in, key, n_theta, n_phi)) {
        record({key, "dq_map", spec, grid_detail(n_theta, n_phi, q), true});
        return std::move(*g);
      }
    }
  }
  const EigenSystem es = eigensystem(spec);
  const CoherentStateFactory factory(spec.basis());
  PhaseGrid g = kdimer::dq_map(es, factory, n_theta, n_phi, q, workers);
  if (!dir_.empty()) write_atomically(path, [&](std::ostream& out) { write_grid_record(out, key, g); });
  record({key, "dq_map", spec, grid_detail(n_theta, n_phi, q), false});
  return g;
}

bool ResultCache::matches_recomputation(const Entry& entry, int workers) const {
  const fs::path path = dir_ / (entry.key + kSuffix);
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  if (entry.kind == "eigensystem") {
    const auto stored = read_eigensystem_record(in, entry.spec);
    if (!stored) return false;
    const EigenSystem fresh = compute_eigensystem(entry.spec);
    return same_bits(stored->eigenphases, fresh.eigenphases) &&
           same_bits(stored->eigenvectors, fresh.eigenvectors);
  }
  if (entry.kind == "eigenphases") {
    const auto stored = read_eigensystem_record(in, entry.spec);
    if (!stored) return false;
    const RVector fresh = compute_eigenphases(entry.spec);
    return same_bits(stored->eigenphases, fresh);
  }
  if (entry.kind == "dq_map") {
    int nt = 0, np = 0;
    double q = 0;
    if (std::sscanf(entry.detail.c_str(), "%dx%d q=%lf", &nt, &np, &q) != 3) return false;
    const auto stored = read_grid_record(in, entry.key, nt, np);
    if (!stored) return false;
    const EigenSystem es = compute_eigensystem(entry.spec);
    const PhaseGrid fresh =
        kdimer::dq_map(es, CoherentStateFactory(entry.spec.basis()), nt, np, q, workers);
    return same_bits(stored->values, fresh.values);
  }
  return false;
}

GcReport cache_gc(const fs::path& dir, std::uintmax_t max_bytes) {
  GcReport report;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a cache directory: " + dir.string());
  struct Item {
    fs::path path;
    std::uintmax_t size;
    fs::file_time_type mtime;
  };
  std::vector<Item> items;
  std::uintmax_t total = 0;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != kSuffix) continue;
    items.push_back({de.path(), de.file_size(), de.last_write_time()});
    total += items.back().size;
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.mtime != b.mtime ? a.mtime < b.mtime : a.path < b.path;
  });
  std::size_t i = 0;
  for (; i < items.size() && total > max_bytes; ++i) {
    if (!fs::remove(items[i].path, ec) || ec)
      throw IoError("cannot remove cache record " + items[i].path.string());
    total -= items[i].size;
    report.freed_bytes += items[i].size;
    ++report.removed;
  }
  report.remaining_bytes = total;
  report.remaining_entries = static_cast<int>(items.size() - i);
  return report;
}

fs::path resolve_cache_dir(const std::string& explicit_dir, const std::string& config_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("KDIMER_CACHE"); env && *env) return env;
  if (!config_dir.empty()) return config_dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "kdimer";
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".cache" / "kdimer";
  return fs::path(".kdimer-cache");
}

}  // namespace kdimer
