#include "hlr/records.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "hlr/arith.hpp"
#include "hlr/error.hpp"

namespace hlr {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

NewformRecord make_record(const Eigensystem& e, std::int64_t b) {
  NewformRecord r;
  r.label = e.label;
  r.level = e.level;
  r.weight = e.weight;
  r.an = eigen_qexpansion(e, b);
  r.bound = b;
  return r;
}

ordered_json record_to_json(const NewformRecord& r) {
  ordered_json an = ordered_json::array();
  for (const auto& x : r.an) {
    if (!x.fits_slong_p()) throw Error(ErrorKind::InvalidInput, "coefficient exceeds 64 bits in " + r.label);
    an.push_back(x.get_si());
  }
  return ordered_json{{"label", r.label}, {"level", r.level}, {"weight", r.weight},
                      {"char_order", 1},  {"an", an},         {"bound", r.bound}};
}

namespace {

[[noreturn]] void schema(std::size_t index, const std::string& field, const std::string& what) {
  throw Error(ErrorKind::SchemaError, "record " + std::to_string(index) + ", field '" + field + "': " + what);
}

NewformRecord record_from_json(const ordered_json& j, std::size_t index) {
  if (!j.is_object()) schema(index, "", "expected an object");
  static const char* const kFields[] = {"label", "level", "weight", "char_order", "an", "bound"};
  for (const char* f : kFields)
    if (!j.contains(f)) schema(index, f, "missing");
  for (const auto& [key, value] : j.items())
    if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) schema(index, key, "unknown field");

  NewformRecord r;
  r.source = "ingested";
  if (!j["label"].is_string() || j["label"].get<std::string>().empty()) schema(index, "label", "expected a non-empty string");
  r.label = j["label"].get<std::string>();
  if (r.label.find_first_of("/\\ ") != std::string::npos) schema(index, "label", "contains a path separator or space");
  if (!j["level"].is_number_integer() || j["level"].get<std::int64_t>() < 1) schema(index, "level", "expected a positive integer");
  r.level = j["level"].get<std::int64_t>();
  if (!j["weight"].is_number_integer() || j["weight"].get<std::int64_t>() < 2) schema(index, "weight", "expected an integer >= 2");
  r.weight = static_cast<int>(j["weight"].get<std::int64_t>());
  if (!j["char_order"].is_number_integer() || j["char_order"].get<std::int64_t>() != 1)
    schema(index, "char_order", "only the trivial character (1) is supported");
  if (!j["bound"].is_number_integer() || j["bound"].get<std::int64_t>() < 1) schema(index, "bound", "expected a positive integer");
  r.bound = j["bound"].get<std::int64_t>();
  if (!j["an"].is_array()) schema(index, "an", "expected an array of integers");
  for (const auto& x : j["an"]) {
    if (!x.is_number_integer()) schema(index, "an", "expected an array of integers");
    r.an.emplace_back(static_cast<long>(x.get<std::int64_t>()));
  }
  if (static_cast<std::int64_t>(r.an.size()) != r.bound) schema(index, "an", "length differs from bound");
  if (r.an.front() != 1) schema(index, "an", "a_1 must be 1");
  return r;
}

}  // namespace

std::vector<NewformRecord> parse_records(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("malformed JSON: ") + e.what());
  }
  std::vector<NewformRecord> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(record_from_json(j[i], i));
  } else {
    out.push_back(record_from_json(j, 0));
  }
  return out;
}

void validate_record(const NewformRecord& r) {
  if (r.an.empty() || r.an.front() != 1) throw Error(ErrorKind::SchemaError, r.label + ": a_1 must be 1");
  const auto b = static_cast<std::int64_t>(r.an.size());
  auto a = [&](std::int64_t n) -> const Integer& { return r.an[static_cast<std::size_t>(n - 1)]; };
  auto fail = [&](std::int64_t m, std::int64_t n) {
    throw Error(ErrorKind::RecursionViolation,
                r.label + ": recursion fails at (" + std::to_string(m) + "," + std::to_string(n) + ")");
  };
  for (std::int64_t n = 2; n <= b; ++n) {
    auto [q, e] = factor(n).front();
    const std::int64_t qe = ipow(q, e);
    if (qe != n) {
      if (a(n) != a(qe) * a(n / qe)) fail(qe, n / qe);
      continue;
    }
    if (e == 1) continue;
    Integer expect = a(q) * a(n / q);
    if (r.level % q != 0) {
      Integer qk;
      mpz_ui_pow_ui(qk.get_mpz_t(), static_cast<unsigned long>(q), static_cast<unsigned long>(r.weight - 1));
      expect -= qk * a(n / q / q);
    }
    if (a(n) != expect) fail(q, e);
  }
}

Eigensystem record_eigensystem(const NewformRecord& r) {
  Eigensystem e;
  e.level = r.level;
  e.weight = r.weight;
  e.bound = r.bound;
  e.label = r.label;
  for (auto q : prime_divisors(r.level)) e.new_at.insert(q);
  for (auto q : primes_up_to(r.bound)) e.eigenvalues[q] = r.an[static_cast<std::size_t>(q - 1)];
  return e;
}

std::vector<NewformRecord> ingest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto records = parse_records(ss.str());
  for (const auto& r : records) validate_record(r);
  return records;
}

// ------------------------------------------------------------ registry

namespace {

fs::path env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? fs::path(v) : fs::path(fallback);
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::CacheError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::CacheError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

fs::path RecordRegistry::default_root() { return env_or("HLR_DATA_DIR", "hlr-data"); }

void RecordRegistry::add(const NewformRecord& r) const {
  write_atomically(root_ / "records" / (r.label + ".json"), record_to_json(r).dump() + "\n");
}

std::optional<NewformRecord> RecordRegistry::find(const std::string& label) const {
  auto text = read_file(root_ / "records" / (label + ".json"));
  if (!text) return std::nullopt;
  auto records = parse_records(*text);
  validate_record(records.front());
  return records.front();
}

// ------------------------------------------------------------ cache

namespace {

std::string checksum(const std::string& payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

constexpr const char* kMagic = "HLRCACHE";

}  // namespace

std::string serialize_decomposition(const NewformDecomposition& d) {
  std::ostringstream out;
  out << kMagic << ' ' << kEngineVersion << '\n';
  out << d.level << ' ' << d.weight << ' ' << d.cuspidal_dim << ' ' << d.new_dim << ' ' << d.undecomposed_dim << '\n';
  out << d.forms.size() << '\n';
  for (const auto& f : d.forms) {
    out << f.label << ' ' << f.level << ' ' << f.weight << ' ' << f.bound << ' ' << f.new_at.size();
    for (auto q : f.new_at) out << ' ' << q;
    out << ' ' << f.eigenvalues.size();
    for (const auto& [q, a] : f.eigenvalues) out << ' ' << q << ' ' << a.get_str();
    out << '\n';
  }
  const QMatrix& u = d.undecomposed_space.basis();
  out << d.undecomposed_space.ambient_dim() << ' ' << u.rows() << '\n';
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) out << (j ? " " : "") << u(i, j).get_str();
    out << '\n';
  }
  std::string payload = out.str();
  return payload + "CRC " + checksum(payload) + "\n";
}

NewformDecomposition deserialize_decomposition(const std::string& bytes) {
  auto bad = [](const std::string& what) { return Error(ErrorKind::CacheError, what); };
  auto pos = bytes.rfind("CRC ");
  if (pos == std::string::npos) throw bad("missing checksum footer");
  std::string payload = bytes.substr(0, pos);
  std::string footer = bytes.substr(pos + 4);
  while (!footer.empty() && footer.back() == '\n') footer.pop_back();
  if (footer != checksum(payload)) throw bad("checksum mismatch");

  std::istringstream in(payload);
  std::string magic, version;
  in >> magic >> version;
  if (magic != kMagic) throw bad("not a cache file");
  if (version != kEngineVersion) throw bad("engine version mismatch");
  NewformDecomposition d;
  std::size_t nforms = 0;
  in >> d.level >> d.weight >> d.cuspidal_dim >> d.new_dim >> d.undecomposed_dim >> nforms;
  for (std::size_t i = 0; i < nforms && in; ++i) {
    Eigensystem f;
    std::size_t nnew = 0, neig = 0;
    in >> f.label >> f.level >> f.weight >> f.bound >> nnew;
    for (std::size_t j = 0; j < nnew; ++j) {
      std::int64_t q = 0;
      in >> q;
      f.new_at.insert(q);
    }
    in >> neig;
    for (std::size_t j = 0; j < neig; ++j) {
      std::int64_t q = 0;
      std::string a;
      in >> q >> a;
      f.eigenvalues[q] = Integer(a);
    }
    d.forms.push_back(std::move(f));
  }
  std::size_t ambient = 0, rows = 0;
  in >> ambient >> rows;
  std::vector<QVector> vecs(rows, QVector(ambient));
  for (auto& v : vecs)
    for (auto& x : v) {
      std::string s;
      in >> s;
      x = Rational(s);
      x.canonicalize();
    }
  if (!in) throw bad("truncated payload");
  d.undecomposed_space = Subspace::span(ambient, vecs);
  return d;
}

fs::path DiskCache::default_root() { return env_or("HLR_CACHE_DIR", "cache"); }

fs::path DiskCache::path_for(std::int64_t level, int weight) const {
  return root_ / kEngineVersion / (std::to_string(level) + "." + std::to_string(weight) + ".bin");
}

std::optional<NewformDecomposition> DiskCache::load(std::int64_t level, int weight) {
  const fs::path path = path_for(level, weight);
  auto bytes = read_file(path);
  if (!bytes) return std::nullopt;
  try {
    auto d = deserialize_decomposition(*bytes);
    if (d.level != level || d.weight != weight) return std::nullopt;
    return d;
  } catch (const Error&) {
    // A damaged entry is a miss; the recomputed result replaces it.
    std::error_code ec;
    fs::remove(path, ec);
    return std::nullopt;
  }
}

void DiskCache::save(const NewformDecomposition& d) {
  try {
    write_atomically(path_for(d.level, d.weight), serialize_decomposition(d));
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::CacheError, e.what());
  }
}

}  // namespace hlr
