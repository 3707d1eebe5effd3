#pragma once

// Newform interchange records (JSON), ingestion, and the on-disk decomposition cache.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlr/newforms.hpp"
#include "json.hpp"

namespace hlr {

inline constexpr const char* kEngineVersion = "1.0.0";

struct NewformRecord {
  std::string label;
  std::int64_t level = 0;
  int weight = 0;
  std::vector<Integer> an;  // a_1 .. a_B
  std::int64_t bound = 0;
  std::string source = "computed";  // or "ingested"

  bool operator==(const NewformRecord&) const = default;
};

NewformRecord make_record(const Eigensystem& e, std::int64_t b);
nlohmann::ordered_json record_to_json(const NewformRecord& r);

// Accepts a single record object or an array of them. Throws SchemaError naming the
// record index and field (or the parse position).
std::vector<NewformRecord> parse_records(const std::string& text);

// Throws SchemaError when a_1 != 1, RecursionViolation with the first failing pair:
// (q^e, n / q^e) for multiplicativity, (q, e) for the recursion at a_{q^e}.
void validate_record(const NewformRecord& r);

// Eigenvalues at the primes up to the record's bound.
Eigensystem record_eigensystem(const NewformRecord& r);

// Reads, validates and returns the records of a JSON file.
std::vector<NewformRecord> ingest(const std::filesystem::path& path);

// Ingested records by label, one JSON file each under <root>/records.
class RecordRegistry {
 public:
  explicit RecordRegistry(std::filesystem::path root) : root_(std::move(root)) {}
  // HLR_DATA_DIR when set, else ./hlr-data.
  static std::filesystem::path default_root();

  void add(const NewformRecord& r) const;
  std::optional<NewformRecord> find(const std::string& label) const;

 private:
  std::filesystem::path root_;
};

std::string serialize_decomposition(const NewformDecomposition& d);
// Throws CacheError on a bad checksum, version or layout.
NewformDecomposition deserialize_decomposition(const std::string& bytes);

// <root>/<engine-version>/<N>.<k>.bin with a checksum footer; writes are atomic.
class DiskCache : public DecompositionStore {
 public:
  explicit DiskCache(std::filesystem::path root) : root_(std::move(root)) {}
  // HLR_CACHE_DIR when set, else ./cache.
  static std::filesystem::path default_root();

  std::filesystem::path path_for(std::int64_t level, int weight) const;
  std::optional<NewformDecomposition> load(std::int64_t level, int weight) override;
  void save(const NewformDecomposition& d) override;

 private:
  std::filesystem::path root_;
};

}  // namespace hlr
