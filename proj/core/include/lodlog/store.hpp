#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lodlog/curation.hpp"
#include "lodlog/ingest.hpp"
#include "lodlog/rational.hpp"

namespace lodlog {

struct TrustInfo {
  Rational degree{0, 1};
  bool accepted = false;
};

// One persisted query. The id hashes (canonical form, origin), so it is
// invariant under whitespace and variable renaming of the query text.
struct StoredQueryRecord {
  std::string id;
  std::string stage;
  std::string text;
  std::string canonical;
  std::map<std::string, std::string> annotations;
  std::optional<TrustInfo> trust;
  std::string source_path;
  std::size_t line_number = 0;
  ClientIdentity client;
  Timestamp timestamp;

  friend bool operator==(const StoredQueryRecord&, const StoredQueryRecord&) = default;
};

StoredQueryRecord to_stored_record(const QueryEntry& entry, const std::string& stage);

// Record-lines format: one self-describing JSON object per line.
std::string record_to_json_line(const StoredQueryRecord& record);
StoredQueryRecord record_from_json_line(const std::string& line);
std::string records_to_lines(const std::vector<StoredQueryRecord>& records);
std::vector<StoredQueryRecord> records_from_lines(const std::string& content);

// CSV with RFC 4180 quoting; quoted fields may span lines.
std::string records_to_csv(const std::vector<StoredQueryRecord>& records);
std::vector<StoredQueryRecord> records_from_csv(const std::string& content);

enum class ExportFormat { RecordLines, Csv };

// One run directory: stage snapshots, the trusted/untrusted partitions,
// and report files. Snapshot writes are atomic (temp file + rename);
// snapshots are immutable except for whole-file replacement.
class RunStore : public SnapshotSink {
 public:
  // Creates <parent>/run-<run_id> (parents included). Fails if the id is
  // empty.
  static RunStore create(const std::filesystem::path& parent, const std::string& run_id);
  static RunStore open(const std::filesystem::path& run_dir);

  const std::filesystem::path& dir() const { return dir_; }

  // SnapshotSink: persists "stage-<name>.records", returns the file name.
  std::string write_stage(const std::string& stage_name,
                          const std::vector<QueryEntry>& entries) override;

  std::string write_snapshot(const std::string& file_name,
                             const std::vector<StoredQueryRecord>& records);
  // Throws std::runtime_error when the snapshot does not exist.
  std::vector<StoredQueryRecord> read_snapshot(const std::string& file_name) const;
  bool has_snapshot(const std::string& file_name) const;

  void write_text(const std::string& file_name, const std::string& content);
  std::string read_text(const std::string& file_name) const;

  // Snapshot file names in directory order.
  std::vector<std::string> snapshot_files() const;

 private:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void write_atomic(const std::string& file_name, const std::string& content);

  std::filesystem::path dir_;
};

// Writes a partition in the requested format.
std::string export_records(const std::vector<StoredQueryRecord>& records, ExportFormat format);
std::vector<StoredQueryRecord> import_records(const std::string& content, ExportFormat format);

} // namespace lodlog
