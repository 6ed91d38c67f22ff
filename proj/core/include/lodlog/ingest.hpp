#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lodlog/timeutil.hpp"

namespace lodlog {

enum class LogFormat { Clf, Csv };

std::optional<LogFormat> log_format_from_name(std::string_view name);

// One raw line as read from disk, before any interpretation. Invalid
// UTF-8 bytes have already been replaced with U+FFFD.
struct RawLogLine {
  std::string source_path;
  std::size_t line_number = 0;  // 1-based
  std::string text;
};

// Scholarly-style logs identify clients by IP, DBpedia-style logs by an
// opaque session/user id. Exactly one of the two is populated.
struct ClientIdentity {
  enum class Kind { Ip, Session };
  Kind kind = Kind::Ip;
  std::string value;

  static ClientIdentity ip(std::string addr) { return {Kind::Ip, std::move(addr)}; }
  static ClientIdentity session(std::string id) { return {Kind::Session, std::move(id)}; }
  bool is_ip() const { return kind == Kind::Ip; }

  friend bool operator==(const ClientIdentity&, const ClientIdentity&) = default;
};

struct LogRecord {
  ClientIdentity client;
  Timestamp timestamp;
  std::string http_method;
  std::optional<int> status_code;
  std::optional<std::uint64_t> response_size;
  std::optional<std::string> user_agent;
  std::optional<std::string> raw_query;  // URL-decoded query string
  RawLogLine origin;
};

struct IngestError {
  std::size_t line_number = 0;
  std::string reason;
};

using LineResult = std::variant<LogRecord, IngestError>;

// Per-file parse outcome. One entry per input line, order preserved, so
// |lines| == |records| + |errors| by construction.
struct IngestResult {
  std::vector<LineResult> lines;

  std::size_t line_count() const { return lines.size(); }
  std::size_t record_count() const;
  std::size_t error_count() const;
  std::vector<LogRecord> records() const;
  std::vector<IngestError> errors() const;
};

// Percent-decoding; decode_plus additionally maps '+' to space (form
// encoding, as used in endpoint GET query strings).
std::string url_decode(std::string_view s, bool decode_plus);

// Replace invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

LineResult parse_log_line(const RawLogLine& line, LogFormat format);

// Throws std::runtime_error when the file cannot be opened.
IngestResult parse_log_file(const std::string& path, LogFormat format);

enum class QueryForm;  // sparql.hpp

// Record paired with its decoded SELECT/CONSTRUCT text.
struct ExtractedQuery {
  LogRecord record;
  std::string query_text;
};

struct ExtractionStats {
  std::size_t kept_select = 0;
  std::size_t kept_construct = 0;
  std::size_t discarded_ask = 0;
  std::size_t discarded_describe = 0;
  std::size_t discarded_update = 0;
  std::size_t discarded_non_sparql = 0;
  std::size_t discarded_no_query = 0;

  std::size_t kept() const { return kept_select + kept_construct; }
  std::size_t discarded() const {
    return discarded_ask + discarded_describe + discarded_update +
           discarded_non_sparql + discarded_no_query;
  }
};

struct ExtractionResult {
  std::vector<ExtractedQuery> queries;
  ExtractionStats stats;
};

// Keeps only records whose decoded query text, after optional PREFIX and
// BASE clauses and comments, starts with SELECT or CONSTRUCT.
ExtractionResult extract_queries(const std::vector<LogRecord>& records);

// Leading query-form keyword after PREFIX/BASE clauses: "SELECT",
// "CONSTRUCT", "ASK", "DESCRIBE", "UPDATE" (INSERT/DELETE/...), or ""
// when no SPARQL keyword is found.
std::string leading_query_form(std::string_view query_text);

// One self-describing key/value object per line (UTF-8), the CLI's
// materialized form of a record stream.
std::string record_to_line(const LogRecord& record);

} // namespace lodlog
