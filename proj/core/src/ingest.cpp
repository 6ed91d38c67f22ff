#include "lodlog/ingest.hpp"

#include <arpa/inet.h>

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lodlog/text.hpp"

namespace lodlog {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool looks_like_ip(const std::string& s) {
  unsigned char buf[16];
  return inet_pton(AF_INET, s.c_str(), buf) == 1 || inet_pton(AF_INET6, s.c_str(), buf) == 1;
}

// Skips spaces and returns the next space-delimited token.
bool next_token(std::string_view line, std::size_t& pos, std::string& out) {
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (pos >= line.size()) return false;
  std::size_t start = pos;
  while (pos < line.size() && line[pos] != ' ') ++pos;
  out.assign(line.substr(start, pos - start));
  return true;
}

bool next_bracketed(std::string_view line, std::size_t& pos, char open, char close,
                    std::string& out) {
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (pos >= line.size() || line[pos] != open) return false;
  ++pos;
  std::size_t start = pos;
  while (pos < line.size() && line[pos] != close) ++pos;
  if (pos >= line.size()) return false;
  out.assign(line.substr(start, pos - start));
  ++pos;
  return true;
}

std::optional<std::string> query_param_from_path(std::string_view path) {
  auto qmark = path.find('?');
  if (qmark == std::string_view::npos) return std::nullopt;
  std::string_view query_string = path.substr(qmark + 1);
  for (const auto& pair : split(query_string, '&')) {
    auto eq = pair.find('=');
    if (eq == std::string::npos) continue;
    std::string key = url_decode(std::string_view(pair).substr(0, eq), true);
    if (key == "query")
      return url_decode(std::string_view(pair).substr(eq + 1), true);
  }
  return std::nullopt;
}

IngestError err(const RawLogLine& line, std::string reason) {
  return IngestError{line.line_number, std::move(reason)};
}

LineResult parse_clf_line(const RawLogLine& line) {
  std::string_view text = line.text;
  std::size_t pos = 0;

  std::string host, ident, authuser;
  if (!next_token(text, pos, host)) return err(line, "empty line");
  if (!next_token(text, pos, ident)) return err(line, "truncated line: missing identity field");
  if (!next_token(text, pos, authuser)) return err(line, "truncated line: missing user field");
  if (host == "-" || host.empty()) return err(line, "missing client identity");

  std::string time_text;
  if (!next_bracketed(text, pos, '[', ']', time_text))
    return err(line, "missing [timestamp]");
  auto ts = parse_clf_time(time_text);
  if (!ts) return err(line, "bad timestamp '" + time_text + "'");

  std::string request;
  if (!next_bracketed(text, pos, '"', '"', request))
    return err(line, "missing \"request\"");

  std::string status_text, size_text;
  if (!next_token(text, pos, status_text)) return err(line, "missing status code");
  if (!next_token(text, pos, size_text)) return err(line, "missing response size");

  LogRecord record;
  record.origin = line;
  record.client = looks_like_ip(host) ? ClientIdentity::ip(host) : ClientIdentity::session(host);
  record.timestamp = *ts;

  if (status_text != "-") {
    int code = 0;
    for (char c : status_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return err(line, "bad status code '" + status_text + "'");
      code = code * 10 + (c - '0');
    }
    if (code < 100 || code > 599) return err(line, "status code out of range: " + status_text);
    record.status_code = code;
  }
  if (size_text != "-") {
    std::uint64_t size = 0;
    for (char c : size_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return err(line, "bad response size '" + size_text + "'");
      size = size * 10 + static_cast<std::uint64_t>(c - '0');
    }
    record.response_size = size;
  }

  // Request line: METHOD SP path SP protocol. Tolerate a missing protocol.
  auto request_parts = split(collapse_whitespace(request), ' ');
  if (request_parts.empty() || request_parts[0].empty())
    return err(line, "empty request");
  record.http_method = request_parts[0];
  if (request_parts.size() >= 2)
    record.raw_query = query_param_from_path(request_parts[1]);

  // Combined-format tail: "referer" "user-agent".
  std::string referer, agent;
  if (next_bracketed(text, pos, '"', '"', referer) &&
      next_bracketed(text, pos, '"', '"', agent)) {
    if (agent != "-") record.user_agent = agent;
  }
  return record;
}

// CSV columns: client, timestamp, status, url-encoded query.
LineResult parse_csv_line(const RawLogLine& line) {
  if (trim(line.text).empty()) return err(line, "empty line");

  // RFC 4180 field splitting (quoted fields may contain commas).
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  const std::string& text = line.text;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  if (in_quotes) return err(line, "unterminated quoted field");
  if (fields.size() != 4)
    return err(line, "expected 4 CSV columns, got " + std::to_string(fields.size()));

  const std::string client = trim(fields[0]);
  if (client.empty()) return err(line, "missing client identity");
  auto ts = parse_iso_time(trim(fields[1]));
  if (!ts) return err(line, "bad timestamp '" + trim(fields[1]) + "'");

  LogRecord record;
  record.origin = line;
  record.client = looks_like_ip(client) ? ClientIdentity::ip(client) : ClientIdentity::session(client);
  record.timestamp = *ts;
  record.http_method = "GET";

  const std::string status_text = trim(fields[2]);
  if (!status_text.empty() && status_text != "-") {
    int code = 0;
    for (char c : status_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return err(line, "bad status code '" + status_text + "'");
      code = code * 10 + (c - '0');
    }
    if (code < 100 || code > 599) return err(line, "status code out of range: " + status_text);
    record.status_code = code;
  }

  if (!fields[3].empty()) record.raw_query = url_decode(fields[3], true);
  return record;
}

} // namespace

std::optional<LogFormat> log_format_from_name(std::string_view name) {
  if (equals_ci(name, "clf")) return LogFormat::Clf;
  if (equals_ci(name, "csv")) return LogFormat::Csv;
  return std::nullopt;
}

std::size_t IngestResult::record_count() const {
  std::size_t n = 0;
  for (const auto& l : lines) n += std::holds_alternative<LogRecord>(l);
  return n;
}

std::size_t IngestResult::error_count() const { return lines.size() - record_count(); }

std::vector<LogRecord> IngestResult::records() const {
  std::vector<LogRecord> out;
  for (const auto& l : lines)
    if (const auto* r = std::get_if<LogRecord>(&l)) out.push_back(*r);
  return out;
}

std::vector<IngestError> IngestResult::errors() const {
  std::vector<IngestError> out;
  for (const auto& l : lines)
    if (const auto* e = std::get_if<IngestError>(&l)) out.push_back(*e);
  return out;
}

std::string url_decode(std::string_view s, bool decode_plus) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '%') {
      int hi = i + 1 < s.size() ? hex_value(s[i + 1]) : -1;
      int lo = i + 2 < s.size() ? hex_value(s[i + 2]) : -1;
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    if (c == '+' && decode_plus) {
      out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  static const std::string replacement = "\xEF\xBF\xBD";  // U+FFFD
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    unsigned char c = static_cast<unsigned char>(bytes[i]);
    std::size_t len;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    else {
      out += replacement;
      ++i;
      continue;
    }
    if (i + len > bytes.size()) {
      out += replacement;
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(bytes[i + k]) & 0xC0) != 0x80) {
        ok = false;
        break;
      }
    }
    // Reject overlong encodings of the most common shapes.
    if (ok && len == 2 && c < 0xC2) ok = false;
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += replacement;
      ++i;
    }
  }
  return out;
}

LineResult parse_log_line(const RawLogLine& line, LogFormat format) {
  if (trim(line.text).empty()) return IngestError{line.line_number, "empty line"};
  switch (format) {
    case LogFormat::Clf:
      return parse_clf_line(line);
    case LogFormat::Csv:
      return parse_csv_line(line);
  }
  return IngestError{line.line_number, "unknown format"};
}

IngestResult parse_log_file(const std::string& path, LogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log file: " + path);

  IngestResult result;
  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    RawLogLine line{path, line_number, sanitize_utf8(raw)};
    result.lines.push_back(parse_log_line(line, format));
  }
  return result;
}

std::string leading_query_form(std::string_view text) {
  std::size_t pos = 0;
  auto skip_trivia = [&] {
    for (;;) {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos < text.size() && text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
        continue;
      }
      return;
    }
  };
  auto skip_iri = [&] {
    skip_trivia();
    if (pos < text.size() && text[pos] == '<') {
      while (pos < text.size() && text[pos] != '>') ++pos;
      if (pos < text.size()) ++pos;
    }
  };
  auto next_word = [&]() -> std::string_view {
    skip_trivia();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    return text.substr(start, pos - start);
  };

  for (;;) {
    std::size_t mark = pos;
    std::string_view word = next_word();
    if (word.empty()) return "";
    if (equals_ci(word, "PREFIX")) {
      // prefix name up to ':' then the IRI
      skip_trivia();
      while (pos < text.size() && text[pos] != ':' && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos < text.size() && text[pos] == ':') ++pos;
      skip_iri();
      continue;
    }
    if (equals_ci(word, "BASE")) {
      skip_iri();
      continue;
    }
    pos = mark;
    if (equals_ci(word, "SELECT")) return "SELECT";
    if (equals_ci(word, "CONSTRUCT")) return "CONSTRUCT";
    if (equals_ci(word, "ASK")) return "ASK";
    if (equals_ci(word, "DESCRIBE")) return "DESCRIBE";
    if (equals_ci(word, "INSERT") || equals_ci(word, "DELETE") || equals_ci(word, "LOAD") ||
        equals_ci(word, "CLEAR") || equals_ci(word, "DROP") || equals_ci(word, "CREATE"))
      return "UPDATE";
    return "";
  }
}

ExtractionResult extract_queries(const std::vector<LogRecord>& records) {
  ExtractionResult result;
  for (const auto& record : records) {
    if (!record.raw_query || trim(*record.raw_query).empty()) {
      ++result.stats.discarded_no_query;
      continue;
    }
    std::string form = leading_query_form(*record.raw_query);
    if (form == "SELECT") {
      ++result.stats.kept_select;
      result.queries.push_back({record, *record.raw_query});
    } else if (form == "CONSTRUCT") {
      ++result.stats.kept_construct;
      result.queries.push_back({record, *record.raw_query});
    } else if (form == "ASK") {
      ++result.stats.discarded_ask;
    } else if (form == "DESCRIBE") {
      ++result.stats.discarded_describe;
    } else if (form == "UPDATE") {
      ++result.stats.discarded_update;
    } else {
      ++result.stats.discarded_non_sparql;
    }
  }
  return result;
}

std::string record_to_line(const LogRecord& record) {
  nlohmann::json j;
  if (record.client.is_ip())
    j["client_ip"] = record.client.value;
  else
    j["session_id"] = record.client.value;
  j["timestamp"] = format_iso(record.timestamp);
  j["method"] = record.http_method;
  if (record.status_code) j["status"] = *record.status_code;
  if (record.response_size) j["size"] = *record.response_size;
  if (record.user_agent) j["agent"] = *record.user_agent;
  if (record.raw_query) j["query"] = *record.raw_query;
  j["source"] = record.origin.source_path;
  j["line"] = record.origin.line_number;
  return j.dump();
}

} // namespace lodlog
