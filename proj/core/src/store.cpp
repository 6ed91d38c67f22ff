#include "lodlog/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "lodlog/text.hpp"

namespace lodlog {

namespace {

using nlohmann::json;

std::string make_record_id(const std::string& canonical, const std::string& source,
                           std::size_t line) {
  return to_hex(fnv1a64(canonical + "\n" + source + ":" + std::to_string(line)));
}

} // namespace

StoredQueryRecord to_stored_record(const QueryEntry& entry, const std::string& stage) {
  StoredQueryRecord record;
  record.canonical = canonical_key(entry);
  record.source_path = entry.record.origin.source_path;
  record.line_number = entry.record.origin.line_number;
  record.id = make_record_id(record.canonical, record.source_path, record.line_number);
  record.stage = stage;
  record.text = entry.text;
  record.annotations = entry.annotations;
  if (entry.trust) record.trust = TrustInfo{entry.trust->degree, entry.trust->accepted};
  record.client = entry.record.client;
  record.timestamp = entry.record.timestamp;
  return record;
}

std::string record_to_json_line(const StoredQueryRecord& record) {
  json j;
  j["id"] = record.id;
  j["stage"] = record.stage;
  j["text"] = record.text;
  j["canonical"] = record.canonical;
  j["annotations"] = record.annotations;
  if (record.trust) {
    j["trust"] = {{"num", record.trust->degree.num()},
                  {"den", record.trust->degree.den()},
                  {"accepted", record.trust->accepted}};
  }
  j["source"] = record.source_path;
  j["line"] = record.line_number;
  j["client_kind"] = record.client.is_ip() ? "ip" : "session";
  j["client"] = record.client.value;
  j["timestamp"] = format_iso(record.timestamp);
  return j.dump();
}

StoredQueryRecord record_from_json_line(const std::string& line) {
  json j = json::parse(line);
  StoredQueryRecord record;
  record.id = j.at("id").get<std::string>();
  record.stage = j.at("stage").get<std::string>();
  record.text = j.at("text").get<std::string>();
  record.canonical = j.at("canonical").get<std::string>();
  for (const auto& [key, value] : j.at("annotations").items())
    record.annotations[key] = value.get<std::string>();
  if (j.contains("trust")) {
    const auto& t = j.at("trust");
    record.trust = TrustInfo{Rational(t.at("num").get<std::int64_t>(),
                                      t.at("den").get<std::int64_t>()),
                             t.at("accepted").get<bool>()};
  }
  record.source_path = j.at("source").get<std::string>();
  record.line_number = j.at("line").get<std::size_t>();
  std::string kind = j.at("client_kind").get<std::string>();
  std::string client = j.at("client").get<std::string>();
  record.client =
      kind == "ip" ? ClientIdentity::ip(client) : ClientIdentity::session(client);
  auto ts = parse_iso_time(j.at("timestamp").get<std::string>());
  if (!ts) throw std::runtime_error("record line: bad timestamp");
  record.timestamp = *ts;
  return record;
}

std::string records_to_lines(const std::vector<StoredQueryRecord>& records) {
  std::string out;
  for (const auto& record : records) out += record_to_json_line(record) + "\n";
  return out;
}

std::vector<StoredQueryRecord> records_from_lines(const std::string& content) {
  std::vector<StoredQueryRecord> records;
  for (const auto& line : split(content, '\n')) {
    if (trim(line).empty()) continue;
    records.push_back(record_from_json_line(line));
  }
  return records;
}

// ---------------------------------------------------------------------
// CSV

namespace {

const char* const kCsvHeader =
    "id,stage,source,line,client_kind,client,timestamp,text,canonical,annotations,"
    "trust_degree,trust_accepted";

std::string csv_field(const std::string& value) {
  bool needs_quotes = value.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string annotations_field(const std::map<std::string, std::string>& annotations) {
  std::string out;
  for (const auto& [name, label] : annotations) {
    if (!out.empty()) out += ";";
    out += name + "=" + label;
  }
  return out;
}

std::map<std::string, std::string> annotations_from_field(const std::string& field) {
  std::map<std::string, std::string> out;
  if (field.empty()) return out;
  for (const auto& piece : split(field, ';')) {
    auto eq = piece.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("CSV: bad annotations field '" + field + "'");
    out[piece.substr(0, eq)] = piece.substr(eq + 1);
  }
  return out;
}

// RFC 4180 rows; quoted fields may contain commas and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      // swallowed; \n terminates the row
    } else if (c == '\n') {
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error("CSV: unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

} // namespace

std::string records_to_csv(const std::vector<StoredQueryRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    std::vector<std::string> fields = {
        r.id,
        r.stage,
        r.source_path,
        std::to_string(r.line_number),
        r.client.is_ip() ? "ip" : "session",
        r.client.value,
        format_iso(r.timestamp),
        r.text,
        r.canonical,
        annotations_field(r.annotations),
        r.trust ? r.trust->degree.to_fraction_string() : "",
        r.trust ? (r.trust->accepted ? "true" : "false") : "",
    };
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out += ",";
      out += csv_field(fields[i]);
    }
    out += "\n";
  }
  return out;
}

std::vector<StoredQueryRecord> records_from_csv(const std::string& content) {
  auto rows = parse_csv(content);
  if (rows.empty()) throw std::runtime_error("CSV: missing header");
  std::vector<StoredQueryRecord> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 12)
      throw std::runtime_error("CSV row " + std::to_string(i + 1) + ": expected 12 fields, got " +
                               std::to_string(row.size()));
    StoredQueryRecord r;
    r.id = row[0];
    r.stage = row[1];
    r.source_path = row[2];
    r.line_number = static_cast<std::size_t>(std::stoull(row[3]));
    r.client = row[4] == "ip" ? ClientIdentity::ip(row[5]) : ClientIdentity::session(row[5]);
    auto ts = parse_iso_time(row[6]);
    if (!ts) throw std::runtime_error("CSV row " + std::to_string(i + 1) + ": bad timestamp");
    r.timestamp = *ts;
    r.text = row[7];
    r.canonical = row[8];
    r.annotations = annotations_from_field(row[9]);
    if (!row[10].empty()) {
      auto slash = row[10].find('/');
      if (slash == std::string::npos)
        throw std::runtime_error("CSV row " + std::to_string(i + 1) + ": bad trust degree");
      r.trust = TrustInfo{Rational(std::stoll(row[10].substr(0, slash)),
                                   std::stoll(row[10].substr(slash + 1))),
                          row[11] == "true"};
    }
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------
// RunStore

RunStore RunStore::create(const std::filesystem::path& parent, const std::string& run_id) {
  if (run_id.empty()) throw std::runtime_error("run id must not be empty");
  std::filesystem::path dir = parent / ("run-" + run_id);
  std::filesystem::create_directories(dir);
  return RunStore(dir);
}

RunStore RunStore::open(const std::filesystem::path& run_dir) {
  if (!std::filesystem::is_directory(run_dir))
    throw std::runtime_error("run directory not found: " + run_dir.string());
  return RunStore(run_dir);
}

void RunStore::write_atomic(const std::string& file_name, const std::string& content) {
  std::filesystem::path final_path = dir_ / file_name;
  std::filesystem::path tmp_path = dir_ / (file_name + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp_path.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

std::string RunStore::write_stage(const std::string& stage_name,
                                  const std::vector<QueryEntry>& entries) {
  std::vector<StoredQueryRecord> records;
  records.reserve(entries.size());
  for (const auto& entry : entries) records.push_back(to_stored_record(entry, stage_name));
  return write_snapshot("stage-" + stage_name + ".records", records);
}

std::string RunStore::write_snapshot(const std::string& file_name,
                                     const std::vector<StoredQueryRecord>& records) {
  write_atomic(file_name, records_to_lines(records));
  return file_name;
}

std::vector<StoredQueryRecord> RunStore::read_snapshot(const std::string& file_name) const {
  std::filesystem::path path = dir_ / file_name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return records_from_lines(buf.str());
}

bool RunStore::has_snapshot(const std::string& file_name) const {
  return std::filesystem::exists(dir_ / file_name);
}

void RunStore::write_text(const std::string& file_name, const std::string& content) {
  write_atomic(file_name, content);
}

std::string RunStore::read_text(const std::string& file_name) const {
  std::filesystem::path path = dir_ / file_name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> RunStore::snapshot_files() const {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    std::string name = entry.path().filename().string();
    if (name.size() > 8 && name.substr(name.size() - 8) == ".records") names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::string export_records(const std::vector<StoredQueryRecord>& records, ExportFormat format) {
  return format == ExportFormat::Csv ? records_to_csv(records) : records_to_lines(records);
}

std::vector<StoredQueryRecord> import_records(const std::string& content, ExportFormat format) {
  return format == ExportFormat::Csv ? records_from_csv(content) : records_from_lines(content);
}

} // namespace lodlog
