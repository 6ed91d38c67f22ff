#include "lodlog/curation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lodlog/labels.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

QueryEntry make_entry(const LogRecord& record, std::string query_text, std::size_t ordinal) {
  QueryEntry entry;
  std::string origin = record.origin.source_path + ":" +
                       std::to_string(record.origin.line_number) + ":" + query_text;
  char ord[16];
  std::snprintf(ord, sizeof(ord), "e%06zu", ordinal);
  entry.entry_id = std::string(ord) + "-" + to_hex(fnv1a64(origin));
  entry.record = record;
  entry.text = std::move(query_text);
  if (const auto* q = get_query(parse_query(entry.text))) entry.parsed = *q;
  return entry;
}

std::string canonical_key(const QueryEntry& entry) {
  if (entry.parsed) return canonicalize(*entry.parsed);
  return collapse_whitespace(entry.text);
}

std::string client_key(const ClientIdentity& client) {
  return (client.is_ip() ? "ip:" : "session:") + client.value;
}

const std::vector<CurationOperator>& operator_registry() {
  static const std::vector<CurationOperator> registry = {
      {"robot-cleaner", OperatorKind::Cleaner, OperatorScope::WholeCollection, "behavior"},
      {"organism-extractor", OperatorKind::Cleaner, OperatorScope::PerQuery, "organism"},
      {"vulnerability-cleaner", OperatorKind::Cleaner, OperatorScope::PerQuery, "vulnerability"},
      {"deduplicator", OperatorKind::Cleaner, OperatorScope::WholeCollection, "duplication"},
      {"correctors", OperatorKind::Transformer, OperatorScope::PerQuery, "syntax+semantics"},
      {"topic-annotator", OperatorKind::Annotator, OperatorScope::PerQuery, "topic"},
      {"schema-annotator", OperatorKind::Annotator, OperatorScope::PerQuery, "schema"},
      {"complexity-annotator", OperatorKind::Annotator, OperatorScope::PerQuery, "shape"},
      {"querytype-annotator", OperatorKind::Annotator, OperatorScope::PerQuery, "query_type"},
      {"expertise-annotator", OperatorKind::Annotator, OperatorScope::PerQuery, "expertise"},
  };
  return registry;
}

const CurationOperator* find_operator(const std::string& name) {
  for (const auto& op : operator_registry())
    if (op.name == name) return &op;
  return nullptr;
}

PipelineConfig PipelineConfig::default_config() {
  PipelineConfig config;
  config.operators = {
      {"robot-cleaner", std::set<std::string>{"Organic"}, {}},
      {"organism-extractor", std::set<std::string>{"Academic", "Unknown"}, {}},
      {"vulnerability-cleaner", std::set<std::string>{"Safe", "Unknown"}, {}},
      {"deduplicator", std::set<std::string>{"Unique"}, {}},
      {"correctors", std::nullopt, {}},
      {"topic-annotator", std::nullopt, {}},
      {"schema-annotator", std::nullopt, {}},
      {"complexity-annotator", std::nullopt, {}},
      {"querytype-annotator", std::nullopt, {}},
  };
  return config;
}

PipelineConfig parse_pipeline_config(std::string_view content) {
  PipelineConfig config;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string kind;
    in >> kind;
    auto bad = [&](const std::string& why) {
      return std::runtime_error("pipeline config line " + std::to_string(line_no) + ": " + why);
    };
    if (kind == "operator") {
      OperatorConfig op;
      in >> op.name;
      if (op.name.empty()) throw bad("operator needs a name");
      std::string word;
      if (in >> word) {
        if (word != "keep") throw bad("expected 'keep', got '" + word + "'");
        std::string labels;
        in >> labels;
        auto parsed = split_list(labels);
        if (parsed.empty()) throw bad("empty keep set");
        op.keep = std::set<std::string>(parsed.begin(), parsed.end());
      }
      config.operators.push_back(std::move(op));
    } else if (kind == "param") {
      std::string op_name, key, value;
      in >> op_name >> key >> value;
      if (value.empty()) throw bad("expected 'param <operator> <key> <value>'");
      bool found = false;
      for (auto& op : config.operators) {
        if (op.name == op_name) {
          op.params[key] = value;
          found = true;
          break;
        }
      }
      if (!found) throw bad("param for operator '" + op_name + "' before its 'operator' line");
    } else {
      throw bad("unknown entry '" + kind + "'");
    }
  }
  validate_pipeline_config(config);
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open pipeline config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str());
}

namespace {

long parse_long_param(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("pipeline config: bad value '" + value + "' for " + what);
  }
}

BehaviorConfig behavior_config_from(const OperatorConfig& op, const CurationContext& ctx) {
  BehaviorConfig config;
  if (ctx.provenance) config.bot_agent_patterns = ctx.provenance->bot_agent_patterns;
  for (const auto& [key, value] : op.params) {
    if (key == "window_ms") config.window_ms = parse_long_param(value, key);
    else if (key == "rate_threshold") config.rate_threshold = static_cast<std::size_t>(parse_long_param(value, key));
    else if (key == "gap_tolerance_ms") config.gap_tolerance_ms = parse_long_param(value, key);
    else if (key == "min_equal_gaps") config.min_equal_gaps = static_cast<std::size_t>(parse_long_param(value, key));
  }
  return config;
}

ExpertiseWeights expertise_weights_from(const OperatorConfig& op) {
  ExpertiseWeights w;
  for (const auto& [key, value] : op.params) {
    if (key == "pattern_weight") w.pattern_weight = static_cast<int>(parse_long_param(value, key));
    else if (key == "clause_weight") w.clause_weight = static_cast<int>(parse_long_param(value, key));
    else if (key == "advanced_weight") w.advanced_weight = static_cast<int>(parse_long_param(value, key));
    else if (key == "beginner_max") w.beginner_max = static_cast<int>(parse_long_param(value, key));
    else if (key == "expert_min") w.expert_min = static_cast<int>(parse_long_param(value, key));
  }
  return w;
}

const std::map<std::string, std::set<std::string>>& known_param_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"robot-cleaner", {"window_ms", "rate_threshold", "gap_tolerance_ms", "min_equal_gaps"}},
      {"expertise-annotator",
       {"pattern_weight", "clause_weight", "advanced_weight", "beginner_max", "expert_min"}},
  };
  return keys;
}

void annotate_if_missing(QueryEntry& entry, std::string_view analyzer_name,
                         const std::string& label) {
  entry.annotations.emplace(std::string(analyzer_name), label);
}

void annotate_provider(QueryEntry& entry, const CurationContext& ctx) {
  static const ProvenanceDirectory empty_directory;
  const ProvenanceDirectory& dir = ctx.provenance ? *ctx.provenance : empty_directory;
  auto [vulnerability, organism] = classify_provider(entry.record.client, dir);
  annotate_if_missing(entry, analyzer::vulnerability, vulnerability);
  annotate_if_missing(entry, analyzer::organism, organism);
}

void annotate_behavior_labels(std::vector<QueryEntry>& entries, const OperatorConfig& op,
                              const CurationContext& ctx) {
  BehaviorConfig config = behavior_config_from(op, ctx);

  std::map<std::string, std::vector<const QueryEntry*>> by_client;
  for (const auto& entry : entries)
    by_client[client_key(entry.record.client)].push_back(&entry);

  std::map<std::string, std::string> verdict_by_client;
  for (const auto& [key, group] : by_client) {
    std::vector<ClientRequest> history;
    history.reserve(group.size());
    for (const auto* entry : group)
      history.push_back({entry->record.timestamp, entry->record.user_agent});
    std::sort(history.begin(), history.end(),
              [](const ClientRequest& a, const ClientRequest& b) {
                return a.timestamp.epoch_ms < b.timestamp.epoch_ms;
              });
    verdict_by_client[key] = analyze_behavior(history, config);
  }
  for (auto& entry : entries)
    annotate_if_missing(entry, analyzer::behavior,
                        verdict_by_client[client_key(entry.record.client)]);
}

void annotate_correctors(QueryEntry& entry, const CurationContext& ctx) {
  if (entry.annotations.count(std::string(analyzer::syntax)) == 0) {
    if (entry.parsed) {
      entry.annotations[std::string(analyzer::syntax)] = "Correct";
    } else {
      CorrectionResult result = correct_syntax(entry.text);
      if (result.status == CorrectionResult::Status::Corrected) {
        entry.text = result.text;
        if (const auto* q = get_query(parse_query(entry.text))) entry.parsed = *q;
        entry.annotations[std::string(analyzer::syntax)] = "Corrected";
      } else if (result.status == CorrectionResult::Status::AlreadyCorrect) {
        // correct_syntax re-parsed successfully: adopt the parse
        if (const auto* q = get_query(parse_query(entry.text))) entry.parsed = *q;
        entry.annotations[std::string(analyzer::syntax)] = "Correct";
      } else {
        entry.annotations[std::string(analyzer::syntax)] = "Wrong";
      }
    }
  }

  if (entry.annotations.count(std::string(analyzer::semantics)) == 0) {
    std::string label;
    if (!entry.parsed) {
      label = "Wrong";  // nothing to check; mirrors the published annotation vectors
    } else if (!ctx.vocabulary || ctx.vocabulary->empty()) {
      label = "Correct";  // no vocabulary, nothing can violate it
    } else {
      SemanticReport report = check_semantics(*entry.parsed, *ctx.vocabulary);
      if (report.status == SemanticReport::Status::Correct) {
        label = "Correct";
      } else {
        CorrectionResult result = correct_semantics(*entry.parsed, *ctx.vocabulary);
        if (result.status == CorrectionResult::Status::Corrected) {
          entry.text = result.text;
          if (const auto* q = get_query(parse_query(entry.text))) entry.parsed = *q;
          label = "Corrected";
        } else {
          label = "Wrong";
        }
      }
    }
    entry.annotations[std::string(analyzer::semantics)] = label;
  }
}

void annotate_per_query(QueryEntry& entry, const std::string& op_name,
                        const OperatorConfig& op, const CurationContext& ctx) {
  static const TopicLexicon empty_lexicon;
  if (op_name == "organism-extractor" || op_name == "vulnerability-cleaner") {
    annotate_provider(entry, ctx);
  } else if (op_name == "correctors") {
    annotate_correctors(entry, ctx);
  } else if (op_name == "topic-annotator") {
    const TopicLexicon& lexicon = ctx.topics ? *ctx.topics : empty_lexicon;
    annotate_if_missing(entry, analyzer::topic,
                        entry.parsed ? assign_topic(*entry.parsed, lexicon) : "None");
  } else if (op_name == "schema-annotator") {
    annotate_if_missing(
        entry, analyzer::schema,
        entry.parsed ? classify_schema_informativeness(*entry.parsed) : "NonInformative");
  } else if (op_name == "complexity-annotator") {
    annotate_if_missing(entry, analyzer::shape,
                        entry.parsed ? classify_shape(*entry.parsed) : "Simple");
  } else if (op_name == "querytype-annotator") {
    annotate_if_missing(entry, analyzer::query_type,
                        entry.parsed ? classify_query_type(*entry.parsed) : "Standard");
  } else if (op_name == "expertise-annotator") {
    annotate_if_missing(entry, analyzer::expertise,
                        entry.parsed ? classify_expertise(*entry.parsed, expertise_weights_from(op))
                                     : "Beginner");
  }
}

} // namespace

void validate_pipeline_config(const PipelineConfig& config) {
  for (const auto& op : config.operators) {
    const CurationOperator* registered = find_operator(op.name);
    if (!registered)
      throw std::runtime_error("pipeline config: unknown operator '" + op.name + "'");
    if (op.keep) {
      if (registered->kind == OperatorKind::Transformer)
        throw std::runtime_error("pipeline config: '" + op.name + "' transforms, it cannot filter");
      for (const auto& label : *op.keep)
        if (!is_valid_label(registered->analyzer, label))
          throw std::runtime_error("pipeline config: label '" + label + "' not in the " +
                                   registered->analyzer + " vocabulary");
    }
    auto known = known_param_keys().find(op.name);
    for (const auto& [key, value] : op.params) {
      if (known == known_param_keys().end() || known->second.count(key) == 0)
        throw std::runtime_error("pipeline config: unknown param '" + key + "' for '" +
                                 op.name + "'");
      parse_long_param(value, key);
    }
  }
}

OperatorResult apply_operator(const OperatorConfig& config, std::vector<QueryEntry> entries,
                              const CurationContext& ctx) {
  const CurationOperator* registered = find_operator(config.name);
  if (!registered) throw std::runtime_error("unknown operator '" + config.name + "'");

  // annotate
  if (config.name == "robot-cleaner") {
    annotate_behavior_labels(entries, config, ctx);
  } else if (config.name == "deduplicator") {
    std::vector<std::string> keys;
    keys.reserve(entries.size());
    for (const auto& entry : entries) keys.push_back(canonical_key(entry));
    auto verdicts = find_duplicates_by_key(keys);
    for (std::size_t i = 0; i < entries.size(); ++i)
      annotate_if_missing(entries[i], analyzer::duplication, verdicts[i].label);
  } else {
    for (auto& entry : entries) annotate_per_query(entry, config.name, config, ctx);
  }

  // filter
  OperatorResult result;
  if (!config.keep) {
    result.kept = std::move(entries);
    return result;
  }
  const std::string analyzer_name =
      registered->analyzer == "syntax+semantics" ? "syntax" : registered->analyzer;
  for (auto& entry : entries) {
    auto it = entry.annotations.find(analyzer_name);
    const bool keep = it != entry.annotations.end() && config.keep->count(it->second) > 0;
    if (keep)
      result.kept.push_back(std::move(entry));
    else
      result.dropped_ids.push_back(entry.entry_id);
  }
  return result;
}

PipelineResult run_pipeline(std::vector<QueryEntry> entries, const PipelineConfig& config,
                            const CurationContext& ctx, SnapshotSink* sink) {
  validate_pipeline_config(config);

  PipelineResult result;
  std::size_t stage_index = 0;
  for (const auto& op : config.operators) {
    StageTrace trace;
    trace.operator_name = op.name;
    trace.input_count = entries.size();

    std::set<std::string> input_ids;
    for (const auto& entry : entries) input_ids.insert(entry.entry_id);

    OperatorResult applied = apply_operator(op, std::move(entries), ctx);
    entries = std::move(applied.kept);
    trace.output_count = entries.size();
    trace.dropped_ids = std::move(applied.dropped_ids);

    // conservation: input ids = output ids (disjoint) union dropped ids
    if (trace.output_count + trace.dropped_ids.size() != trace.input_count)
      throw std::logic_error("pipeline stage '" + op.name + "' lost or duplicated entries");
    for (const auto& entry : entries) input_ids.erase(entry.entry_id);
    for (const auto& id : trace.dropped_ids) input_ids.erase(id);
    if (!input_ids.empty())
      throw std::logic_error("pipeline stage '" + op.name + "' broke id conservation");

    if (sink) {
      char prefix[16];
      std::snprintf(prefix, sizeof(prefix), "%02zu", ++stage_index);
      trace.snapshot = sink->write_stage(std::string(prefix) + "-" + op.name, entries);
    } else {
      ++stage_index;
    }
    result.run.stages.push_back(std::move(trace));
  }
  result.entries = std::move(entries);
  return result;
}

void annotate_missing(std::vector<QueryEntry>& entries, const CurationContext& ctx) {
  OperatorConfig defaults;
  for (auto& entry : entries) {
    annotate_provider(entry, ctx);
    annotate_correctors(entry, ctx);
    for (const char* name : {"topic-annotator", "schema-annotator", "complexity-annotator",
                             "querytype-annotator", "expertise-annotator"})
      annotate_per_query(entry, name, defaults, ctx);
  }
  // collection-scoped labels
  bool need_behavior = false;
  bool need_duplication = false;
  for (const auto& entry : entries) {
    need_behavior |= entry.annotations.count(std::string(analyzer::behavior)) == 0;
    need_duplication |= entry.annotations.count(std::string(analyzer::duplication)) == 0;
  }
  if (need_behavior) {
    OperatorConfig robot{"robot-cleaner", std::nullopt, {}};
    annotate_behavior_labels(entries, robot, ctx);
  }
  if (need_duplication) {
    std::vector<std::string> keys;
    keys.reserve(entries.size());
    for (const auto& entry : entries) keys.push_back(canonical_key(entry));
    auto verdicts = find_duplicates_by_key(keys);
    for (std::size_t i = 0; i < entries.size(); ++i)
      annotate_if_missing(entries[i], analyzer::duplication, verdicts[i].label);
  }
}

std::string PipelineRun::to_text() const {
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageTrace& stage = stages[i];
    out += "stage " + std::to_string(i + 1) + " " + stage.operator_name + " in " +
           std::to_string(stage.input_count) + " out " + std::to_string(stage.output_count);
    out += " dropped";
    if (stage.dropped_ids.empty()) {
      out += " -";
    } else {
      for (const auto& id : stage.dropped_ids) out += " " + id;
    }
    if (!stage.snapshot.empty()) out += " snapshot " + stage.snapshot;
    out += "\n";
  }
  return out;
}

} // namespace lodlog
