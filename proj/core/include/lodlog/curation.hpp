#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lodlog/ingest.hpp"
#include "lodlog/profiling.hpp"
#include "lodlog/sparql.hpp"
#include "lodlog/trust.hpp"

namespace lodlog {

// One query flowing through the pipeline: provenance, current text
// (correctors rewrite it), the parse when one exists, and the
// accumulated annotations. Operators annotate only when the label is
// missing, so feeding a pipeline its own output is a fixed point.
struct QueryEntry {
  std::string entry_id;  // stable pipeline identity (origin-based)
  LogRecord record;
  std::string text;
  std::optional<ParsedQuery> parsed;
  std::map<std::string, std::string> annotations;
  std::optional<TrustVerdict> trust;
};

QueryEntry make_entry(const LogRecord& record, std::string query_text, std::size_t ordinal);

// Canonical form for identity purposes: canonicalize() of the parse, or
// the whitespace-collapsed raw text when the query does not parse.
std::string canonical_key(const QueryEntry& entry);

// Client grouping key for behavior analysis.
std::string client_key(const ClientIdentity& client);

enum class OperatorKind { Cleaner, Transformer, Annotator };
enum class OperatorScope { PerQuery, WholeCollection };

struct CurationOperator {
  std::string name;
  OperatorKind kind;  // default kind; a keep-set turns an Annotator into a Cleaner
  OperatorScope scope;
  std::string analyzer;  // annotation the operator maintains ("syntax+semantics" for correctors)
};

const std::vector<CurationOperator>& operator_registry();
const CurationOperator* find_operator(const std::string& name);

struct OperatorConfig {
  std::string name;
  std::optional<std::set<std::string>> keep;  // absent = keep everything
  std::map<std::string, std::string> params;
};

struct PipelineConfig {
  std::vector<OperatorConfig> operators;

  // The nine published stages in order: robot cleaner, organism
  // extractor, vulnerability cleaner, deduplicator, correctors, then the
  // topic/schema/complexity/query-type annotators.
  static PipelineConfig default_config();
};

// Lines: "operator <name> [keep <label,...>]", "param <operator> <key> <value>".
PipelineConfig parse_pipeline_config(std::string_view content);
PipelineConfig load_pipeline_config(const std::string& path);

// Throws std::runtime_error for unknown operators, labels outside the
// operator's vocabulary, keep-sets on non-filtering operators, or
// malformed parameter values. Runs before any execution.
void validate_pipeline_config(const PipelineConfig& config);

struct StageTrace {
  std::string operator_name;
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  std::vector<std::string> dropped_ids;
  std::string snapshot;  // stage snapshot file, empty when not persisted
};

struct PipelineRun {
  std::vector<StageTrace> stages;
  std::string to_text() const;
};

// External resources the operators draw on; null members disable the
// corresponding checks (no vocabulary -> semantics vacuously Correct,
// no lexicon -> topic None).
struct CurationContext {
  const Vocabulary* vocabulary = nullptr;
  const TopicLexicon* topics = nullptr;
  const ProvenanceDirectory* provenance = nullptr;
};

// Stage snapshot receiver, implemented by the store.
class SnapshotSink {
 public:
  virtual ~SnapshotSink() = default;
  virtual std::string write_stage(const std::string& stage_name,
                                  const std::vector<QueryEntry>& entries) = 0;
};

struct OperatorResult {
  std::vector<QueryEntry> kept;
  std::vector<std::string> dropped_ids;
};

OperatorResult apply_operator(const OperatorConfig& config, std::vector<QueryEntry> entries,
                              const CurationContext& ctx);

struct PipelineResult {
  std::vector<QueryEntry> entries;
  PipelineRun run;
};

PipelineResult run_pipeline(std::vector<QueryEntry> entries, const PipelineConfig& config,
                            const CurationContext& ctx, SnapshotSink* sink = nullptr);

// Fills any annotation the pipeline stages did not produce (notably
// expertise, which trust scoring needs but the published stage list
// omits), so every entry covers the full analyzer roster.
void annotate_missing(std::vector<QueryEntry>& entries, const CurationContext& ctx);

} // namespace lodlog
