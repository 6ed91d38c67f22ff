#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lodlog/ingest.hpp"
#include "lodlog/rational.hpp"
#include "lodlog/sparql.hpp"

namespace lodlog {

// ---------------------------------------------------------------------
// Join graph and shape classification

// Undirected multigraph over BGP subject/object terms, one edge per
// triple pattern (labeled by pattern index). Predicates are edge labels,
// not nodes.
struct JoinGraph {
  std::vector<std::string> nodes;              // serialized term per node
  std::vector<std::pair<int, int>> edges;      // node indices; edge i = pattern i

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
};

JoinGraph build_join_graph(const std::vector<TriplePattern>& bgp);

// First matching rule in the order Simple, Forrest, Chain, Star, Tree,
// Flower, Bouquet; Bouquet doubles as the terminal bucket so every
// non-empty BGP gets exactly one label (pure cycles land there).
std::string classify_shape(const ParsedQuery& q);
std::string classify_shape(const JoinGraph& graph);

// ---------------------------------------------------------------------
// Behavior analysis

struct BehaviorConfig {
  std::int64_t window_ms = 60'000;   // sliding window length
  std::size_t rate_threshold = 30;   // requests within a window => Robot
  std::int64_t gap_tolerance_ms = 100;
  std::size_t min_equal_gaps = 10;   // consecutive near-equal gaps => Robot
  std::vector<std::string> bot_agent_patterns;  // case-insensitive substrings
};

struct ClientRequest {
  Timestamp timestamp;
  std::optional<std::string> user_agent;
};

// Robot iff a user agent matches a bot pattern, or >= rate_threshold
// requests fall in any sliding window, or >= min_equal_gaps consecutive
// inter-arrival gaps agree within the tolerance. Empty history is
// Organic. History must be sorted by timestamp.
std::string analyze_behavior(const std::vector<ClientRequest>& history,
                             const BehaviorConfig& config);

// ---------------------------------------------------------------------
// Provenance directory

struct CidrRange {
  bool is_v6 = false;
  unsigned char address[16] = {};
  int prefix_length = 0;

  static std::optional<CidrRange> parse(std::string_view text);
  bool contains(std::string_view ip) const;
};

struct ProvenanceDirectory {
  std::vector<CidrRange> blacklist;
  std::vector<std::pair<CidrRange, std::string>> organism_map;  // -> Business|Academic
  std::vector<std::string> bot_agent_patterns;
};

// Lines: "blacklist <CIDR>", "organism <CIDR> <Business|Academic>",
// "botagent <substring>". Organism entries are matched most-specific
// (longest prefix) first, then file order.
ProvenanceDirectory parse_provenance_directory(std::string_view content);
ProvenanceDirectory load_provenance_directory(const std::string& path);

// (vulnerability label, organism label). Session ids and malformed IPs
// map to (Unknown, Unknown).
std::pair<std::string, std::string> classify_provider(const ClientIdentity& client,
                                                      const ProvenanceDirectory& dir);

// ---------------------------------------------------------------------
// Per-query analyzers

std::string classify_query_type(const ParsedQuery& q);

struct ExpertiseWeights {
  int pattern_weight = 1;
  int clause_weight = 2;    // OPTIONAL + FILTER
  int advanced_weight = 3;  // subqueries + property paths + aggregates
  int beginner_max = 3;     // score <= => Beginner
  int expert_min = 10;      // score >= => Expert
};

int expertise_score(const ParsedQuery& q, const ExpertiseWeights& w = {});
std::string classify_expertise(const ParsedQuery& q, const ExpertiseWeights& w = {});

// Informative iff constants fill at least a third of the 3*|bgp| term
// positions and at least one predicate is a constant IRI.
std::string classify_schema_informativeness(const ParsedQuery& q);

struct TopicLexicon {
  std::map<std::string, std::set<std::string>> keywords;  // topic -> lowercase keywords
};

// Lines: "<TopicLabel> <keyword>".
TopicLexicon parse_topic_lexicon(std::string_view content);
TopicLexicon load_topic_lexicon(const std::string& path);

// Tokens fed to topic scoring: local names of constant IRIs and literal
// texts, whole lowercased words plus camelCase segments.
std::set<std::string> query_tokens(const ParsedQuery& q);

// Highest matched-keyword count wins, ties broken by label order,
// "None" when nothing matches.
std::string assign_topic(const ParsedQuery& q, const TopicLexicon& lexicon);

// ---------------------------------------------------------------------
// Duplicate detection

struct DuplicateVerdict {
  std::string label;     // Duplicate | Unique
  std::string group_id;  // hash of the shared canonical form
};

// Queries with identical canonical forms share a group; the first of
// each group (input order) is Unique, the rest Duplicate.
std::vector<DuplicateVerdict> find_duplicates(const std::vector<ParsedQuery>& queries);
std::vector<DuplicateVerdict> find_duplicates_by_key(const std::vector<std::string>& canonical_keys);

// ---------------------------------------------------------------------
// Log interactions

struct LogSummary {
  std::set<std::string> topics;      // assigned topic labels, None excluded
  std::set<std::string> namespaces;  // IRI namespaces used by the queries
};

struct OverlapReport {
  double semantic_overlap = 0.0;  // Jaccard over topic sets
  double source_overlap = 0.0;    // Jaccard over namespace sets
};

OverlapReport log_overlap(const LogSummary& a, const LogSummary& b);

// ---------------------------------------------------------------------
// Profile report

struct ProfileReport {
  std::size_t total = 0;
  // analyzer -> label -> count; every declared analyzer/label pair is
  // present, zero-filled.
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  double duplication_rate = 0.0;
  std::optional<Rational> trust_min;
  std::optional<Rational> trust_max;
  std::optional<Rational> trust_mean;

  // "count <analyzer> <label> <n>" lines plus the header stats.
  std::string to_text() const;
  std::string to_csv() const;
};

// Builds the report from per-query annotation maps (analyzer -> label);
// optional trust degrees feed the trust statistics block.
ProfileReport profile(const std::vector<std::map<std::string, std::string>>& annotations,
                      const std::vector<Rational>& trust_degrees = {});

} // namespace lodlog
