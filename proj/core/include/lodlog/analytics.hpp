#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lodlog/sparql.hpp"

namespace lodlog {

// Multidimensional sketch mined from one analytic query: what is being
// measured, against which grouping dimensions, with which descriptive
// attributes hanging off each dimension.
struct MDPattern {
  std::string fact;
  std::vector<std::pair<std::string, std::string>> measures;  // (function, variable)
  std::vector<std::string> dimensions;
  std::vector<std::pair<std::string, std::string>> dimension_attributes;  // (dimension, attribute)
  std::string source_query_id;

  friend bool operator==(const MDPattern&, const MDPattern&) = default;
};

// Standard queries yield nothing. Analytic queries yield one pattern:
// measures from the projection aggregates, the fact from the rdf:type of
// the aggregated variable (falling back to the binding predicate, then
// the variable name), dimensions from GROUP BY, dimension attributes
// from constant predicates on each dimension variable. Fact attributes
// are always empty. Throws std::runtime_error when an aggregated
// variable does not occur in the BGP.
std::optional<MDPattern> extract_md_pattern(const ParsedQuery& q,
                                            const std::string& source_query_id = "");

// Single-link clusters; patterns link when the token Jaccard of
// {fact} + dimensions reaches the threshold. Returns groups of input
// indices, each index in exactly one group, groups ordered by smallest
// member.
std::vector<std::vector<std::size_t>> group_patterns(const std::vector<MDPattern>& patterns,
                                                     double similarity_threshold);

std::set<std::string> pattern_tokens(const MDPattern& pattern);
double pattern_similarity(const MDPattern& a, const MDPattern& b);

struct MDSummary {
  std::size_t facts = 0;
  std::size_t dimensions = 0;
  std::size_t dimension_attributes = 0;
  std::size_t fact_attributes = 0;  // always 0
  std::size_t measures = 0;         // distinct (fact, function, variable)

  friend bool operator==(const MDSummary&, const MDSummary&) = default;
};

MDSummary md_summary(const std::vector<MDPattern>& patterns);

// The five summary rows plus one record per pattern with its group id.
std::string md_report_text(const std::vector<MDPattern>& patterns,
                           const std::vector<std::vector<std::size_t>>& groups);
std::string md_report_csv(const std::vector<MDPattern>& patterns,
                          const std::vector<std::vector<std::size_t>>& groups);

} // namespace lodlog
