#include "lodlog/analytics.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "lodlog/profiling.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

namespace {

// Most specific constant describing a variable: its rdf:type object,
// else the predicate of the first pattern the variable occurs in, else
// the variable name itself.
std::string fact_for_variable(const ParsedQuery& q, const std::string& variable) {
  for (const auto& p : q.bgp) {
    if (p.subject.is_variable() && p.subject.value == variable && !p.is_path &&
        p.predicate.is_iri() && p.predicate.value == rdf_type_iri && p.object.is_iri())
      return local_name(p.object.value);
  }
  for (const auto& p : q.bgp) {
    bool touches = (p.subject.is_variable() && p.subject.value == variable) ||
                   (p.object.is_variable() && p.object.value == variable);
    if (touches && p.predicate.is_iri() && !p.is_path) return local_name(p.predicate.value);
  }
  return variable;
}

// Fact fallback for COUNT(*): first rdf:type class, else first constant
// predicate, else "*".
std::string fact_for_star(const ParsedQuery& q) {
  for (const auto& p : q.bgp)
    if (!p.is_path && p.predicate.is_iri() && p.predicate.value == rdf_type_iri &&
        p.object.is_iri())
      return local_name(p.object.value);
  for (const auto& p : q.bgp)
    if (p.predicate.is_iri() && !p.is_path) return local_name(p.predicate.value);
  return "*";
}

} // namespace

std::optional<MDPattern> extract_md_pattern(const ParsedQuery& q,
                                            const std::string& source_query_id) {
  if (classify_query_type(q) != "Analytic") return std::nullopt;

  MDPattern pattern;
  pattern.source_query_id = source_query_id;

  std::set<std::string> bgp_vars = q.bgp_variables();
  for (const auto& item : q.projection) {
    if (!item.is_aggregate()) continue;
    const auto& agg = *item.aggregate;
    if (agg.variable != "*" && bgp_vars.count(agg.variable) == 0)
      throw std::runtime_error("md extraction: aggregated variable ?" + agg.variable +
                               " does not occur in the graph pattern");
    pattern.measures.emplace_back(agg.function, agg.variable);
  }
  // GROUP BY without an explicit aggregate still aggregates: record the
  // implied row count.
  if (pattern.measures.empty()) pattern.measures.emplace_back("COUNT", "*");

  const auto& [first_function, first_variable] = pattern.measures.front();
  pattern.fact =
      first_variable == "*" ? fact_for_star(q) : fact_for_variable(q, first_variable);

  std::set<std::string> seen_dimensions;
  for (const auto& g : q.group_by) {
    if (!seen_dimensions.insert(g).second) continue;
    pattern.dimensions.push_back(g);
    for (const auto& p : q.bgp) {
      if (p.subject.is_variable() && p.subject.value == g && p.predicate.is_iri() && !p.is_path)
        pattern.dimension_attributes.emplace_back(g, local_name(p.predicate.value));
    }
  }
  return pattern;
}

std::set<std::string> pattern_tokens(const MDPattern& pattern) {
  std::set<std::string> tokens = tokenize_words(pattern.fact);
  for (const auto& d : pattern.dimensions) {
    auto more = tokenize_words(d);
    tokens.insert(more.begin(), more.end());
  }
  return tokens;
}

double pattern_similarity(const MDPattern& a, const MDPattern& b) {
  return jaccard(pattern_tokens(a), pattern_tokens(b));
}

std::vector<std::vector<std::size_t>> group_patterns(const std::vector<MDPattern>& patterns,
                                                     double similarity_threshold) {
  const std::size_t n = patterns.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  std::vector<std::set<std::string>> tokens(n);
  for (std::size_t i = 0; i < n; ++i) tokens[i] = pattern_tokens(patterns[i]);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (jaccard(tokens[i], tokens[j]) >= similarity_threshold) {
        std::size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(by_root.size());
  for (auto& [root, members] : by_root) groups.push_back(std::move(members));
  return groups;
}

MDSummary md_summary(const std::vector<MDPattern>& patterns) {
  MDSummary summary;
  std::set<std::string> facts;
  std::set<std::string> dimensions;
  std::set<std::pair<std::string, std::string>> attributes;
  std::set<std::string> measures;
  for (const auto& p : patterns) {
    facts.insert(p.fact);
    for (const auto& d : p.dimensions) dimensions.insert(d);
    for (const auto& a : p.dimension_attributes) attributes.insert(a);
    for (const auto& [fn, var] : p.measures) measures.insert(p.fact + "|" + fn + "|" + var);
  }
  summary.facts = facts.size();
  summary.dimensions = dimensions.size();
  summary.dimension_attributes = attributes.size();
  summary.fact_attributes = 0;
  summary.measures = measures.size();
  return summary;
}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::size_t> group_of_each(const std::vector<MDPattern>& patterns,
                                       const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<std::size_t> group_id(patterns.size(), 0);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t member : groups[g]) group_id[member] = g + 1;
  return group_id;
}

} // namespace

std::string md_report_text(const std::vector<MDPattern>& patterns,
                           const std::vector<std::vector<std::size_t>>& groups) {
  MDSummary summary = md_summary(patterns);
  std::string out;
  out += "md facts " + std::to_string(summary.facts) + "\n";
  out += "md dimensions " + std::to_string(summary.dimensions) + "\n";
  out += "md dimension_attributes " + std::to_string(summary.dimension_attributes) + "\n";
  out += "md fact_attributes " + std::to_string(summary.fact_attributes) + "\n";
  out += "md measures " + std::to_string(summary.measures) + "\n";
  out += "md groups " + std::to_string(groups.size()) + "\n";

  auto group_id = group_of_each(patterns, groups);
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    std::vector<std::string> measure_texts;
    for (const auto& [fn, var] : p.measures) measure_texts.push_back(fn + "(" + var + ")");
    std::vector<std::string> attribute_texts;
    for (const auto& [dim, attr] : p.dimension_attributes)
      attribute_texts.push_back(dim + "." + attr);
    out += "pattern group=" + std::to_string(group_id[i]) + " fact=" + p.fact +
           " measures=" + join(measure_texts, ",") + " dimensions=" + join(p.dimensions, ",") +
           " dimension_attributes=" + join(attribute_texts, ",") +
           " source=" + p.source_query_id + "\n";
  }
  return out;
}

std::string md_report_csv(const std::vector<MDPattern>& patterns,
                          const std::vector<std::vector<std::size_t>>& groups) {
  std::string out = "group,fact,measures,dimensions,dimension_attributes,source\n";
  auto group_id = group_of_each(patterns, groups);
  auto quote = [](const std::string& s) { return "\"" + s + "\""; };
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    std::vector<std::string> measure_texts;
    for (const auto& [fn, var] : p.measures) measure_texts.push_back(fn + "(" + var + ")");
    std::vector<std::string> attribute_texts;
    for (const auto& [dim, attr] : p.dimension_attributes)
      attribute_texts.push_back(dim + "." + attr);
    out += std::to_string(group_id[i]) + "," + quote(p.fact) + "," +
           quote(join(measure_texts, ";")) + "," + quote(join(p.dimensions, ";")) + "," +
           quote(join(attribute_texts, ";")) + "," + quote(p.source_query_id) + "\n";
  }
  return out;
}

} // namespace lodlog
