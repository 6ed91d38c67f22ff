#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lodlog {

// Analyzer names. Every annotation a query carries is keyed by one of
// these, and its value is drawn from the analyzer's closed label set.
namespace analyzer {
inline constexpr std::string_view behavior = "behavior";
inline constexpr std::string_view organism = "organism";
inline constexpr std::string_view vulnerability = "vulnerability";
inline constexpr std::string_view duplication = "duplication";
inline constexpr std::string_view syntax = "syntax";
inline constexpr std::string_view semantics = "semantics";
inline constexpr std::string_view topic = "topic";
inline constexpr std::string_view schema = "schema";
inline constexpr std::string_view shape = "shape";
inline constexpr std::string_view expertise = "expertise";
inline constexpr std::string_view query_type = "query_type";
} // namespace analyzer

struct AnalyzerVocabulary {
  std::string name;
  std::vector<std::string> labels;
};

// All analyzers with their label sets, in the canonical reporting order.
const std::vector<AnalyzerVocabulary>& analyzer_vocabularies();

// Labels of one analyzer; throws std::out_of_range for unknown analyzers.
const std::vector<std::string>& labels_of(std::string_view analyzer_name);

bool is_known_analyzer(std::string_view analyzer_name);
bool is_valid_label(std::string_view analyzer_name, std::string_view label);

} // namespace lodlog
