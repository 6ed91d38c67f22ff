#include "lodlog/labels.hpp"

#include <stdexcept>

namespace lodlog {

const std::vector<AnalyzerVocabulary>& analyzer_vocabularies() {
  static const std::vector<AnalyzerVocabulary> vocabularies = {
      {"behavior", {"Robot", "Organic"}},
      {"organism", {"Business", "Academic", "Unknown"}},
      {"vulnerability", {"Vulnerable", "Safe", "Unknown"}},
      {"duplication", {"Duplicate", "Unique"}},
      {"syntax", {"Wrong", "Correct", "Corrected"}},
      {"semantics", {"Wrong", "Correct", "Corrected"}},
      {"topic",
       {"None", "AcademicEvent", "Agent", "CallFor", "Document", "Institute",
        "NonAcademicEvent", "Publication", "Role", "Site", "Track", "Topic"}},
      {"schema", {"Informative", "NonInformative"}},
      {"shape", {"Simple", "Chain", "Star", "Tree", "Flower", "Bouquet", "Forrest"}},
      {"expertise", {"Beginner", "Intermediate", "Expert"}},
      {"query_type", {"Analytic", "Standard"}},
  };
  return vocabularies;
}

const std::vector<std::string>& labels_of(std::string_view analyzer_name) {
  for (const auto& v : analyzer_vocabularies())
    if (v.name == analyzer_name) return v.labels;
  throw std::out_of_range("unknown analyzer: " + std::string(analyzer_name));
}

bool is_known_analyzer(std::string_view analyzer_name) {
  for (const auto& v : analyzer_vocabularies())
    if (v.name == analyzer_name) return true;
  return false;
}

bool is_valid_label(std::string_view analyzer_name, std::string_view label) {
  for (const auto& v : analyzer_vocabularies()) {
    if (v.name != analyzer_name) continue;
    for (const auto& l : v.labels)
      if (l == label) return true;
    return false;
  }
  return false;
}

} // namespace lodlog
