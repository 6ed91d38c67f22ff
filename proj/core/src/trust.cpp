#include "lodlog/trust.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lodlog/labels.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

TrustPolicy TrustPolicy::default_policy() {
  TrustPolicy policy;
  policy.threshold = Rational(3, 4);
  policy.roster = {"behavior", "organism",  "vulnerability", "duplication",
                   "syntax",   "semantics", "topic",         "schema",
                   "shape",    "expertise", "query_type"};
  policy.favorable["behavior"] = {"Organic"};
  policy.favorable["organism"] = {"Academic", "Unknown"};
  policy.favorable["vulnerability"] = {"Safe", "Unknown"};
  policy.favorable["duplication"] = {"Unique"};
  policy.favorable["syntax"] = {"Correct", "Corrected"};
  policy.favorable["semantics"] = {"Correct", "Corrected"};
  policy.favorable["topic"] = {"AcademicEvent", "Agent",       "CallFor", "Document",
                               "Institute",     "NonAcademicEvent", "Publication",
                               "Role",          "Site",        "Track",   "Topic"};
  policy.favorable["schema"] = {"Informative"};
  policy.favorable["shape"] = {"Simple", "Chain", "Star", "Tree", "Flower", "Bouquet", "Forrest"};
  policy.favorable["expertise"] = {"Beginner", "Intermediate", "Expert"};
  policy.favorable["query_type"] = {"Analytic", "Standard"};
  return policy;
}

void TrustPolicy::validate() const {
  if (roster.empty()) throw std::runtime_error("trust policy: empty roster");
  if (threshold < Rational(0, 1) || Rational(1, 1) < threshold)
    throw std::runtime_error("trust policy: threshold outside [0,1]");
  for (const auto& name : roster) {
    if (!is_known_analyzer(name))
      throw std::runtime_error("trust policy: unknown analyzer '" + name + "'");
    auto it = favorable.find(name);
    if (it == favorable.end())
      throw std::runtime_error("trust policy: no favorable set for roster analyzer '" + name +
                               "'");
    for (const auto& label : it->second)
      if (!is_valid_label(name, label))
        throw std::runtime_error("trust policy: label '" + label + "' not in the " + name +
                                 " vocabulary");
  }
}

TrustPolicy parse_trust_policy(std::string_view content) {
  TrustPolicy policy = TrustPolicy::default_policy();
  bool roster_seen = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string kind;
    in >> kind;
    if (kind == "threshold") {
      std::string value;
      in >> value;
      policy.threshold = Rational::from_decimal_string(value);
    } else if (kind == "favorable") {
      std::string name, labels;
      in >> name >> labels;
      auto parsed = split_list(labels);
      policy.favorable[name] = std::set<std::string>(parsed.begin(), parsed.end());
    } else if (kind == "roster") {
      std::string names;
      in >> names;
      policy.roster = split_list(names);
      roster_seen = true;
    } else {
      throw std::runtime_error("trust policy line " + std::to_string(line_no) +
                               ": unknown entry '" + kind + "'");
    }
  }
  (void)roster_seen;
  policy.validate();
  return policy;
}

TrustPolicy load_trust_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trust policy: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trust_policy(buf.str());
}

std::string trust_policy_to_text(const TrustPolicy& policy) {
  std::string out = "threshold " + policy.threshold.to_display() + "\n";
  std::string roster_line = "roster ";
  for (std::size_t i = 0; i < policy.roster.size(); ++i) {
    if (i > 0) roster_line += ",";
    roster_line += policy.roster[i];
  }
  out += roster_line + "\n";
  for (const auto& name : policy.roster) {
    auto it = policy.favorable.find(name);
    if (it == policy.favorable.end()) continue;
    std::string line = "favorable " + name + " ";
    bool first = true;
    for (const auto& label : it->second) {
      if (!first) line += ",";
      line += label;
      first = false;
    }
    out += line + "\n";
  }
  return out;
}

TrustVerdict compute_trust(const std::map<std::string, std::string>& annotations,
                           const TrustPolicy& policy) {
  if (policy.roster.empty()) throw std::runtime_error("trust policy: empty roster");
  TrustVerdict verdict;
  std::int64_t favorable_count = 0;
  for (const auto& name : policy.roster) {
    auto annotation = annotations.find(name);
    if (annotation == annotations.end())
      throw std::runtime_error("compute_trust: query lacks the '" + name + "' annotation");
    auto favorable = policy.favorable.find(name);
    if (favorable == policy.favorable.end())
      throw std::runtime_error("compute_trust: no favorable set for '" + name + "'");
    int score = favorable->second.count(annotation->second) > 0 ? 1 : 0;
    verdict.contributions[name] = score;
    favorable_count += score;
  }
  verdict.degree = Rational(favorable_count, static_cast<std::int64_t>(policy.roster.size()));
  verdict.accepted = verdict.degree > policy.threshold;
  return verdict;
}

TrustStatistics trust_statistics(const std::vector<TrustVerdict>& verdicts) {
  if (verdicts.empty()) throw std::runtime_error("trust_statistics: empty verdict set");
  TrustStatistics stats;
  Rational sum(0, 1);
  stats.min = verdicts.front().degree;
  stats.max = verdicts.front().degree;
  std::int64_t accepted = 0;
  for (const auto& v : verdicts) {
    sum = sum + v.degree;
    if (v.degree < stats.min) stats.min = v.degree;
    if (stats.max < v.degree) stats.max = v.degree;
    accepted += v.accepted ? 1 : 0;
  }
  stats.mean = sum / static_cast<std::int64_t>(verdicts.size());
  stats.accepted_fraction = Rational(accepted, static_cast<std::int64_t>(verdicts.size()));
  return stats;
}

} // namespace lodlog
