#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lodlog/sparql.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

namespace {

bool parses(std::string_view text) { return get_query(parse_query(text)) != nullptr; }

// Replace the first standalone occurrence of a miskeyed SELECT.
std::optional<std::string> fix_select_typo(std::string_view text) {
  for (std::string_view typo : {"SELCT", "SLECT"}) {
    for (std::size_t i = 0; i + typo.size() <= text.size(); ++i) {
      if (!starts_with_ci(text.substr(i), typo)) continue;
      bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
      std::size_t end = i + typo.size();
      bool right_ok = end >= text.size() || !std::isalnum(static_cast<unsigned char>(text[end]));
      if (!left_ok || !right_ok) continue;
      std::string fixed(text);
      fixed.replace(i, typo.size(), "SELECT");
      return fixed;
    }
  }
  return std::nullopt;
}

std::optional<std::string> strip_trailing_punctuation(std::string_view text) {
  std::size_t end = text.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  std::size_t cut = end;
  while (cut > 0 && (text[cut - 1] == ';' || text[cut - 1] == '.' ||
                     std::isspace(static_cast<unsigned char>(text[cut - 1]))))
    --cut;
  if (cut == end || cut == 0 || text[cut - 1] != '}') return std::nullopt;
  return std::string(text.substr(0, cut));
}

// Drop the last '<' that never found its '>'.
std::optional<std::string> drop_dangling_iri_open(std::string_view text) {
  std::ptrdiff_t dangling = -1;
  bool open = false;
  std::size_t open_pos = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<' && !open) {
      open = true;
      open_pos = i;
    } else if (text[i] == '>' && open) {
      open = false;
    }
  }
  if (open) dangling = static_cast<std::ptrdiff_t>(open_pos);
  if (dangling < 0) return std::nullopt;
  std::string fixed(text);
  fixed.erase(static_cast<std::size_t>(dangling), 1);
  return fixed;
}

std::optional<std::string> insert_where(std::string_view text) {
  auto brace = text.find('{');
  if (brace == std::string_view::npos) return std::nullopt;
  std::string fixed(text);
  fixed.insert(brace, "WHERE ");
  return fixed;
}

} // namespace

CorrectionResult correct_syntax(std::string_view text) {
  if (parses(text)) return {CorrectionResult::Status::AlreadyCorrect, std::string(text)};

  std::vector<std::string> candidates;
  candidates.push_back(std::string(text) + "}");
  candidates.push_back(std::string(text) + "}}");
  if (auto c = insert_where(text)) candidates.push_back(*c);
  if (auto c = fix_select_typo(text)) candidates.push_back(*c);
  if (auto c = strip_trailing_punctuation(text)) candidates.push_back(*c);
  if (auto c = drop_dangling_iri_open(text)) candidates.push_back(*c);

  for (auto& candidate : candidates)
    if (parses(candidate)) return {CorrectionResult::Status::Corrected, std::move(candidate)};
  return {CorrectionResult::Status::Uncorrectable, std::string(text)};
}

namespace {

std::string strip_angle(std::string token) {
  if (token.size() >= 2 && token.front() == '<' && token.back() == '>')
    return token.substr(1, token.size() - 2);
  return token;
}

} // namespace

Vocabulary parse_vocabulary(std::string_view content) {
  Vocabulary v;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string kind, iri;
    in >> kind >> iri;
    if (iri.empty())
      throw std::runtime_error("vocabulary line " + std::to_string(line_no) + ": missing IRI");
    iri = strip_angle(iri);
    if (kind == "class") {
      v.classes.insert(iri);
    } else if (kind == "predicate") {
      v.predicates.insert(iri);
    } else if (kind == "label") {
      std::string rest;
      std::getline(in, rest);
      v.labels[iri].push_back(trim(rest));
    } else {
      throw std::runtime_error("vocabulary line " + std::to_string(line_no) +
                               ": unknown entry '" + kind + "'");
    }
  }
  return v;
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary(buf.str());
}

namespace {

void check_patterns(const ParsedQuery& q, const Vocabulary& v,
                    std::vector<SemanticViolation>& out, std::set<std::string>& seen) {
  auto add = [&](const Term& term, const std::string& reason) {
    if (seen.insert(reason + "|" + term.value).second) out.push_back({term, reason});
  };
  for (const auto& p : q.bgp) {
    if (p.predicate.is_iri() && !p.is_path) {
      if (v.predicates.count(p.predicate.value) == 0)
        add(p.predicate, "predicate not in vocabulary");
      if (p.predicate.value == rdf_type_iri && p.object.is_iri() &&
          v.classes.count(p.object.value) == 0)
        add(p.object, "class not in vocabulary");
    }
  }
  for (const auto& sub : q.subqueries) check_patterns(sub, v, out, seen);
}

} // namespace

SemanticReport check_semantics(const ParsedQuery& q, const Vocabulary& v) {
  SemanticReport report;
  std::set<std::string> seen;
  check_patterns(q, v, report.violations, seen);
  report.status = report.violations.empty() ? SemanticReport::Status::Correct
                                            : SemanticReport::Status::Wrong;
  return report;
}

namespace {

// Normalized Levenshtein over local names; exact threshold 0.34 = 17/50.
bool within_threshold(std::size_t dist, std::size_t max_len) {
  return dist * 50 <= 17 * max_len;
}

std::optional<std::string> closest_iri(const std::string& wrong,
                                       const std::set<std::string>& candidates) {
  const std::string wrong_local = local_name(wrong);
  std::optional<std::string> best;
  std::size_t best_dist = 0;
  std::size_t best_max = 1;
  for (const auto& candidate : candidates) {
    const std::string cand_local = local_name(candidate);
    std::size_t dist = edit_distance(wrong_local, cand_local);
    std::size_t max_len = std::max(wrong_local.size(), cand_local.size());
    if (max_len == 0) max_len = 1;
    // compare dist/max_len < best_dist/best_max by cross multiplication
    bool better = !best || dist * best_max < best_dist * max_len ||
                  (dist * best_max == best_dist * max_len && candidate < *best);
    if (better) {
      best = candidate;
      best_dist = dist;
      best_max = max_len;
    }
  }
  if (!best || !within_threshold(best_dist, best_max)) return std::nullopt;
  return best;
}

void apply_replacements(ParsedQuery& q, const std::map<std::string, std::string>& predicate_map,
                        const std::map<std::string, std::string>& class_map) {
  for (auto& p : q.bgp) {
    if (p.predicate.is_iri() && !p.is_path) {
      auto it = predicate_map.find(p.predicate.value);
      if (it != predicate_map.end()) p.predicate.value = it->second;
      if (p.predicate.value == rdf_type_iri && p.object.is_iri()) {
        auto ct = class_map.find(p.object.value);
        if (ct != class_map.end()) p.object.value = ct->second;
      }
    }
  }
  for (auto& sub : q.subqueries) apply_replacements(sub, predicate_map, class_map);
}

} // namespace

CorrectionResult correct_semantics(const ParsedQuery& q, const Vocabulary& v) {
  SemanticReport report = check_semantics(q, v);
  if (report.status == SemanticReport::Status::Correct) {
    return {CorrectionResult::Status::AlreadyCorrect,
            q.text.empty() ? serialize_query(q) : q.text};
  }

  std::map<std::string, std::string> predicate_map;
  std::map<std::string, std::string> class_map;
  for (const auto& violation : report.violations) {
    bool is_class = violation.reason.rfind("class", 0) == 0;
    const auto& pool = is_class ? v.classes : v.predicates;
    auto replacement = closest_iri(violation.term.value, pool);
    if (!replacement)
      return {CorrectionResult::Status::Uncorrectable,
              q.text.empty() ? serialize_query(q) : q.text};
    (is_class ? class_map : predicate_map)[violation.term.value] = *replacement;
  }

  ParsedQuery corrected = q;
  apply_replacements(corrected, predicate_map, class_map);
  if (check_semantics(corrected, v).status != SemanticReport::Status::Correct)
    return {CorrectionResult::Status::Uncorrectable,
            q.text.empty() ? serialize_query(q) : q.text};
  return {CorrectionResult::Status::Corrected, serialize_query(corrected)};
}

} // namespace lodlog
