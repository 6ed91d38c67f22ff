#include "lodlog/profiling.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lodlog/labels.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

// ---------------------------------------------------------------------
// Join graph and shapes

namespace {

std::string node_key(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Variable: return "?" + t.value;
    case Term::Kind::Iri: return "<" + t.value + ">";
    case Term::Kind::Blank: return "_:" + t.value;
    case Term::Kind::Literal: {
      std::string key = "\"" + t.value + "\"";
      if (t.language) key += "@" + *t.language;
      if (t.datatype) key += "^^" + *t.datatype;
      return key;
    }
  }
  return "";
}

} // namespace

JoinGraph build_join_graph(const std::vector<TriplePattern>& bgp) {
  JoinGraph graph;
  std::map<std::string, int> index;
  auto node_of = [&](const Term& t) {
    std::string key = node_key(t);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(graph.nodes.size());
    graph.nodes.push_back(key);
    index.emplace(std::move(key), id);
    return id;
  };
  for (const auto& p : bgp)
    graph.edges.emplace_back(node_of(p.subject), node_of(p.object));
  return graph;
}

namespace {

struct GraphFacts {
  std::vector<int> degree;   // self-loops count twice
  int components = 0;
  bool acyclic = false;
};

GraphFacts analyze(const JoinGraph& g) {
  GraphFacts facts;
  const int n = static_cast<int>(g.node_count());
  facts.degree.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> component(static_cast<std::size_t>(n), -1);

  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  for (const auto& [a, b] : g.edges) {
    facts.degree[static_cast<std::size_t>(a)] += 1;
    facts.degree[static_cast<std::size_t>(b)] += 1;
    adjacency[static_cast<std::size_t>(a)].push_back(b);
    adjacency[static_cast<std::size_t>(b)].push_back(a);
  }

  for (int start = 0; start < n; ++start) {
    if (component[static_cast<std::size_t>(start)] >= 0) continue;
    int id = facts.components++;
    std::vector<int> stack{start};
    component[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adjacency[static_cast<std::size_t>(v)]) {
        if (component[static_cast<std::size_t>(w)] < 0) {
          component[static_cast<std::size_t>(w)] = id;
          stack.push_back(w);
        }
      }
    }
  }

  // A multigraph is acyclic iff |E| = |V| - #components (any parallel
  // edge or self-loop breaks the equality).
  facts.acyclic = g.edge_count() + static_cast<std::size_t>(facts.components) == g.node_count();
  return facts;
}

} // namespace

std::string classify_shape(const JoinGraph& graph) {
  if (graph.edge_count() <= 1) return "Simple";

  GraphFacts facts = analyze(graph);
  if (facts.components >= 2) return "Forrest";

  const std::size_t patterns = graph.edge_count();
  bool all_deg_le2 = true;
  int hubs = 0;  // nodes of degree >= 3
  int max_degree = 0;
  for (int d : facts.degree) {
    all_deg_le2 &= d <= 2;
    hubs += d >= 3;
    max_degree = std::max(max_degree, d);
  }

  if (all_deg_le2 && facts.acyclic) return "Chain";
  if (max_degree == static_cast<int>(patterns)) {
    // degree == |bgp| alone is not enough once self-loops inflate
    // degrees; the hub must actually touch every pattern
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
      if (facts.degree[v] != static_cast<int>(patterns)) continue;
      bool touches_all = true;
      for (const auto& [a, b] : graph.edges)
        touches_all &= a == static_cast<int>(v) || b == static_cast<int>(v);
      if (touches_all) return "Star";
    }
  }
  if (facts.acyclic) return "Tree";
  if (hubs == 1) return "Flower";
  return "Bouquet";  // >= 2 hubs, plus the residual cyclic cases
}

std::string classify_shape(const ParsedQuery& q) {
  return classify_shape(build_join_graph(q.bgp));
}

// ---------------------------------------------------------------------
// Behavior

std::string analyze_behavior(const std::vector<ClientRequest>& history,
                             const BehaviorConfig& config) {
  if (history.empty()) return "Organic";

  for (const auto& request : history) {
    if (!request.user_agent) continue;
    for (const auto& pattern : config.bot_agent_patterns)
      if (contains_ci(*request.user_agent, pattern)) return "Robot";
  }

  // sliding window request rate
  if (config.rate_threshold > 0 && history.size() >= config.rate_threshold) {
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < history.size(); ++hi) {
      while (history[hi].timestamp.epoch_ms - history[lo].timestamp.epoch_ms > config.window_ms)
        ++lo;
      if (hi - lo + 1 >= config.rate_threshold) return "Robot";
    }
  }

  // metronome clients: a run of near-identical inter-arrival gaps
  if (config.min_equal_gaps > 0 && history.size() > config.min_equal_gaps) {
    std::vector<std::int64_t> gaps;
    gaps.reserve(history.size() - 1);
    for (std::size_t i = 1; i < history.size(); ++i)
      gaps.push_back(history[i].timestamp.epoch_ms - history[i - 1].timestamp.epoch_ms);
    const std::size_t run = config.min_equal_gaps;
    for (std::size_t start = 0; start + run <= gaps.size(); ++start) {
      auto [lo, hi] = std::minmax_element(gaps.begin() + static_cast<std::ptrdiff_t>(start),
                                          gaps.begin() + static_cast<std::ptrdiff_t>(start + run));
      if (*hi - *lo <= config.gap_tolerance_ms) return "Robot";
    }
  }
  return "Organic";
}

// ---------------------------------------------------------------------
// Provenance

std::optional<CidrRange> CidrRange::parse(std::string_view text) {
  std::string address(text);
  int prefix = -1;
  auto slash = address.find('/');
  if (slash != std::string::npos) {
    const std::string prefix_text = address.substr(slash + 1);
    address = address.substr(0, slash);
    if (prefix_text.empty()) return std::nullopt;
    prefix = 0;
    for (char c : prefix_text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      prefix = prefix * 10 + (c - '0');
    }
  }

  CidrRange range;
  unsigned char buf[16];
  if (inet_pton(AF_INET, address.c_str(), buf) == 1) {
    range.is_v6 = false;
    std::copy(buf, buf + 4, range.address);
    range.prefix_length = prefix < 0 ? 32 : prefix;
    if (range.prefix_length > 32) return std::nullopt;
    return range;
  }
  if (inet_pton(AF_INET6, address.c_str(), buf) == 1) {
    range.is_v6 = true;
    std::copy(buf, buf + 16, range.address);
    range.prefix_length = prefix < 0 ? 128 : prefix;
    if (range.prefix_length > 128) return std::nullopt;
    return range;
  }
  return std::nullopt;
}

bool CidrRange::contains(std::string_view ip) const {
  unsigned char buf[16];
  std::string addr(ip);
  int family = is_v6 ? AF_INET6 : AF_INET;
  if (inet_pton(family, addr.c_str(), buf) != 1) return false;
  int bits = prefix_length;
  for (int i = 0; bits > 0; ++i, bits -= 8) {
    unsigned char mask = bits >= 8 ? 0xFF : static_cast<unsigned char>(0xFF << (8 - bits));
    if ((buf[i] & mask) != (address[i] & mask)) return false;
  }
  return true;
}

ProvenanceDirectory parse_provenance_directory(std::string_view content) {
  ProvenanceDirectory dir;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string kind;
    in >> kind;
    auto bad = [&](const std::string& why) {
      return std::runtime_error("provenance line " + std::to_string(line_no) + ": " + why);
    };
    if (kind == "blacklist") {
      std::string cidr;
      in >> cidr;
      auto range = CidrRange::parse(cidr);
      if (!range) throw bad("bad CIDR '" + cidr + "'");
      dir.blacklist.push_back(*range);
    } else if (kind == "organism") {
      std::string cidr, label;
      in >> cidr >> label;
      auto range = CidrRange::parse(cidr);
      if (!range) throw bad("bad CIDR '" + cidr + "'");
      if (label != "Business" && label != "Academic")
        throw bad("organism label must be Business or Academic, got '" + label + "'");
      dir.organism_map.emplace_back(*range, label);
    } else if (kind == "botagent") {
      std::string rest;
      std::getline(in, rest);
      rest = trim(rest);
      if (rest.empty()) throw bad("botagent needs a pattern");
      dir.bot_agent_patterns.push_back(rest);
    } else {
      throw bad("unknown entry '" + kind + "'");
    }
  }
  // most-specific first; stable so file order breaks ties
  std::stable_sort(dir.organism_map.begin(), dir.organism_map.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.prefix_length > b.first.prefix_length;
                   });
  return dir;
}

ProvenanceDirectory load_provenance_directory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open provenance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_provenance_directory(buf.str());
}

std::pair<std::string, std::string> classify_provider(const ClientIdentity& client,
                                                      const ProvenanceDirectory& dir) {
  if (!client.is_ip()) return {"Unknown", "Unknown"};
  unsigned char buf[16];
  bool valid = inet_pton(AF_INET, client.value.c_str(), buf) == 1 ||
               inet_pton(AF_INET6, client.value.c_str(), buf) == 1;
  if (!valid) return {"Unknown", "Unknown"};

  std::string vulnerability = "Safe";
  for (const auto& range : dir.blacklist) {
    if (range.contains(client.value)) {
      vulnerability = "Vulnerable";
      break;
    }
  }
  std::string organism = "Unknown";
  for (const auto& [range, label] : dir.organism_map) {
    if (range.contains(client.value)) {
      organism = label;
      break;
    }
  }
  return {vulnerability, organism};
}

// ---------------------------------------------------------------------
// Per-query analyzers

std::string classify_query_type(const ParsedQuery& q) {
  if (!q.group_by.empty()) return "Analytic";
  for (const auto& item : q.projection)
    if (item.is_aggregate()) return "Analytic";
  return "Standard";
}

int expertise_score(const ParsedQuery& q, const ExpertiseWeights& w) {
  int advanced = q.subquery_count + q.property_path_count + q.aggregate_count;
  return w.pattern_weight * static_cast<int>(q.bgp.size()) +
         w.clause_weight * (q.optional_count + q.filter_count) + w.advanced_weight * advanced;
}

std::string classify_expertise(const ParsedQuery& q, const ExpertiseWeights& w) {
  int score = expertise_score(q, w);
  if (score <= w.beginner_max) return "Beginner";
  if (score >= w.expert_min || q.subquery_count > 0 || q.property_path_count > 0)
    return "Expert";
  return "Intermediate";
}

std::string classify_schema_informativeness(const ParsedQuery& q) {
  if (q.bgp.empty()) return "NonInformative";
  std::size_t constants = 0;
  bool constant_predicate = false;
  for (const auto& p : q.bgp) {
    constants += p.subject.is_constant();
    constants += p.predicate.is_constant();
    constants += p.object.is_constant();
    constant_predicate |= p.predicate.is_iri() && !p.is_path;
  }
  const std::size_t positions = 3 * q.bgp.size();
  if (constants * 3 >= positions && constant_predicate) return "Informative";
  return "NonInformative";
}

TopicLexicon parse_topic_lexicon(std::string_view content) {
  TopicLexicon lexicon;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::string label, keyword;
    in >> label >> keyword;
    if (keyword.empty())
      throw std::runtime_error("topic lexicon line " + std::to_string(line_no) +
                               ": expected '<TopicLabel> <keyword>'");
    if (!is_valid_label(analyzer::topic, label) || label == "None")
      throw std::runtime_error("topic lexicon line " + std::to_string(line_no) +
                               ": unknown topic label '" + label + "'");
    lexicon.keywords[label].insert(to_lower(keyword));
  }
  return lexicon;
}

TopicLexicon load_topic_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open topic lexicon: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topic_lexicon(buf.str());
}

namespace {

void collect_tokens(const ParsedQuery& q, std::set<std::string>& out) {
  auto add_term = [&](const Term& t, bool is_path) {
    if (t.is_iri()) {
      if (is_path) {
        // tokenize each embedded IRI's local name
        const std::string& s = t.value;
        std::size_t i = 0;
        while ((i = s.find('<', i)) != std::string::npos) {
          auto close = s.find('>', i);
          if (close == std::string::npos) break;
          auto tokens = tokenize_words(local_name(s.substr(i + 1, close - i - 1)));
          out.insert(tokens.begin(), tokens.end());
          i = close + 1;
        }
      } else {
        auto tokens = tokenize_words(local_name(t.value));
        out.insert(tokens.begin(), tokens.end());
      }
    } else if (t.is_literal()) {
      auto tokens = tokenize_words(t.value);
      out.insert(tokens.begin(), tokens.end());
    }
  };
  for (const auto& p : q.bgp) {
    add_term(p.subject, false);
    add_term(p.predicate, p.is_path);
    add_term(p.object, false);
  }
  for (const auto& p : q.construct_template) {
    add_term(p.subject, false);
    add_term(p.predicate, p.is_path);
    add_term(p.object, false);
  }
  for (const auto& sub : q.subqueries) collect_tokens(sub, out);
}

} // namespace

std::set<std::string> query_tokens(const ParsedQuery& q) {
  std::set<std::string> out;
  collect_tokens(q, out);
  return out;
}

std::string assign_topic(const ParsedQuery& q, const TopicLexicon& lexicon) {
  std::set<std::string> tokens = query_tokens(q);
  std::string best = "None";
  std::size_t best_count = 0;
  for (const auto& [label, keywords] : lexicon.keywords) {
    std::size_t matched = 0;
    for (const auto& keyword : keywords) matched += tokens.count(keyword);
    // ties break toward the lexicographically smaller label, which the
    // ordered map iteration gives us for free
    if (matched > best_count) {
      best = label;
      best_count = matched;
    }
  }
  return best_count == 0 ? "None" : best;
}

// ---------------------------------------------------------------------
// Duplicates

std::vector<DuplicateVerdict> find_duplicates_by_key(const std::vector<std::string>& keys) {
  std::vector<DuplicateVerdict> verdicts(keys.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    verdicts[i].group_id = to_hex(fnv1a64(keys[i]));
    verdicts[i].label = seen.insert(keys[i]).second ? "Unique" : "Duplicate";
  }
  return verdicts;
}

std::vector<DuplicateVerdict> find_duplicates(const std::vector<ParsedQuery>& queries) {
  std::vector<std::string> keys;
  keys.reserve(queries.size());
  for (const auto& q : queries) keys.push_back(canonicalize(q));
  return find_duplicates_by_key(keys);
}

// ---------------------------------------------------------------------
// Log interactions

OverlapReport log_overlap(const LogSummary& a, const LogSummary& b) {
  return {jaccard(a.topics, b.topics), jaccard(a.namespaces, b.namespaces)};
}

// ---------------------------------------------------------------------
// Profile report

ProfileReport profile(const std::vector<std::map<std::string, std::string>>& annotations,
                      const std::vector<Rational>& trust_degrees) {
  ProfileReport report;
  report.total = annotations.size();
  for (const auto& vocabulary : analyzer_vocabularies())
    for (const auto& label : vocabulary.labels) report.counts[vocabulary.name][label] = 0;

  for (const auto& query_annotations : annotations) {
    for (const auto& [name, label] : query_annotations) {
      auto analyzer_it = report.counts.find(name);
      if (analyzer_it == report.counts.end())
        throw std::runtime_error("profile: unknown analyzer '" + name + "'");
      auto label_it = analyzer_it->second.find(label);
      if (label_it == analyzer_it->second.end())
        throw std::runtime_error("profile: label '" + label + "' not in the " + name +
                                 " vocabulary");
      ++label_it->second;
    }
  }

  std::size_t duplicates = 0;
  auto dup_it = report.counts.find(std::string(analyzer::duplication));
  if (dup_it != report.counts.end()) duplicates = dup_it->second["Duplicate"];
  report.duplication_rate =
      report.total == 0 ? 0.0 : static_cast<double>(duplicates) / static_cast<double>(report.total);

  if (!trust_degrees.empty()) {
    Rational sum(0, 1);
    Rational lo = trust_degrees.front();
    Rational hi = trust_degrees.front();
    for (const auto& d : trust_degrees) {
      sum = sum + d;
      if (d < lo) lo = d;
      if (hi < d) hi = d;
    }
    report.trust_min = lo;
    report.trust_max = hi;
    report.trust_mean = sum / static_cast<std::int64_t>(trust_degrees.size());
  }
  return report;
}

namespace {

std::string format_rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

} // namespace

std::string ProfileReport::to_text() const {
  std::string out;
  out += "total " + std::to_string(total) + "\n";
  out += "duplication_rate " + format_rate(duplication_rate) + "\n";
  if (trust_mean) {
    out += "trust_mean " + trust_mean->to_display() + "\n";
    out += "trust_min " + trust_min->to_display() + "\n";
    out += "trust_max " + trust_max->to_display() + "\n";
  }
  for (const auto& vocabulary : analyzer_vocabularies()) {
    auto it = counts.find(vocabulary.name);
    if (it == counts.end()) continue;
    for (const auto& label : vocabulary.labels) {
      auto count_it = it->second.find(label);
      std::size_t n = count_it == it->second.end() ? 0 : count_it->second;
      out += "count " + vocabulary.name + " " + label + " " + std::to_string(n) + "\n";
    }
  }
  return out;
}

std::string ProfileReport::to_csv() const {
  std::string out = "analyzer,label,count\n";
  for (const auto& vocabulary : analyzer_vocabularies()) {
    auto it = counts.find(vocabulary.name);
    if (it == counts.end()) continue;
    for (const auto& label : vocabulary.labels) {
      auto count_it = it->second.find(label);
      std::size_t n = count_it == it->second.end() ? 0 : count_it->second;
      out += vocabulary.name + "," + label + "," + std::to_string(n) + "\n";
    }
  }
  return out;
}

} // namespace lodlog
