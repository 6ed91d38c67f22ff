#include <algorithm>
#include <functional>
#include <tuple>

#include "lodlog/sparql.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

namespace {

constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";
constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";

// Maps a source variable name to its output name; the canonical renderer
// numbers variables on first use, the faithful renderer is the identity,
// and sort keys use a neutralizer that erases names entirely.
using VarResolver = std::function<std::string(const std::string&)>;

bool bare_number_form(const Term& t) {
  if (!t.datatype) return false;
  const std::string& dt = *t.datatype;
  if (dt != xsd_integer && dt != xsd_decimal && dt != xsd_double) return false;
  // must re-lex as the same unsigned numeric literal
  const std::string& v = t.value;
  std::size_t i = 0;
  if (i >= v.size() || !std::isdigit(static_cast<unsigned char>(v[i]))) return false;
  while (i < v.size() && std::isdigit(static_cast<unsigned char>(v[i]))) ++i;
  if (i < v.size() && v[i] == '.') {
    ++i;
    if (i >= v.size() || !std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    while (i < v.size() && std::isdigit(static_cast<unsigned char>(v[i]))) ++i;
  }
  if (i < v.size() && (v[i] == 'e' || v[i] == 'E')) {
    ++i;
    if (i < v.size() && (v[i] == '+' || v[i] == '-')) ++i;
    if (i >= v.size() || !std::isdigit(static_cast<unsigned char>(v[i]))) return false;
    while (i < v.size() && std::isdigit(static_cast<unsigned char>(v[i]))) ++i;
  }
  return i == v.size();
}

std::string escape_literal(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_term(const Term& t, bool is_path, const VarResolver& vars) {
  switch (t.kind) {
    case Term::Kind::Variable:
      return "?" + vars(t.value);
    case Term::Kind::Blank:
      return "_:" + t.value;
    case Term::Kind::Iri:
      return is_path ? t.value : "<" + t.value + ">";
    case Term::Kind::Literal: {
      if (bare_number_form(t)) return t.value;
      if (t.datatype && *t.datatype == xsd_boolean && (t.value == "true" || t.value == "false"))
        return t.value;
      std::string out = "\"" + escape_literal(t.value) + "\"";
      if (t.language) out += "@" + *t.language;
      else if (t.datatype) out += "^^<" + *t.datatype + ">";
      return out;
    }
  }
  return "";
}

std::string render_triple(const TriplePattern& p, const VarResolver& vars) {
  return render_term(p.subject, false, vars) + " " + render_term(p.predicate, p.is_path, vars) +
         " " + render_term(p.object, false, vars);
}

// Rewrites ?name / $name occurrences in opaque filter text, skipping
// string literals and IRIs.
std::string render_filter(const std::string& text, const VarResolver& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"' || c == '\'') {
      char quote = c;
      out.push_back(c);
      ++i;
      while (i < text.size() && text[i] != quote) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          out.push_back(text[i]);
          ++i;
        }
        out.push_back(text[i]);
        ++i;
      }
      if (i < text.size()) {
        out.push_back(text[i]);
        ++i;
      }
      continue;
    }
    if (c == '<') {
      while (i < text.size() && text[i] != '>') {
        out.push_back(text[i]);
        ++i;
      }
      continue;
    }
    if ((c == '?' || c == '$') && i + 1 < text.size() &&
        (std::isalnum(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '_')) {
      std::size_t j = i + 1;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      out += "?" + vars(text.substr(i + 1, j - i - 1));
      i = j;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

const VarResolver kNeutral = [](const std::string&) { return std::string(); };
const VarResolver kIdentity = [](const std::string& v) { return v; };

// Flattened render order for one query: required patterns, OPTIONAL
// blocks, subqueries, filters.
struct RenderPlan {
  const ParsedQuery* query = nullptr;
  std::vector<const TriplePattern*> required;
  std::vector<std::vector<const TriplePattern*>> optional_blocks;
  std::vector<RenderPlan> subqueries;
  std::vector<const TriplePattern*> template_triples;
};

std::tuple<std::string, std::string, std::string> sort_key(const TriplePattern& p) {
  return {render_term(p.predicate, p.is_path, kNeutral),
          render_term(p.subject, false, kNeutral),
          render_term(p.object, false, kNeutral)};
}

void sort_patterns(std::vector<const TriplePattern*>& patterns) {
  std::stable_sort(patterns.begin(), patterns.end(),
                   [](const TriplePattern* a, const TriplePattern* b) {
                     return sort_key(*a) < sort_key(*b);
                   });
}

std::string render_plan(const RenderPlan& plan, const VarResolver& vars);

std::string neutral_text(const RenderPlan& plan) { return render_plan(plan, kNeutral); }

RenderPlan make_plan(const ParsedQuery& q, bool canonical) {
  RenderPlan plan;
  plan.query = &q;

  std::map<int, std::vector<const TriplePattern*>> blocks;
  for (const auto& p : q.bgp) {
    if (p.optional_group < 0)
      plan.required.push_back(&p);
    else
      blocks[p.optional_group].push_back(&p);
  }
  for (auto& [id, block] : blocks) plan.optional_blocks.push_back(std::move(block));
  for (const auto& p : q.construct_template) plan.template_triples.push_back(&p);
  for (const auto& sub : q.subqueries) plan.subqueries.push_back(make_plan(sub, canonical));

  if (canonical) {
    sort_patterns(plan.required);
    sort_patterns(plan.template_triples);
    for (auto& block : plan.optional_blocks) sort_patterns(block);
    std::stable_sort(plan.optional_blocks.begin(), plan.optional_blocks.end(),
                     [](const auto& a, const auto& b) {
                       auto text_of = [](const auto& block) {
                         std::string s;
                         for (const auto* p : block) s += render_triple(*p, kNeutral) + " . ";
                         return s;
                       };
                       return text_of(a) < text_of(b);
                     });
    std::stable_sort(plan.subqueries.begin(), plan.subqueries.end(),
                     [](const RenderPlan& a, const RenderPlan& b) {
                       return neutral_text(a) < neutral_text(b);
                     });
  }
  return plan;
}

std::string render_plan(const RenderPlan& plan, const VarResolver& vars) {
  const ParsedQuery& q = *plan.query;
  std::string out;

  if (q.form == QueryForm::Select) {
    out += "SELECT";
    if (q.distinct) out += " DISTINCT";
    if (q.select_star) {
      out += " *";
    } else {
      for (const auto& item : q.projection) {
        if (item.is_aggregate()) {
          const auto& agg = *item.aggregate;
          out += " (" + agg.function + "(";
          if (agg.distinct) out += "DISTINCT ";
          out += agg.variable == "*" ? "*" : "?" + vars(agg.variable);
          out += ") AS ?" + vars(agg.alias) + ")";
        } else {
          out += " ?" + vars(item.variable);
        }
      }
    }
  } else {
    out += "CONSTRUCT {";
    bool first = true;
    for (const auto* p : plan.template_triples) {
      out += first ? " " : " . ";
      out += render_triple(*p, vars);
      first = false;
    }
    out += " }";
  }

  out += " WHERE {";
  bool first = true;
  for (const auto* p : plan.required) {
    out += first ? " " : " . ";
    out += render_triple(*p, vars);
    first = false;
  }
  for (const auto& block : plan.optional_blocks) {
    out += " OPTIONAL {";
    bool bfirst = true;
    for (const auto* p : block) {
      out += bfirst ? " " : " . ";
      out += render_triple(*p, vars);
      bfirst = false;
    }
    out += " }";
  }
  for (const auto& sub : plan.subqueries) out += " { " + render_plan(sub, vars) + " }";
  for (const auto& f : q.filters) out += " FILTER(" + render_filter(f, vars) + ")";
  out += " }";

  if (!q.group_by.empty()) {
    out += " GROUP BY";
    for (const auto& g : q.group_by) out += " ?" + vars(g);
  }
  if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
  if (q.offset) out += " OFFSET " + std::to_string(*q.offset);
  return out;
}

} // namespace

std::string serialize_query(const ParsedQuery& q) {
  RenderPlan plan = make_plan(q, /*canonical=*/false);
  return render_plan(plan, kIdentity);
}

std::string canonicalize(const ParsedQuery& q) {
  RenderPlan plan = make_plan(q, /*canonical=*/true);
  std::map<std::string, std::string> names;
  int counter = 0;
  VarResolver numbering = [&names, &counter](const std::string& v) {
    auto it = names.find(v);
    if (it != names.end()) return it->second;
    std::string name = "v" + std::to_string(++counter);
    names.emplace(v, name);
    return name;
  };
  return render_plan(plan, numbering);
}

} // namespace lodlog
