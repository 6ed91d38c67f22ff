#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lodlog {

inline constexpr std::string_view rdf_type_iri =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

struct Term {
  enum class Kind { Iri, Literal, Variable, Blank };

  Kind kind = Kind::Variable;
  std::string value;                    // IRI text, literal lexical form, or variable name
  std::optional<std::string> datatype;  // literal datatype IRI
  std::optional<std::string> language;  // literal language tag

  static Term iri(std::string v) { return {Kind::Iri, std::move(v), {}, {}}; }
  static Term variable(std::string v) { return {Kind::Variable, std::move(v), {}, {}}; }
  static Term literal(std::string v, std::optional<std::string> dt = {},
                      std::optional<std::string> lang = {}) {
    return {Kind::Literal, std::move(v), std::move(dt), std::move(lang)};
  }

  bool is_iri() const { return kind == Kind::Iri; }
  bool is_variable() const { return kind == Kind::Variable; }
  bool is_literal() const { return kind == Kind::Literal; }
  bool is_constant() const { return kind == Kind::Iri || kind == Kind::Literal; }

  friend bool operator==(const Term&, const Term&) = default;
  auto operator<=>(const Term&) const = default;
};

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;
  // Property-path predicates are stored as Iri-kind terms holding the
  // normalized path text ("<a>/<b>+"); is_path marks them so vocabulary
  // checks know the value is not a single IRI.
  bool is_path = false;
  // -1 = required pattern; >= 0 indexes the OPTIONAL block it came from.
  int optional_group = -1;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct AggregateExpr {
  std::string function;  // COUNT, SUM, AVG, MIN, MAX
  std::string variable;  // aggregated variable; "*" for COUNT(*)
  bool distinct = false;
  std::string alias;     // projected name

  friend bool operator==(const AggregateExpr&, const AggregateExpr&) = default;
};

// Either a plain projected variable or an aliased aggregate.
struct ProjectionItem {
  std::string variable;  // set when plain
  std::optional<AggregateExpr> aggregate;

  bool is_aggregate() const { return aggregate.has_value(); }

  friend bool operator==(const ProjectionItem&, const ProjectionItem&) = default;
};

enum class QueryForm { Select, Construct };

struct ParsedQuery {
  QueryForm form = QueryForm::Select;
  bool distinct = false;
  bool select_star = false;
  std::vector<ProjectionItem> projection;

  // All triple patterns of the WHERE group, required and OPTIONAL ones
  // alike (tagged via optional_group). Subquery patterns live in the
  // nested queries below, not here.
  std::vector<TriplePattern> bgp;
  std::vector<TriplePattern> construct_template;
  std::vector<ParsedQuery> subqueries;

  std::vector<std::string> group_by;
  std::vector<std::string> filters;  // opaque balanced-paren expression texts

  int optional_count = 0;
  int filter_count = 0;
  int subquery_count = 0;      // recursive total
  int property_path_count = 0; // recursive total
  int aggregate_count = 0;     // recursive total

  std::optional<long> limit;
  std::optional<long> offset;

  std::map<std::string, std::string> prefixes;
  std::string text;  // original source text

  // Variables of the local BGP (not recursing into subqueries).
  std::set<std::string> bgp_variables() const;
  // Constant IRIs anywhere in the query, template and subqueries included;
  // path predicates contribute each embedded IRI.
  std::set<std::string> constant_iris() const;
};

struct SyntaxDiagnosis {
  std::size_t position = 0;  // byte offset into the query text
  std::string expected;
  std::string found;
};

using ParseResult = std::variant<ParsedQuery, SyntaxDiagnosis>;

ParseResult parse_query(std::string_view text);

inline const ParsedQuery* get_query(const ParseResult& r) { return std::get_if<ParsedQuery>(&r); }
inline const SyntaxDiagnosis* get_diagnosis(const ParseResult& r) {
  return std::get_if<SyntaxDiagnosis>(&r);
}

// Faithful renderer: full IRIs, original variable names and triple order.
// parse(serialize(q)) reconstructs the same structure.
std::string serialize_query(const ParsedQuery& q);

// Deterministic canonical form: keywords upper-cased, whitespace
// collapsed, prefixes expanded, triple patterns sorted by
// (predicate, subject, object) with variables neutralized in the sort
// key, variables renumbered ?v1..?vn in first-occurrence order over the
// sorted structure. Canonically equal iff equal up to whitespace and
// consistent variable renaming.
std::string canonicalize(const ParsedQuery& q);

struct CorrectionResult {
  enum class Status { AlreadyCorrect, Corrected, Uncorrectable };
  Status status = Status::AlreadyCorrect;
  std::string text;
};

// Fixed rewrite list, applied in order, first rewrite whose result
// parses wins: append up to two missing '}'; insert missing WHERE;
// fix SELCT/SLECT; strip trailing ';'/'.' after the final '}'; drop a
// dangling '<'.
CorrectionResult correct_syntax(std::string_view text);

struct Vocabulary {
  std::set<std::string> classes;
  std::set<std::string> predicates;
  std::map<std::string, std::vector<std::string>> labels;

  bool empty() const { return classes.empty() && predicates.empty(); }
};

// Loads the flat vocabulary format: lines "class <IRI>",
// "predicate <IRI>", "label <IRI> <text>"; IRIs with or without angle
// brackets. '#' starts a comment. Throws std::runtime_error on I/O or
// malformed lines.
Vocabulary load_vocabulary(const std::string& path);
Vocabulary parse_vocabulary(std::string_view content);

struct SemanticViolation {
  Term term;
  std::string reason;
};

struct SemanticReport {
  enum class Status { Correct, Wrong };
  Status status = Status::Correct;
  std::vector<SemanticViolation> violations;
};

// Wrong iff some constant predicate IRI is not a vocabulary predicate or
// some constant object of an rdf:type pattern is not a vocabulary class.
SemanticReport check_semantics(const ParsedQuery& q, const Vocabulary& v);

// Replaces each violating IRI with the vocabulary IRI of minimal
// normalized edit distance over local names when that distance is
// <= 0.34; any violation without a close-enough candidate makes the
// whole query Uncorrectable.
CorrectionResult correct_semantics(const ParsedQuery& q, const Vocabulary& v);

} // namespace lodlog
