#include <cctype>
#include <stdexcept>

#include "lodlog/sparql.hpp"
#include "lodlog/text.hpp"

namespace lodlog {

namespace {

constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";
constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";

struct Token {
  enum class Type { End, Word, Iri, PName, Var, Blank, String, Number, Punct, LangTag };
  Type type = Type::End;
  std::string text;    // payload without delimiters: word, IRI body, var name, ...
  std::string extra;   // PName local part; Number datatype
  std::size_t pos = 0;
};

struct ParseError {
  std::size_t pos;
  std::string expected;
  std::string found;
};

[[noreturn]] void fail(std::size_t pos, std::string expected, std::string found) {
  throw ParseError{pos, std::move(expected), std::move(found)};
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_local_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::size_t offset() const { return pos_; }
  void reset(std::size_t pos) { pos_ = pos; }

  Token next() {
    skip_trivia();
    Token t;
    t.pos = pos_;
    if (pos_ >= text_.size()) return t;

    char c = text_[pos_];

    if (c == '<') return lex_iri();
    if (c == '?' || c == '$') {
      if (pos_ + 1 < text_.size() && is_name_char(text_[pos_ + 1])) return lex_var();
      ++pos_;
      t.type = Token::Type::Punct;
      t.text = "?";
      return t;
    }
    if (c == '_' && pos_ + 1 < text_.size() && text_[pos_ + 1] == ':') return lex_blank();
    if (c == '"' || c == '\'') return lex_string();
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number();
    if (c == '@') return lex_langtag();
    if (c == '^' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '^') {
      pos_ += 2;
      t.type = Token::Type::Punct;
      t.text = "^^";
      return t;
    }
    if (c == ':') return lex_pname();  // empty prefix ":local"
    if (is_name_start(c)) return lex_word_or_pname();

    static constexpr std::string_view puncts = "{}()[].;,*/|^+";
    if (puncts.find(c) != std::string_view::npos) {
      ++pos_;
      t.type = Token::Type::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(pos_, "token", std::string(1, c));
  }

  // Raw capture of a balanced-paren region starting at an already-lexed
  // '(' token; returns the inner text and leaves the lexer after the
  // closing ')'. Strings and IRIs are skipped opaquely.
  std::string capture_parens(std::size_t open_pos) {
    std::size_t i = open_pos;
    if (i >= text_.size() || text_[i] != '(') fail(i, "(", peek_char(i));
    int depth = 0;
    std::size_t inner_start = i + 1;
    for (; i < text_.size(); ++i) {
      char c = text_[i];
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        --depth;
        if (depth == 0) {
          std::string inner(text_.substr(inner_start, i - inner_start));
          pos_ = i + 1;
          return inner;
        }
      } else if (c == '"' || c == '\'') {
        char quote = c;
        ++i;
        while (i < text_.size() && text_[i] != quote) {
          if (text_[i] == '\\') ++i;
          ++i;
        }
        if (i >= text_.size()) fail(i, std::string(1, quote), "end of input");
      } else if (c == '<') {
        while (i < text_.size() && text_[i] != '>') ++i;
      } else if (c == '#') {
        while (i < text_.size() && text_[i] != '\n') ++i;
      }
    }
    fail(text_.size(), ")", "end of input");
  }

 private:
  std::string peek_char(std::size_t i) const {
    return i < text_.size() ? std::string(1, text_[i]) : std::string("end of input");
  }

  void skip_trivia() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  Token lex_iri() {
    Token t;
    t.pos = pos_;
    ++pos_;  // '<'
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '>' && text_[pos_] != '\n') ++pos_;
    if (pos_ >= text_.size() || text_[pos_] != '>') fail(t.pos, ">", "end of IRI");
    t.type = Token::Type::Iri;
    t.text = std::string(text_.substr(start, pos_ - start));
    ++pos_;
    return t;
  }

  Token lex_var() {
    Token t;
    t.pos = pos_;
    ++pos_;  // '?' or '$'
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    t.type = Token::Type::Var;
    t.text = std::string(text_.substr(start, pos_ - start));
    return t;
  }

  Token lex_blank() {
    Token t;
    t.pos = pos_;
    pos_ += 2;  // "_:"
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail(t.pos, "blank node label", peek_char(pos_));
    t.type = Token::Type::Blank;
    t.text = std::string(text_.substr(start, pos_ - start));
    return t;
  }

  Token lex_string() {
    Token t;
    t.pos = pos_;
    char quote = text_[pos_];
    ++pos_;
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != quote) {
      char c = text_[pos_];
      if (c == '\n') fail(t.pos, std::string(1, quote), "newline in string");
      if (c == '\\') {
        ++pos_;
        if (pos_ >= text_.size()) fail(pos_, "escape character", "end of input");
        char esc = text_[pos_];
        switch (esc) {
          case 't': value.push_back('\t'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 'b': value.push_back('\b'); break;
          case 'f': value.push_back('\f'); break;
          case '"': value.push_back('"'); break;
          case '\'': value.push_back('\''); break;
          case '\\': value.push_back('\\'); break;
          default: fail(pos_, "valid escape", std::string(1, esc));
        }
        ++pos_;
      } else {
        value.push_back(c);
        ++pos_;
      }
    }
    if (pos_ >= text_.size()) fail(t.pos, std::string(1, quote), "end of input");
    ++pos_;
    t.type = Token::Type::String;
    t.text = std::move(value);
    return t;
  }

  Token lex_number() {
    Token t;
    t.pos = pos_;
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    bool has_dot = false;
    if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      has_dot = true;
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool has_exp = false;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        has_exp = true;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    t.type = Token::Type::Number;
    t.text = std::string(text_.substr(start, pos_ - start));
    t.extra = has_exp ? std::string(xsd_double)
                      : has_dot ? std::string(xsd_decimal) : std::string(xsd_integer);
    return t;
  }

  Token lex_langtag() {
    Token t;
    t.pos = pos_;
    ++pos_;  // '@'
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail(t.pos, "language tag", peek_char(pos_));
    t.type = Token::Type::LangTag;
    t.text = std::string(text_.substr(start, pos_ - start));
    return t;
  }

  Token lex_pname() {
    // current char is ':'
    Token t;
    t.pos = pos_;
    ++pos_;
    t.type = Token::Type::PName;
    t.text = "";
    t.extra = lex_local_part();
    return t;
  }

  Token lex_word_or_pname() {
    Token t;
    t.pos = pos_;
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      t.type = Token::Type::PName;
      t.text = std::move(name);
      t.extra = lex_local_part();
      return t;
    }
    t.type = Token::Type::Word;
    t.text = std::move(name);
    return t;
  }

  std::string lex_local_part() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_local_char(text_[pos_])) ++pos_;
    // PN_LOCAL cannot end with '.'; give trailing dots back to the stream.
    while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text), lexer_(text) {}

  ParseResult run() {
    try {
      collect_used_variable_names();
      advance();
      ParsedQuery q = parse_query_unit(/*is_subquery=*/false);
      if (cur_.type != Token::Type::End) fail(cur_.pos, "end of query", token_desc(cur_));
      q.text = std::string(text_);
      validate(q);
      return q;
    } catch (const ParseError& e) {
      return SyntaxDiagnosis{e.pos, e.expected, e.found};
    }
  }

 private:
  // Pre-scan variable names so blank nodes can take fresh names that
  // cannot collide with user variables.
  void collect_used_variable_names() {
    for (std::size_t i = 0; i + 1 < text_.size(); ++i) {
      if ((text_[i] == '?' || text_[i] == '$') && is_name_char(text_[i + 1])) {
        std::size_t j = i + 1;
        while (j < text_.size() && is_name_char(text_[j])) ++j;
        used_names_.insert(std::string(text_.substr(i + 1, j - i - 1)));
        i = j - 1;
      }
    }
  }

  void advance() { cur_ = lexer_.next(); }

  bool at_punct(std::string_view p) const {
    return cur_.type == Token::Type::Punct && cur_.text == p;
  }
  bool at_word(std::string_view w) const {
    return cur_.type == Token::Type::Word && equals_ci(cur_.text, w);
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail(cur_.pos, std::string(p), token_desc(cur_));
    advance();
  }

  static std::string token_desc(const Token& t) {
    switch (t.type) {
      case Token::Type::End: return "end of input";
      case Token::Type::Word: return t.text;
      case Token::Type::Iri: return "<" + t.text + ">";
      case Token::Type::PName: return t.text + ":" + t.extra;
      case Token::Type::Var: return "?" + t.text;
      case Token::Type::Blank: return "_:" + t.text;
      case Token::Type::String: return "\"" + t.text + "\"";
      case Token::Type::Number: return t.text;
      case Token::Type::Punct: return t.text;
      case Token::Type::LangTag: return "@" + t.text;
    }
    return "?";
  }

  ParsedQuery parse_query_unit(bool is_subquery) {
    ParsedQuery q;
    if (!is_subquery) parse_prologue(q);

    if (at_word("SELECT")) {
      q.form = QueryForm::Select;
      advance();
      parse_select_body(q);
    } else if (!is_subquery && at_word("CONSTRUCT")) {
      q.form = QueryForm::Construct;
      advance();
      parse_construct_body(q);
    } else {
      fail(cur_.pos, is_subquery ? "SELECT" : "SELECT or CONSTRUCT", token_desc(cur_));
    }
    return q;
  }

  void parse_prologue(ParsedQuery& q) {
    for (;;) {
      if (at_word("PREFIX")) {
        advance();
        if (cur_.type != Token::Type::PName || !cur_.extra.empty())
          fail(cur_.pos, "prefix name", token_desc(cur_));
        std::string ns = cur_.text;
        advance();
        if (cur_.type != Token::Type::Iri) fail(cur_.pos, "IRI", token_desc(cur_));
        prefixes_[ns] = resolve_iri(cur_.text, cur_.pos);
        q.prefixes[ns] = prefixes_[ns];
        advance();
      } else if (at_word("BASE")) {
        advance();
        if (cur_.type != Token::Type::Iri) fail(cur_.pos, "IRI", token_desc(cur_));
        base_ = cur_.text;
        advance();
      } else {
        return;
      }
    }
  }

  void parse_select_body(ParsedQuery& q) {
    if (at_word("DISTINCT")) {
      q.distinct = true;
      advance();
    }
    if (at_punct("*")) {
      q.select_star = true;
      advance();
    } else {
      bool any = false;
      for (;;) {
        if (cur_.type == Token::Type::Var) {
          ProjectionItem item;
          item.variable = cur_.text;
          q.projection.push_back(std::move(item));
          advance();
          any = true;
        } else if (at_punct("(")) {
          q.projection.push_back(parse_aggregate_item(q));
          any = true;
        } else {
          break;
        }
      }
      if (!any) fail(cur_.pos, "projection variable or aggregate", token_desc(cur_));
    }
    parse_where_group(q);
    parse_modifiers(q);
  }

  ProjectionItem parse_aggregate_item(ParsedQuery& q) {
    expect_punct("(");
    AggregateExpr agg;
    if (cur_.type != Token::Type::Word) fail(cur_.pos, "aggregate function", token_desc(cur_));
    std::string fn = to_lower(cur_.text);
    if (fn == "count") agg.function = "COUNT";
    else if (fn == "sum") agg.function = "SUM";
    else if (fn == "avg") agg.function = "AVG";
    else if (fn == "min") agg.function = "MIN";
    else if (fn == "max") agg.function = "MAX";
    else fail(cur_.pos, "COUNT, SUM, AVG, MIN or MAX", token_desc(cur_));
    advance();
    expect_punct("(");
    if (at_word("DISTINCT")) {
      agg.distinct = true;
      advance();
    }
    if (at_punct("*")) {
      if (agg.function != "COUNT") fail(cur_.pos, "variable", "*");
      agg.variable = "*";
      advance();
    } else if (cur_.type == Token::Type::Var) {
      agg.variable = cur_.text;
      advance();
    } else {
      fail(cur_.pos, "variable or *", token_desc(cur_));
    }
    expect_punct(")");
    if (!at_word("AS")) fail(cur_.pos, "AS", token_desc(cur_));
    advance();
    if (cur_.type != Token::Type::Var) fail(cur_.pos, "alias variable", token_desc(cur_));
    agg.alias = cur_.text;
    advance();
    expect_punct(")");
    ++q.aggregate_count;
    ProjectionItem item;
    item.aggregate = std::move(agg);
    return item;
  }

  void parse_construct_body(ParsedQuery& q) {
    expect_punct("{");
    while (!at_punct("}")) {
      parse_triples_same_subject(q, /*into_template=*/true, -1);
      if (at_punct(".")) {
        advance();
        continue;
      }
      if (!at_punct("}")) fail(cur_.pos, ". or }", token_desc(cur_));
    }
    advance();
    parse_where_group(q);
    parse_modifiers(q);
  }

  void parse_where_group(ParsedQuery& q) {
    if (at_word("WHERE")) advance();
    expect_punct("{");
    parse_group_body(q, -1);
    group_close_pos_ = cur_.pos;
    expect_punct("}");
  }

  void parse_group_body(ParsedQuery& q, int optional_group) {
    for (;;) {
      if (at_punct("}")) return;
      if (cur_.type == Token::Type::End) fail(cur_.pos, "}", "end of input");

      if (at_word("FILTER")) {
        advance();
        if (!at_punct("(")) fail(cur_.pos, "(", token_desc(cur_));
        std::string inner = lexer_.capture_parens(cur_.pos);
        advance();
        q.filters.push_back(collapse_whitespace(inner));
        ++q.filter_count;
        if (at_punct(".")) advance();
        continue;
      }
      if (at_word("OPTIONAL")) {
        advance();
        int group_id = q.optional_count++;
        expect_punct("{");
        parse_group_body(q, group_id);
        expect_punct("}");
        if (at_punct(".")) advance();
        continue;
      }
      if (at_punct("{")) {
        advance();
        ParsedQuery sub = parse_query_unit(/*is_subquery=*/true);
        validate(sub);
        expect_punct("}");
        q.subquery_count += 1 + sub.subquery_count;
        q.property_path_count += sub.property_path_count;
        q.aggregate_count += sub.aggregate_count;
        q.subqueries.push_back(std::move(sub));
        if (at_punct(".")) advance();
        continue;
      }

      parse_triples_same_subject(q, /*into_template=*/false, optional_group);
      if (at_punct(".")) {
        advance();
        continue;
      }
      // '.' is only optional before a non-triples element or the close.
      if (at_punct("}") || at_word("FILTER") || at_word("OPTIONAL") || at_punct("{")) continue;
      fail(cur_.pos, ". or }", token_desc(cur_));
    }
  }

  void parse_triples_same_subject(ParsedQuery& q, bool into_template, int optional_group) {
    Term subject = parse_term(/*allow_literal=*/true);
    if (subject.is_literal()) fail(cur_.pos, "IRI, variable or blank node as subject", "literal");

    for (;;) {
      bool is_path = false;
      Term predicate = parse_verb(q, is_path, into_template);
      // object list
      for (;;) {
        Term object = parse_term(/*allow_literal=*/true);
        TriplePattern pattern{subject, predicate, object, is_path,
                              into_template ? -1 : optional_group};
        if (into_template)
          q.construct_template.push_back(std::move(pattern));
        else
          q.bgp.push_back(std::move(pattern));
        if (at_punct(",")) {
          advance();
          continue;
        }
        break;
      }
      if (at_punct(";")) {
        advance();
        // tolerate a dangling ';' before '.' or '}'
        if (at_punct(".") || at_punct("}")) break;
        continue;
      }
      break;
    }
  }

  Term parse_verb(ParsedQuery& q, bool& is_path, bool into_template) {
    if (cur_.type == Token::Type::Var) {
      Term t = Term::variable(cur_.text);
      advance();
      return t;
    }

    // Path grammar: segment (('/'|'|') segment)*, segment = ['^'] iri ['+'|'*'|'?']
    std::string rendered;
    int segments = 0;
    bool modifiers_seen = false;
    bool inverse_seen = false;
    std::string single_iri;

    for (;;) {
      if (at_punct("^")) {
        inverse_seen = true;
        rendered += "^";
        advance();
      }
      std::string iri = parse_iri_like("predicate");
      rendered += "<" + iri + ">";
      single_iri = iri;
      ++segments;
      if (at_punct("+") || at_punct("*") || at_punct("?")) {
        modifiers_seen = true;
        rendered += cur_.text;
        advance();
      }
      if (at_punct("/") || at_punct("|")) {
        rendered += cur_.text;
        advance();
        continue;
      }
      break;
    }

    if (segments == 1 && !modifiers_seen && !inverse_seen) {
      is_path = false;
      return Term::iri(single_iri);
    }
    if (into_template) fail(cur_.pos, "plain predicate in template", "property path");
    is_path = true;
    ++q.property_path_count;
    return Term::iri(rendered);
  }

  // IRI, prefixed name, or the keyword 'a'.
  std::string parse_iri_like(const char* what) {
    if (cur_.type == Token::Type::Iri) {
      std::string iri = resolve_iri(cur_.text, cur_.pos);
      advance();
      return iri;
    }
    if (cur_.type == Token::Type::PName) {
      std::string iri = expand_pname(cur_);
      advance();
      return iri;
    }
    if (cur_.type == Token::Type::Word && cur_.text == "a") {
      advance();
      return std::string(rdf_type_iri);
    }
    fail(cur_.pos, what, token_desc(cur_));
  }

  Term parse_term(bool allow_literal) {
    switch (cur_.type) {
      case Token::Type::Var: {
        Term t = Term::variable(cur_.text);
        advance();
        return t;
      }
      case Token::Type::Iri: {
        Term t = Term::iri(resolve_iri(cur_.text, cur_.pos));
        advance();
        return t;
      }
      case Token::Type::PName: {
        Term t = Term::iri(expand_pname(cur_));
        advance();
        return t;
      }
      case Token::Type::Blank: {
        std::string label = cur_.text;
        advance();
        return Term::variable(fresh_blank_name(label));
      }
      case Token::Type::String: {
        if (!allow_literal) fail(cur_.pos, "IRI or variable", token_desc(cur_));
        std::string value = cur_.text;
        advance();
        if (cur_.type == Token::Type::LangTag) {
          std::string lang = cur_.text;
          advance();
          return Term::literal(std::move(value), {}, std::move(lang));
        }
        if (at_punct("^^")) {
          advance();
          std::string dt = parse_iri_like("datatype IRI");
          return Term::literal(std::move(value), std::move(dt), {});
        }
        return Term::literal(std::move(value));
      }
      case Token::Type::Number: {
        if (!allow_literal) fail(cur_.pos, "IRI or variable", token_desc(cur_));
        Term t = Term::literal(cur_.text, cur_.extra, {});
        advance();
        return t;
      }
      case Token::Type::Word: {
        if (allow_literal && (equals_ci(cur_.text, "true") || equals_ci(cur_.text, "false"))) {
          Term t = Term::literal(to_lower(cur_.text), std::string(xsd_boolean), {});
          advance();
          return t;
        }
        fail(cur_.pos, "term", token_desc(cur_));
      }
      case Token::Type::Punct: {
        if (cur_.text == "[") {
          std::size_t open = cur_.pos;
          advance();
          if (!at_punct("]")) fail(open, "]", token_desc(cur_));
          advance();
          return Term::variable(fresh_blank_name(""));
        }
        fail(cur_.pos, "term", token_desc(cur_));
      }
      default:
        fail(cur_.pos, "term", token_desc(cur_));
    }
  }

  void parse_modifiers(ParsedQuery& q) {
    if (at_word("GROUP")) {
      advance();
      if (!at_word("BY")) fail(cur_.pos, "BY", token_desc(cur_));
      advance();
      if (cur_.type != Token::Type::Var) fail(cur_.pos, "grouping variable", token_desc(cur_));
      while (cur_.type == Token::Type::Var) {
        q.group_by.push_back(cur_.text);
        advance();
      }
    }
    for (;;) {
      if (at_word("LIMIT")) {
        advance();
        q.limit = parse_nonnegative_int();
      } else if (at_word("OFFSET")) {
        advance();
        q.offset = parse_nonnegative_int();
      } else {
        break;
      }
    }
  }

  long parse_nonnegative_int() {
    if (cur_.type != Token::Type::Number || cur_.extra != xsd_integer)
      fail(cur_.pos, "non-negative integer", token_desc(cur_));
    long v = std::stol(cur_.text);
    advance();
    return v;
  }

  std::string expand_pname(const Token& t) {
    auto it = prefixes_.find(t.text);
    if (it == prefixes_.end()) fail(t.pos, "declared prefix", t.text + ":");
    return it->second + t.extra;
  }

  std::string resolve_iri(const std::string& iri, std::size_t pos) {
    // absolute iff it carries a scheme
    bool absolute = false;
    for (std::size_t i = 0; i < iri.size(); ++i) {
      char c = iri[i];
      if (c == ':') {
        absolute = i > 0;
        break;
      }
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') break;
    }
    if (absolute) return iri;
    if (base_.empty()) fail(pos, "absolute IRI or BASE declaration", "<" + iri + ">");
    return base_ + iri;
  }

  std::string fresh_blank_name(const std::string& label) {
    if (!label.empty()) {
      auto it = blank_names_.find(label);
      if (it != blank_names_.end()) return it->second;
    }
    std::string name;
    do {
      name = "_b" + std::to_string(++blank_counter_);
    } while (used_names_.count(name) > 0);
    used_names_.insert(name);
    if (!label.empty()) blank_names_[label] = name;
    return name;
  }

  void validate(const ParsedQuery& q) {
    if (q.bgp.empty()) fail(group_close_pos_, "triple pattern", "}");

    std::set<std::string> bound = bound_variables(q);

    std::set<std::string> aliases;
    for (const auto& item : q.projection) {
      if (item.is_aggregate()) {
        const std::string& alias = item.aggregate->alias;
        if (bound.count(alias) > 0)
          fail(0, "alias distinct from pattern variables", "?" + alias);
        if (!aliases.insert(alias).second) fail(0, "distinct alias", "?" + alias);
      }
    }
    for (const auto& item : q.projection) {
      if (!item.is_aggregate()) {
        const std::string& var = item.variable;
        bool in_group_by = false;
        for (const auto& g : q.group_by) in_group_by |= g == var;
        if (bound.count(var) == 0 && !in_group_by)
          fail(0, "projected variable bound in the group pattern", "?" + var);
      }
    }
  }

  static std::set<std::string> bound_variables(const ParsedQuery& q) {
    std::set<std::string> bound = q.bgp_variables();
    for (const auto& sub : q.subqueries) {
      if (sub.select_star) {
        auto inner = bound_variables(sub);
        bound.insert(inner.begin(), inner.end());
      } else {
        for (const auto& item : sub.projection)
          bound.insert(item.is_aggregate() ? item.aggregate->alias : item.variable);
      }
    }
    return bound;
  }

  std::string_view text_;
  Lexer lexer_;
  Token cur_;
  std::map<std::string, std::string> prefixes_;
  std::string base_;
  std::set<std::string> used_names_;
  std::map<std::string, std::string> blank_names_;
  int blank_counter_ = 0;
  std::size_t group_close_pos_ = 0;
};

} // namespace

std::set<std::string> ParsedQuery::bgp_variables() const {
  std::set<std::string> out;
  for (const auto& p : bgp) {
    if (p.subject.is_variable()) out.insert(p.subject.value);
    if (p.predicate.is_variable()) out.insert(p.predicate.value);
    if (p.object.is_variable()) out.insert(p.object.value);
  }
  return out;
}

namespace {

void collect_term_iris(const Term& t, bool is_path, std::set<std::string>& out) {
  if (!t.is_iri()) return;
  if (!is_path) {
    out.insert(t.value);
    return;
  }
  // path text: every <...> span is an IRI
  const std::string& s = t.value;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    auto close = s.find('>', i);
    if (close == std::string::npos) break;
    out.insert(s.substr(i + 1, close - i - 1));
    i = close + 1;
  }
}

void collect_query_iris(const ParsedQuery& q, std::set<std::string>& out) {
  for (const auto& p : q.bgp) {
    collect_term_iris(p.subject, false, out);
    collect_term_iris(p.predicate, p.is_path, out);
    collect_term_iris(p.object, false, out);
  }
  for (const auto& p : q.construct_template) {
    collect_term_iris(p.subject, false, out);
    collect_term_iris(p.predicate, p.is_path, out);
    collect_term_iris(p.object, false, out);
  }
  for (const auto& sub : q.subqueries) collect_query_iris(sub, out);
}

} // namespace

std::set<std::string> ParsedQuery::constant_iris() const {
  std::set<std::string> out;
  collect_query_iris(*this, out);
  return out;
}

ParseResult parse_query(std::string_view text) { return Parser(text).run(); }

} // namespace lodlog
