#include "prooflog/parser.hpp"

#include <array>
#include <cctype>
#include <string_view>
#include <utility>

namespace prooflog {

namespace {

bool has_error(const std::vector<ParseDiagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.kind == ParseDiagnostic::Kind::error) return true;
  }
  return false;
}

bool is_name_start(char c) { return std::islower(static_cast<unsigned char>(c)); }
bool is_var_start(char c) {
  return std::isupper(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Longest-match operator table.
constexpr std::array<std::string_view, 17> kOperators = {
    "=:=", "=\\=", "\\==", ":-", "?-", "==", "=<", ">=", "\\+",
    "=",   "<",    ">",    "+",  "-",  "*",  "/", "is"};

class Tokenizer {
 public:
  explicit Tokenizer(const SourceProgram& p) : text_(p.text) {}

  TokenizeResult run() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
        continue;
      }
      if (c == '%') {
        comment();
        continue;
      }
      if (is_digit(c)) {
        number();
        continue;
      }
      if (is_name_start(c) || is_var_start(c)) {
        identifier();
        continue;
      }
      if (!op_or_punct()) {
        error("illegal character '" + std::string(1, c) + "'");
        advance(1);
      }
    }
    push(Token::Type::end_of_input, "");
    return {std::move(tokens_), std::move(diagnostics_)};
  }

 private:
  void advance(std::size_t n) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  void push(Token::Type type, std::string text, int line = -1, int col = -1) {
    Token t;
    t.type = type;
    t.text = std::move(text);
    t.line = line < 0 ? line_ : line;
    t.column = col < 0 ? col_ : col;
    tokens_.push_back(std::move(t));
  }

  void error(std::string message) {
    diagnostics_.push_back({line_, col_, std::move(message),
                            ParseDiagnostic::Kind::error});
  }

  void comment() {
    const int start_line = line_;
    const int start_col = col_;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    std::string_view body{text_.data() + pos_ + 1, end - pos_ - 1};
    advance(end - pos_);
    // "% id: <identifier>" attaches provenance to the following clause.
    std::size_t i = 0;
    while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
    if (body.substr(i, 3) == "id:") {
      i += 3;
      while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
      std::size_t j = i;
      const auto id_char = [](char c) {
        return is_ident(c) || c == '-' || c == '.' || c == ':';
      };
      while (j < body.size() && id_char(body[j])) ++j;
      std::size_t k = j;
      while (k < body.size() && (body[k] == ' ' || body[k] == '\t')) ++k;
      if (j > i && k == body.size()) {
        push(Token::Type::provenance, std::string(body.substr(i, j - i)),
             start_line, start_col);
      }
    }
  }

  void number() {
    const int start_line = line_;
    const int start_col = col_;
    std::size_t end = pos_;
    while (end < text_.size() && is_digit(text_[end])) ++end;
    if (end < text_.size() && text_[end] == '.' && end + 1 < text_.size() &&
        is_digit(text_[end + 1])) {
      ++end;
      while (end < text_.size() && is_digit(text_[end])) ++end;
    } else if (end < text_.size() && text_[end] == 'r' &&
               end + 1 < text_.size() && is_digit(text_[end + 1])) {
      ++end;
      while (end < text_.size() && is_digit(text_[end])) ++end;
    }
    const std::string literal = text_.substr(pos_, end - pos_);
    advance(end - pos_);
    const auto value = parse_rational(literal);
    if (!value) {
      diagnostics_.push_back({start_line, start_col,
                              "malformed number literal '" + literal + "'",
                              ParseDiagnostic::Kind::error});
      return;
    }
    Token t;
    t.type = Token::Type::number;
    t.text = literal;
    t.value = *value;
    t.line = start_line;
    t.column = start_col;
    tokens_.push_back(std::move(t));
  }

  void identifier() {
    const int start_line = line_;
    const int start_col = col_;
    std::size_t end = pos_;
    while (end < text_.size() && is_ident(text_[end])) ++end;
    std::string word = text_.substr(pos_, end - pos_);
    advance(end - pos_);
    if (word == "is") {
      push(Token::Type::op, std::move(word), start_line, start_col);
    } else if (is_var_start(word[0])) {
      push(Token::Type::variable, std::move(word), start_line, start_col);
    } else {
      push(Token::Type::name, std::move(word), start_line, start_col);
    }
  }

  bool op_or_punct() {
    const std::string_view rest{text_.data() + pos_, text_.size() - pos_};
    for (const std::string_view op : kOperators) {
      if (op == "is") continue;  // handled as an identifier
      if (rest.substr(0, op.size()) == op) {
        push(Token::Type::op, std::string(op));
        advance(op.size());
        return true;
      }
    }
    const char c = rest[0];
    if (c == '(' || c == ')' || c == ',' || c == '.' || c == ';' || c == '!' ||
        c == '[' || c == ']' || c == '|') {
      push(Token::Type::punct, std::string(1, c));
      advance(1);
      return true;
    }
    return false;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  std::vector<Token> tokens_;
  std::vector<ParseDiagnostic> diagnostics_;
};

struct SyntaxError {
  int line;
  int column;
  std::string message;
};

const std::pair<std::string_view, BuiltinOp> kComparisonOps[] = {
    {"is", BuiltinOp::eval_is},    {"=", BuiltinOp::unify_terms},
    {"==", BuiltinOp::struct_eq},  {"\\==", BuiltinOp::struct_ne},
    {"=:=", BuiltinOp::arith_eq},  {"=\\=", BuiltinOp::arith_ne},
    {"<", BuiltinOp::less},        {">", BuiltinOp::greater},
    {"=<", BuiltinOp::less_eq},    {">=", BuiltinOp::greater_eq},
};

bool is_arith_functor(const Term& t) {
  if (!t.is_compound()) return false;
  const std::string& f = t.name();
  if (t.arity() == 2) return f == "+" || f == "-" || f == "*" || f == "/";
  return t.arity() == 1 && f == "-";
}

const char* subset_hint(const std::string& text) {
  if (text == ";") return "disjunction ';' is not supported in this subset";
  if (text == "!") return "cut '!' is not supported in this subset";
  if (text == "[" || text == "]" || text == "|")
    return "lists are not supported in this subset";
  return nullptr;
}

bool is_rejected_predicate(const std::string& name) {
  return name == "assert" || name == "asserta" || name == "assertz" ||
         name == "retract" || name == "findall";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<ParseDiagnostic> diagnostics)
      : tokens_(std::move(tokens)), diagnostics_(std::move(diagnostics)) {}

  ParseResult parse_statements(bool allow_queries) {
    ParseResult result;
    std::string pending_provenance;
    int pending_line = 0;
    while (!at_end()) {
      if (peek().type == Token::Type::provenance) {
        if (!pending_provenance.empty()) {
          warn(peek(), "provenance comment replaces an earlier unattached one");
        }
        pending_provenance = peek().text;
        pending_line = peek().line;
        next();
        continue;
      }
      try {
        if (peek().type == Token::Type::op && peek().text == "?-") {
          const Token& marker = peek();
          next();
          std::vector<Goal> goals = parse_body();
          expect_dot();
          if (!allow_queries) {
            diagnostics_.push_back({marker.line, marker.column,
                                    "queries are not allowed in a program",
                                    ParseDiagnostic::Kind::error});
          } else {
            result.queries.push_back(std::move(goals));
          }
          continue;
        }
        Clause clause = parse_clause();
        clause.provenance = std::exchange(pending_provenance, {});
        result.kb.add(std::move(clause));
      } catch (const SyntaxError& e) {
        diagnostics_.push_back({e.line, e.column, e.message,
                                ParseDiagnostic::Kind::error});
        skip_to_clause_end();
      }
    }
    if (!pending_provenance.empty()) {
      diagnostics_.push_back({pending_line, 1,
                              "provenance comment is not followed by a clause",
                              ParseDiagnostic::Kind::warning});
    }
    result.diagnostics = std::move(diagnostics_);
    return result;
  }

  QueryParseResult parse_single_query() {
    QueryParseResult result;
    try {
      if (peek().type == Token::Type::op && peek().text == "?-") next();
      result.goals = parse_body();
      if (peek().type == Token::Type::punct && peek().text == ".") next();
      expect_end();
    } catch (const SyntaxError& e) {
      diagnostics_.push_back({e.line, e.column, e.message,
                              ParseDiagnostic::Kind::error});
      result.goals.clear();
    }
    result.diagnostics = std::move(diagnostics_);
    return result;
  }

  std::optional<Term> parse_single_term() {
    try {
      Term t = parse_additive();
      expect_end();
      if (has_error(diagnostics_)) return std::nullopt;
      return t;
    } catch (const SyntaxError&) {
      return std::nullopt;
    }
  }

  std::optional<Goal> parse_single_goal() {
    try {
      Goal g = parse_goal_item();
      expect_end();
      if (has_error(diagnostics_)) return std::nullopt;
      return g;
    } catch (const SyntaxError&) {
      return std::nullopt;
    }
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool at_end() const { return peek().type == Token::Type::end_of_input; }

  [[noreturn]] void fail(const Token& at, std::string message) const {
    throw SyntaxError{at.line, at.column, std::move(message)};
  }

  void warn(const Token& at, std::string message) {
    diagnostics_.push_back({at.line, at.column, std::move(message),
                            ParseDiagnostic::Kind::warning});
  }

  void check_supported(const Token& t) const {
    if (t.type == Token::Type::punct) {
      if (const char* hint = subset_hint(t.text)) fail(t, hint);
    }
  }

  void expect_dot() {
    const Token& t = peek();
    if (t.type == Token::Type::punct && t.text == ".") {
      next();
      return;
    }
    check_supported(t);
    fail(t, "expected '.' at end of clause");
  }

  void expect_end() {
    if (!at_end()) fail(peek(), "unexpected trailing input");
  }

  void skip_to_clause_end() {
    while (!at_end()) {
      const Token& t = next();
      if (t.type == Token::Type::punct && t.text == ".") return;
    }
  }

  Clause parse_clause() {
    const Token& head_token = peek();
    Term head = parse_additive();
    if (!head.is_callable() || is_arith_functor(head)) {
      fail(head_token, "clause head must be an atom or a compound predicate");
    }
    Clause clause;
    clause.head = std::move(head);
    if (peek().type == Token::Type::op && peek().text == ":-") {
      next();
      clause.body = parse_body();
    }
    expect_dot();
    return clause;
  }

  std::vector<Goal> parse_body() {
    std::vector<Goal> goals;
    goals.push_back(parse_goal_item());
    while (peek().type == Token::Type::punct && peek().text == ",") {
      next();
      goals.push_back(parse_goal_item());
    }
    return goals;
  }

  Goal parse_goal_item() {
    const Token& t = peek();
    if (t.type == Token::Type::op && t.text == "\\+") {
      next();
      Goal inner = parse_goal_item();
      if (inner.kind == Goal::Kind::naf) {
        fail(t, "double negation '\\+ \\+' is not supported in this subset");
      }
      return Goal::naf(std::move(inner));
    }
    const Token& lhs_token = peek();
    Term lhs = parse_additive();
    if (peek().type == Token::Type::op) {
      for (const auto& [spelling, op] : kComparisonOps) {
        if (peek().text == spelling) {
          next();
          Term rhs = parse_additive();
          return Goal::builtin(op, std::move(lhs), std::move(rhs));
        }
      }
    }
    if (!lhs.is_callable() || is_arith_functor(lhs)) {
      check_supported(peek());
      fail(lhs_token, "expected a predicate call, comparison, or 'is' goal");
    }
    if (is_rejected_predicate(lhs.name())) {
      fail(lhs_token,
           "'" + lhs.name() + "' is not supported in this subset");
    }
    return Goal::call(std::move(lhs));
  }

  Term parse_additive() {
    Term t = parse_multiplicative();
    while (peek().type == Token::Type::op &&
           (peek().text == "+" || peek().text == "-")) {
      const std::string op = next().text;
      Term rhs = parse_multiplicative();
      t = Term::compound(op, {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Term parse_multiplicative() {
    Term t = parse_unary();
    while (peek().type == Token::Type::op &&
           (peek().text == "*" || peek().text == "/")) {
      const std::string op = next().text;
      Term rhs = parse_unary();
      t = Term::compound(op, {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Term parse_unary() {
    if (peek().type == Token::Type::op && peek().text == "-") {
      next();
      Term operand = parse_unary();
      if (operand.is_number()) return Term::number(-operand.number_value());
      return Term::compound("-", {std::move(operand)});
    }
    return parse_primary();
  }

  Term parse_primary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::number: {
        next();
        return Term::number(t.value);
      }
      case Token::Type::variable: {
        next();
        // Each bare "_" is a distinct variable.
        if (t.text == "_") return Term::var("_G" + std::to_string(++anon_));
        return Term::var(t.text);
      }
      case Token::Type::name: {
        const std::string functor = next().text;
        if (peek().type == Token::Type::punct && peek().text == "(") {
          next();
          std::vector<Term> args;
          args.push_back(parse_additive());
          while (peek().type == Token::Type::punct && peek().text == ",") {
            next();
            args.push_back(parse_additive());
          }
          const Token& closer = peek();
          if (closer.type != Token::Type::punct || closer.text != ")") {
            check_supported(closer);
            fail(closer, "expected ',' or ')' in argument list");
          }
          next();
          return Term::compound(functor, std::move(args));
        }
        return Term::atom(functor);
      }
      case Token::Type::punct: {
        if (t.text == "(") {
          next();
          Term inner = parse_additive();
          const Token& closer = peek();
          if (closer.type != Token::Type::punct || closer.text != ")") {
            fail(closer, "expected ')'");
          }
          next();
          return inner;
        }
        check_supported(t);
        fail(t, "expected a term");
      }
      default:
        check_supported(t);
        fail(t, "expected a term");
    }
  }

  std::vector<Token> tokens_;
  std::vector<ParseDiagnostic> diagnostics_;
  std::size_t pos_ = 0;
  int anon_ = 0;
};

ParseResult run_parser(const SourceProgram& p, bool allow_queries) {
  TokenizeResult tokens = tokenize(p);
  if (!tokens.ok()) {
    ParseResult result;
    result.diagnostics = std::move(tokens.diagnostics);
    return result;
  }
  Parser parser(std::move(tokens.tokens), std::move(tokens.diagnostics));
  return parser.parse_statements(allow_queries);
}

}  // namespace

bool TokenizeResult::ok() const { return !has_error(diagnostics); }
bool ParseResult::ok() const { return !has_error(diagnostics); }
bool QueryParseResult::ok() const { return !has_error(diagnostics); }

TokenizeResult tokenize(const SourceProgram& p) { return Tokenizer(p).run(); }

ParseResult parse_program(const SourceProgram& p) {
  return run_parser(p, /*allow_queries=*/false);
}

ParseResult parse_source(const SourceProgram& p) {
  return run_parser(p, /*allow_queries=*/true);
}

QueryParseResult parse_query(const std::string& text) {
  TokenizeResult tokens = tokenize({text, "query"});
  if (!tokens.ok()) {
    QueryParseResult result;
    result.diagnostics = std::move(tokens.diagnostics);
    return result;
  }
  Parser parser(std::move(tokens.tokens), std::move(tokens.diagnostics));
  return parser.parse_single_query();
}

std::optional<Term> parse_term(const std::string& text) {
  TokenizeResult tokens = tokenize({text, "term"});
  if (!tokens.ok()) return std::nullopt;
  Parser parser(std::move(tokens.tokens), {});
  return parser.parse_single_term();
}

std::optional<Goal> parse_goal(const std::string& text) {
  TokenizeResult tokens = tokenize({text, "goal"});
  if (!tokens.ok()) return std::nullopt;
  Parser parser(std::move(tokens.tokens), {});
  return parser.parse_single_goal();
}

}  // namespace prooflog
