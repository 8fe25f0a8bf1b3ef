#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prooflog/clause.hpp"
#include "prooflog/term.hpp"

namespace prooflog {

struct SourceProgram {
  std::string text;
  std::string origin;  // file path or instance identifier
};

struct ParseDiagnostic {
  enum class Kind { error, warning };
  int line = 1;    // 1-based, on the offending token
  int column = 1;  // 1-based
  std::string message;
  Kind kind = Kind::error;
};

struct Token {
  enum class Type {
    name,        // lowercase identifier
    variable,    // uppercase/underscore identifier
    number,      // exact rational literal
    op,          // ":-", "?-", "is", comparisons, arithmetic, "\\+"
    punct,       // ( ) , . and rejected subset punctuation
    provenance,  // "% id: <identifier>" comment
    end_of_input,
  };
  Type type = Type::end_of_input;
  std::string text;
  Rational value;  // numbers only
  int line = 1;
  int column = 1;
};

struct TokenizeResult {
  std::vector<Token> tokens;  // ends with end_of_input
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const;
};

TokenizeResult tokenize(const SourceProgram& p);

struct ParseResult {
  KnowledgeBase kb;
  std::vector<std::vector<Goal>> queries;  // "?- ..." statements, source order
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const;
};

/// Clauses only; a "?-" statement is an error here. Recovers at clause
/// granularity: every independently parseable clause loads, every broken one
/// gets its own positioned diagnostic.
ParseResult parse_program(const SourceProgram& p);

/// Clauses plus "?-" queries, as found in generated/offline program files.
ParseResult parse_source(const SourceProgram& p);

struct QueryParseResult {
  std::vector<Goal> goals;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const;
};

/// Conjunction with optional leading "?-" and trailing ".".
QueryParseResult parse_query(const std::string& text);

/// Inverse of canonical_render; nullopt on any syntax error.
std::optional<Term> parse_term(const std::string& text);

/// Single body goal: "p(a)", "X is 1 + 2", "\\+ p(a)".
std::optional<Goal> parse_goal(const std::string& text);

}  // namespace prooflog
