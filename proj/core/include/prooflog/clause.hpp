#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prooflog/term.hpp"

namespace prooflog {

/// Arithmetic/comparison builtins of the subset. `eval_is` is `is`;
/// `unify_terms` is `=`; the rest follow Prolog spellings.
enum class BuiltinOp {
  eval_is,     // is
  unify_terms, // =
  struct_eq,   // ==
  struct_ne,   // \==
  arith_eq,    // =:=
  arith_ne,    // =\=
  less,        // <
  greater,     // >
  less_eq,     // =<
  greater_eq,  // >=
};

const char* builtin_name(BuiltinOp op);

/// A body goal: a user predicate call, a builtin, or negation as failure.
/// Negation nests only calls and builtins (no double negation in the
/// subset).
struct Goal {
  enum class Kind { call, builtin, naf };

  Kind kind = Kind::call;
  /// call: the literal; builtin: compound(op, {lhs, rhs}).
  Term term;
  BuiltinOp op = BuiltinOp::eval_is;
  std::shared_ptr<const Goal> inner;  // naf only

  static Goal call(Term literal);
  static Goal builtin(BuiltinOp op, Term lhs, Term rhs);
  static Goal naf(Goal inner);

  friend bool operator==(const Goal& a, const Goal& b);
};

/// Fact or rule. Facts have an empty body. The head is always callable.
/// `provenance` links the clause to a source-statement identifier ("" when
/// absent).
struct Clause {
  Term head;
  std::vector<Goal> body;
  std::string provenance;

  bool is_fact() const { return body.empty(); }
};

/// Ordered clause list with a (functor, arity) index and a provenance index.
/// Clause order equals source order; search determinism depends on it.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::vector<Clause> clauses);

  void add(Clause clause);

  const std::vector<Clause>& clauses() const { return clauses_; }
  std::size_t size() const { return clauses_.size(); }

  /// Positions of clauses whose head has the given functor and arity, in
  /// source order. Atoms have arity 0.
  std::span<const std::size_t> candidates(const std::string& functor,
                                          std::size_t arity) const;

  std::span<const std::size_t> by_provenance(const std::string& id) const;

  const std::string& provenance_of(std::size_t position) const {
    return clauses_.at(position).provenance;
  }

  /// Index/clause-list consistency check (used by tests).
  bool index_consistent() const;

 private:
  std::vector<Clause> clauses_;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>>
      index_;
  std::map<std::string, std::vector<std::size_t>> provenance_index_;
};

std::string render_goal(const Goal& g);
/// "head." or "head :- b1, b2." without the provenance comment.
std::string render_clause(const Clause& c);
/// Full program text including "% id:" provenance comments; reparses to an
/// equal KnowledgeBase.
std::string render_program(const KnowledgeBase& kb);

}  // namespace prooflog
