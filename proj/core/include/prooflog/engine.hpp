#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prooflog/clause.hpp"
#include "prooflog/proof.hpp"
#include "prooflog/term.hpp"

namespace prooflog {

enum class Strategy { dfs, ids };

/// Search defaults follow the evaluation setup: depth ceiling 20 and at most
/// 20 reasoning paths per query.
struct SearchConfig {
  Strategy strategy = Strategy::ids;
  int max_depth = 20;
  int max_solutions = 20;
  long long step_budget = 1'000'000;
  bool occurs_check = false;
};

struct Solution {
  Substitution answer_bindings;  // restricted to the query's variables
  ProofTree proof;               // synthetic query root for >1-goal queries
  int depth_found = 0;
  long long steps_used = 0;
};

struct SolveResult {
  std::vector<Solution> solutions;  // discovery order, fully reproducible
  bool budget_exhausted = false;    // step budget hit; solutions are partial
  bool depth_capped = false;        // a branch was pruned by the depth bound
  long long steps_used = 0;
  std::vector<std::string> diagnostics;  // per-branch arithmetic/naf aborts
};

/// Dispatches on cfg.strategy: DFS runs without depth semantics (the step
/// budget is the only guard against divergence); IDS delegates to ids_solve.
SolveResult solve(const KnowledgeBase& kb, const std::vector<Goal>& query,
                  const SearchConfig& cfg);

/// DFS restricted to proofs of resolution depth <= limit. Fact/rule
/// resolutions consume one depth unit; builtin and naf goals consume none.
SolveResult depth_limited_solve(const KnowledgeBase& kb,
                                const std::vector<Goal>& query, int limit,
                                const SearchConfig& cfg);

/// Depth-limited searches with limits 1, 2, ... cfg.max_depth. Returns the
/// solutions of the first solution-bearing limit (collected up to
/// max_solutions within that limit), so the first solution has minimal proof
/// depth. Queries whose search space exhausts below the current limit
/// terminate early; depth_capped is set when max_depth itself was binding.
SolveResult ids_solve(const KnowledgeBase& kb, const std::vector<Goal>& query,
                      const SearchConfig& cfg);

struct BuiltinError : std::runtime_error {
  enum class Kind { instantiation, division_by_zero, type };
  Kind error_kind;
  BuiltinError(Kind kind, const std::string& message)
      : std::runtime_error(message), error_kind(kind) {}
};

struct FlounderingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational value of a ground arithmetic expression over + - * / and
/// unary minus. Throws BuiltinError on unbound variables, non-numeric leaves,
/// or division by zero.
Rational eval_arith(const Term& expr);

/// Evaluates one builtin goal under s: `is` binds or checks the left side
/// against the exact evaluation, comparisons compare rationals, `=` unifies,
/// `==`/`\==` test structural identity without binding. Failure is a normal
/// outcome; BuiltinError signals instantiation/arithmetic faults.
std::optional<Substitution> call_builtin(const Goal& builtin_goal,
                                         const Substitution& s,
                                         bool occurs_check = false);

struct NafResult {
  bool succeeded = false;
  ProofTree node;  // naf node recording the depth limit used
  bool budget_exhausted = false;
};

/// Succeeds iff the (ground) inner goal has no proof within depth_limit
/// (-1 = unbounded). Throws FlounderingError on non-ground inner goals.
NafResult solve_naf(const Goal& naf_goal, const KnowledgeBase& kb,
                    int depth_limit, const SearchConfig& cfg);

enum class AnswerLabel { true_, false_, unknown };

std::string_view answer_label_name(AnswerLabel label);
std::optional<AnswerLabel> answer_label_from(std::string_view name);

struct Classification {
  AnswerLabel label = AnswerLabel::unknown;
  ProofTree proof;  // proof of the statement (True) or its negation (False)
  bool inconsistent = false;      // both the statement and its neg_ provable
  bool budget_exhausted = false;  // an Unknown under exhausted budget is weak
  std::vector<std::string> diagnostics;
};

/// Open-world three-way classification. The statement is a positive literal
/// or a neg_-prefixed one; falsity means its neg_ counterpart is provable.
Classification classify_answer(const KnowledgeBase& kb, const Term& statement,
                               const SearchConfig& cfg);

struct CheckOutcome {
  bool accepted = false;
  std::string reason;  // names the first failing node when rejected
};

/// Independent replay of an emitted (or deserialized) proof: every fact node
/// must instantiate a kb fact, every rule node must instantiate one kb clause
/// simultaneously with its children, builtins must re-evaluate to their
/// recorded results, and naf nodes must still fail within their recorded
/// depth limit.
CheckOutcome check_proof(const KnowledgeBase& kb, const ProofTree& proof,
                         const SearchConfig& cfg);

/// Rebuilds a Goal from a goal-shaped term (builtin functors become builtin
/// goals, anything callable becomes a call).
Goal goal_from_term(const Term& t);

}  // namespace prooflog
