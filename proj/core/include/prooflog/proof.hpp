#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "prooflog/term.hpp"

namespace prooflog {

struct ProofNode;
using ProofTree = std::shared_ptr<const ProofNode>;

/// One derivation step. Heads are fully instantiated under the solution's
/// final substitution. A rule node has exactly one child per body goal, in
/// body order. The synthetic query node only ever appears at the root, for
/// conjunctive queries.
struct ProofNode {
  enum class Kind { fact, rule, builtin, naf, query };

  Kind kind = Kind::fact;
  /// fact/rule: instantiated head; builtin: instantiated goal; naf: the
  /// failed inner goal.
  Term head;
  std::string provenance;           // fact/rule: source-statement id, "" if none
  std::vector<ProofTree> children;  // rule and query nodes
  Term builtin_result;              // builtin: evaluated value or atom `true`
  /// naf: depth limit the failed sub-search ran with; -1 means unbounded.
  int naf_depth_limit = 0;
};

ProofTree proof_fact(Term head, std::string provenance);
ProofTree proof_rule(Term head, std::string provenance,
                     std::vector<ProofTree> children);
ProofTree proof_builtin(Term goal, Term result);
ProofTree proof_naf(Term failed_goal, int depth_limit);
ProofTree proof_query(std::vector<ProofTree> children);

/// Resolution depth: fact and rule nodes count one level along a path;
/// builtin, naf, and query nodes count zero.
int proof_depth(const ProofTree& p);

bool proof_equal(const ProofTree& a, const ProofTree& b);

std::size_t proof_node_count(const ProofTree& p);

struct ProofFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stable-field-order record per node: {kind, label, provenance, children}
/// plus `result` on builtin nodes and `depth_limit` on naf nodes. Labels are
/// canonical_render strings. indent < 0 emits compact single-line JSON.
std::string proof_to_json(const ProofTree& p, int indent = -1);

/// Inverse of proof_to_json; throws ProofFormatError on malformed input.
ProofTree proof_from_json(const std::string& text);

}  // namespace prooflog
