#pragma once

#include "prooflog/proof_graph.hpp"
#include "prooflog/rational.hpp"

namespace prooflog {

/// Unit-cost edit model: node insert/delete 1, node substitution free for
/// identical labels and 1 otherwise, edge insert/delete 1.
struct EditCosts {
  int node_insert = 1;
  int node_delete = 1;
  int node_substitute = 1;  // label mismatch; identical labels cost 0
  int edge_insert = 1;
  int edge_delete = 1;
};

struct GedBudget {
  long long max_expansions = 2'000'000;  // branch-and-bound states
};

struct GedResult {
  long long distance = 0;
  /// True: distance is the exact minimum edit cost. False: the budget ran
  /// out and distance is a certified upper bound (best mapping found, seeded
  /// by greedy label matching).
  bool exact = true;
};

/// Minimum-cost node mapping search (branch and bound with a label-multiset
/// lower bound). Symmetric under unit costs; distance(g, g) = 0.
GedResult ged(const ProofGraph& g1, const ProofGraph& g2,
              const EditCosts& costs = {}, const GedBudget& budget = {});

/// Normalized similarity: 0 when the answer is incorrect, otherwise
/// 1 - distance / max(|N_p|+|E_p|, |N_g|+|E_g|), clamped to [0, 1] (the
/// distance can exceed the denominator). Two empty graphs compare as 1.
Rational proof_similarity(const ProofGraph& pred, const ProofGraph& gold,
                          bool answer_correct, const EditCosts& costs = {},
                          const GedBudget& budget = {});

/// 1 iff the answer is correct and a label-preserving bijection maps the
/// node sets onto each other with coinciding edge sets; 0 otherwise. With
/// unique labels this reduces to equality of label sets and label-pair edge
/// sets.
int proof_exact_match(const ProofGraph& pred, const ProofGraph& gold,
                      bool answer_correct);

}  // namespace prooflog
