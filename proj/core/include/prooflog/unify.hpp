#pragma once

#include <optional>

#include "prooflog/clause.hpp"
#include "prooflog/term.hpp"

namespace prooflog {

/// Chain expansions allowed before apply() declares a cycle. Only reachable
/// with the occurs check off.
inline constexpr int kApplyExpansionCap = 1000;

/// Robinson unification extending `s`. Returns the extended substitution on
/// success (idempotent whenever acyclic, which the occurs check guarantees);
/// std::nullopt on mismatch. With occurs_check off, X = f(X) succeeds and
/// records a cyclic binding.
std::optional<Substitution> unify(const Term& a, const Term& b,
                                  Substitution s, bool occurs_check);

/// Replaces bound variables recursively; unbound variables survive. Raises
/// CyclicTermError past kApplyExpansionCap expansions along one chain.
Term apply(const Substitution& s, const Term& t);

/// Clause copy with every variable re-indexed to `generation`; shares no
/// variable with any other generation. Renaming a ground clause is the
/// identity up to structure.
Clause rename_apart(const Clause& c, int generation);
Term rename_apart(const Term& t, int generation);
Goal rename_apart(const Goal& g, int generation);

/// True when the variable occurs in t under s. Defined for acyclic s.
bool occurs(const VarKey& v, const Term& t, const Substitution& s);

/// Collects distinct variables of t in first-occurrence order.
void collect_vars(const Term& t, std::vector<VarKey>& out);
void collect_vars(const Goal& g, std::vector<VarKey>& out);

bool is_ground(const Term& t);

}  // namespace prooflog
