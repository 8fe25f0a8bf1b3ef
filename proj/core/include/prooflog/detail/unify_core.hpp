#pragma once

#include <utility>
#include <vector>

#include "prooflog/term.hpp"
#include "prooflog/unify.hpp"

namespace prooflog::detail {

// The unification core is shared between the pure Substitution-based API and
// the engine's trail-based store; Store needs lookup(VarKey) ->
// optional<Term> and bind(VarKey, Term).

template <class Store>
Term walk(const Store& store, Term t) {
  int guard = 0;
  while (t.is_var()) {
    auto bound = store.lookup(var_key(t));
    if (!bound) return t;
    t = std::move(*bound);
    if (++guard > kApplyExpansionCap) {
      throw CyclicTermError("variable chain exceeds expansion cap");
    }
  }
  return t;
}

// Only called with the occurs check on, where bindings stay acyclic.
template <class Store>
bool occurs_in(const Store& store, const VarKey& v, const Term& t) {
  const Term w = walk(store, t);
  switch (w.kind()) {
    case Term::Kind::variable:
      return var_key(w) == v;
    case Term::Kind::compound:
      for (const Term& arg : w.args()) {
        if (occurs_in(store, v, arg)) return true;
      }
      return false;
    default:
      return false;
  }
}

// On failure the store may hold partial bindings; callers either copied the
// store or roll back via their trail.
template <class Store>
bool unify_into(const Term& a, const Term& b, Store& store,
                bool occurs_check) {
  std::vector<std::pair<Term, Term>> work;
  work.emplace_back(a, b);
  while (!work.empty()) {
    auto [x, y] = std::move(work.back());
    work.pop_back();
    const Term s = walk(store, x);
    const Term t = walk(store, y);
    if (s.is_var()) {
      if (t.is_var() && var_key(s) == var_key(t)) continue;
      if (occurs_check && occurs_in(store, var_key(s), t)) return false;
      store.bind(var_key(s), t);
      continue;
    }
    if (t.is_var()) {
      if (occurs_check && occurs_in(store, var_key(t), s)) return false;
      store.bind(var_key(t), s);
      continue;
    }
    if (s.kind() != t.kind()) return false;
    switch (s.kind()) {
      case Term::Kind::number:
        if (s.number_value() != t.number_value()) return false;
        break;
      case Term::Kind::atom:
        if (s.name() != t.name()) return false;
        break;
      case Term::Kind::compound: {
        if (s.name() != t.name() || s.arity() != t.arity()) return false;
        for (std::size_t i = s.arity(); i-- > 0;) {
          work.emplace_back(s.args()[i], t.args()[i]);
        }
        break;
      }
      default:
        return false;
    }
  }
  return true;
}

template <class Store>
Term apply_store(const Store& store, const Term& t, int expansions = 0) {
  if (expansions > kApplyExpansionCap) {
    throw CyclicTermError("substitution application exceeds expansion cap");
  }
  switch (t.kind()) {
    case Term::Kind::variable: {
      auto bound = store.lookup(var_key(t));
      if (!bound) return t;
      return apply_store(store, *bound, expansions + 1);
    }
    case Term::Kind::compound: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const Term& arg : t.args()) {
        args.push_back(apply_store(store, arg, expansions));
      }
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

}  // namespace prooflog::detail
