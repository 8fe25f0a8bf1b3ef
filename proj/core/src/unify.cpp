#include "prooflog/unify.hpp"

#include <algorithm>

#include "prooflog/detail/unify_core.hpp"

namespace prooflog {

std::optional<Substitution> unify(const Term& a, const Term& b,
                                  Substitution s, bool occurs_check) {
  if (!detail::unify_into(a, b, s, occurs_check)) return std::nullopt;
  return s;
}

Term apply(const Substitution& s, const Term& t) {
  return detail::apply_store(s, t);
}

Substitution Substitution::restricted_to(std::span<const VarKey> keys) const {
  Substitution out;
  for (const VarKey& key : keys) {
    if (!lookup(key)) continue;
    const Term resolved =
        detail::apply_store(*this, Term::var(key.name, key.index));
    out.bind(key, resolved);
  }
  return out;
}

Term rename_apart(const Term& t, int generation) {
  switch (t.kind()) {
    case Term::Kind::variable:
      return Term::var(t.name(), generation);
    case Term::Kind::compound: {
      std::vector<Term> args;
      args.reserve(t.arity());
      for (const Term& arg : t.args()) {
        args.push_back(rename_apart(arg, generation));
      }
      return Term::compound(t.name(), std::move(args));
    }
    default:
      return t;
  }
}

Goal rename_apart(const Goal& g, int generation) {
  switch (g.kind) {
    case Goal::Kind::call:
      return Goal::call(rename_apart(g.term, generation));
    case Goal::Kind::builtin:
      return Goal::builtin(g.op, rename_apart(g.term.args()[0], generation),
                           rename_apart(g.term.args()[1], generation));
    case Goal::Kind::naf:
      return Goal::naf(rename_apart(*g.inner, generation));
  }
  return g;
}

Clause rename_apart(const Clause& c, int generation) {
  Clause out;
  out.head = rename_apart(c.head, generation);
  out.body.reserve(c.body.size());
  for (const Goal& g : c.body) out.body.push_back(rename_apart(g, generation));
  out.provenance = c.provenance;
  return out;
}

bool occurs(const VarKey& v, const Term& t, const Substitution& s) {
  return detail::occurs_in(s, v, t);
}

void collect_vars(const Term& t, std::vector<VarKey>& out) {
  switch (t.kind()) {
    case Term::Kind::variable: {
      const VarKey key = var_key(t);
      if (std::find(out.begin(), out.end(), key) == out.end()) {
        out.push_back(key);
      }
      return;
    }
    case Term::Kind::compound:
      for (const Term& arg : t.args()) collect_vars(arg, out);
      return;
    default:
      return;
  }
}

void collect_vars(const Goal& g, std::vector<VarKey>& out) {
  switch (g.kind) {
    case Goal::Kind::call:
    case Goal::Kind::builtin:
      collect_vars(g.term, out);
      return;
    case Goal::Kind::naf:
      collect_vars(*g.inner, out);
      return;
  }
}

bool is_ground(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::variable:
      return false;
    case Term::Kind::compound:
      for (const Term& arg : t.args()) {
        if (!is_ground(arg)) return false;
      }
      return true;
    default:
      return true;
  }
}

}  // namespace prooflog
