#include "prooflog/clause.hpp"

#include <algorithm>

namespace prooflog {

const char* builtin_name(BuiltinOp op) {
  switch (op) {
    case BuiltinOp::eval_is: return "is";
    case BuiltinOp::unify_terms: return "=";
    case BuiltinOp::struct_eq: return "==";
    case BuiltinOp::struct_ne: return "\\==";
    case BuiltinOp::arith_eq: return "=:=";
    case BuiltinOp::arith_ne: return "=\\=";
    case BuiltinOp::less: return "<";
    case BuiltinOp::greater: return ">";
    case BuiltinOp::less_eq: return "=<";
    case BuiltinOp::greater_eq: return ">=";
  }
  return "?";
}

Goal Goal::call(Term literal) {
  Goal g;
  g.kind = Kind::call;
  g.term = std::move(literal);
  return g;
}

Goal Goal::builtin(BuiltinOp op, Term lhs, Term rhs) {
  Goal g;
  g.kind = Kind::builtin;
  g.op = op;
  g.term = Term::compound(builtin_name(op), {std::move(lhs), std::move(rhs)});
  return g;
}

Goal Goal::naf(Goal inner) {
  Goal g;
  g.kind = Kind::naf;
  g.inner = std::make_shared<const Goal>(std::move(inner));
  return g;
}

bool operator==(const Goal& a, const Goal& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Goal::Kind::call:
      return a.term == b.term;
    case Goal::Kind::builtin:
      return a.op == b.op && a.term == b.term;
    case Goal::Kind::naf:
      return *a.inner == *b.inner;
  }
  return false;
}

KnowledgeBase::KnowledgeBase(std::vector<Clause> clauses) {
  for (auto& c : clauses) add(std::move(c));
}

void KnowledgeBase::add(Clause clause) {
  const std::size_t position = clauses_.size();
  index_[{clause.head.name(), clause.head.arity()}].push_back(position);
  if (!clause.provenance.empty()) {
    provenance_index_[clause.provenance].push_back(position);
  }
  clauses_.push_back(std::move(clause));
}

std::span<const std::size_t> KnowledgeBase::candidates(
    const std::string& functor, std::size_t arity) const {
  const auto it = index_.find({functor, arity});
  if (it == index_.end()) return {};
  return it->second;
}

std::span<const std::size_t> KnowledgeBase::by_provenance(
    const std::string& id) const {
  const auto it = provenance_index_.find(id);
  if (it == provenance_index_.end()) return {};
  return it->second;
}

bool KnowledgeBase::index_consistent() const {
  std::size_t indexed = 0;
  for (const auto& [key, positions] : index_) {
    for (const std::size_t p : positions) {
      if (p >= clauses_.size()) return false;
      const Clause& c = clauses_[p];
      if (c.head.name() != key.first || c.head.arity() != key.second) {
        return false;
      }
      ++indexed;
    }
  }
  if (indexed != clauses_.size()) return false;
  for (std::size_t p = 0; p < clauses_.size(); ++p) {
    const auto span = candidates(clauses_[p].head.name(), clauses_[p].head.arity());
    if (std::find(span.begin(), span.end(), p) == span.end()) return false;
  }
  return true;
}

std::string render_goal(const Goal& g) {
  switch (g.kind) {
    case Goal::Kind::call:
    case Goal::Kind::builtin:
      return canonical_render(g.term);
    case Goal::Kind::naf:
      return "\\+ " + render_goal(*g.inner);
  }
  return {};
}

std::string render_clause(const Clause& c) {
  std::string out = canonical_render(c.head);
  if (!c.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i > 0) out += ", ";
      out += render_goal(c.body[i]);
    }
  }
  out += '.';
  return out;
}

std::string render_program(const KnowledgeBase& kb) {
  std::string out;
  for (const Clause& c : kb.clauses()) {
    if (!c.provenance.empty()) {
      out += "% id: ";
      out += c.provenance;
      out += '\n';
    }
    out += render_clause(c);
    out += '\n';
  }
  return out;
}

}  // namespace prooflog
