#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prooflog/rational.hpp"

namespace prooflog {

/// Immutable first-order term: variable, exact-rational number, atom, or
/// compound. Values share structure freely across threads; there is no
/// interior mutation anywhere in this module.
class Term {
 public:
  enum class Kind { variable, number, atom, compound };

  Term() : Term(atom("true")) {}

  static Term var(std::string name, int index = 0);
  static Term number(Rational value);
  static Term atom(std::string name);
  /// Compound arity must be >= 1; zero-arity symbols are atoms.
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const { return node_->kind; }
  bool is_var() const { return kind() == Kind::variable; }
  bool is_number() const { return kind() == Kind::number; }
  bool is_atom() const { return kind() == Kind::atom; }
  bool is_compound() const { return kind() == Kind::compound; }
  /// Atoms and compounds can head clauses and stand as goals.
  bool is_callable() const { return is_atom() || is_compound(); }

  /// Variable or atom name, or compound functor.
  const std::string& name() const { return node_->name; }
  /// Renaming generation; 0 for variables as written in source text.
  int var_index() const { return node_->index; }
  const Rational& number_value() const { return node_->value; }
  std::span<const Term> args() const { return node_->args; }
  std::size_t arity() const { return node_->args.size(); }

  friend bool operator==(const Term& a, const Term& b) {
    return a.node_ == b.node_ || structurally_equal(a, b);
  }

 private:
  struct Node {
    Kind kind;
    std::string name;  // variable/atom name or functor
    int index = 0;     // variable freshness generation
    Rational value;
    std::vector<Term> args;
  };

  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static bool structurally_equal(const Term& a, const Term& b);

  std::shared_ptr<const Node> node_;
};

/// Identity of a variable: source name plus renaming generation.
struct VarKey {
  std::string name;
  int index = 0;
  auto operator<=>(const VarKey&) const = default;
};

inline VarKey var_key(const Term& t) { return {t.name(), t.var_index()}; }

struct VarKeyHash {
  std::size_t operator()(const VarKey& k) const {
    return std::hash<std::string>{}(k.name) * 1000003u ^
           std::hash<int>{}(k.index);
  }
};

/// Raised when substitution application exceeds the chain-expansion cap,
/// which can only happen for cyclic bindings created with the occurs check
/// off.
struct CyclicTermError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binding map from variables to terms. Bindings are triangular: a bound
/// term may mention other bound variables; `apply` resolves chains. After a
/// successful unification with the occurs check on, resolving terminates and
/// the map behaves idempotently; with the check off the map may be cyclic
/// and `apply` raises CyclicTermError past the expansion cap.
class Substitution {
 public:
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }

  std::optional<Term> lookup(const VarKey& key) const;
  /// The variable must not already be bound.
  void bind(VarKey key, Term value);

  /// Deterministically ordered (name, index) view of the bindings.
  const std::map<VarKey, Term>& bindings() const { return bindings_; }

  /// Keeps only the listed variables, with each binding fully resolved.
  Substitution restricted_to(std::span<const VarKey> keys) const;

 private:
  std::map<VarKey, Term> bindings_;
};

/// Deterministic canonical text for a term; parse_term inverts it. Numbers
/// render per render_rational; arithmetic functors render infix with minimal
/// parentheses; variables render by name (with "_<gen>" suffixed for renamed
/// generations).
std::string canonical_render(const Term& t);

}  // namespace prooflog
