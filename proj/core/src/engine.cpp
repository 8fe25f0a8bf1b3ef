#include "prooflog/engine.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>

#include "prooflog/detail/unify_core.hpp"
#include "prooflog/unify.hpp"

namespace prooflog {

namespace {

constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

struct TrailStore {
  std::unordered_map<VarKey, Term, VarKeyHash> map;
  std::vector<VarKey> trail;

  std::optional<Term> lookup(const VarKey& key) const {
    const auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  }
  void bind(const VarKey& key, Term value) {
    map.emplace(key, std::move(value));
    trail.push_back(key);
  }
  std::size_t mark() const { return trail.size(); }
  void undo_to(std::size_t m) {
    while (trail.size() > m) {
      map.erase(trail.back());
      trail.pop_back();
    }
  }
};

// Mutable proof skeleton. Child slots are overwritten on backtracking; a
// finished derivation is deep-frozen into immutable ProofNodes before the
// search moves on. Nodes and goal cells live in machine-owned arenas: deep
// derivations must not build recursive ownership chains (a million-step DFS
// run would overflow the stack tearing them down).
struct BuildNode {
  ProofNode::Kind kind = ProofNode::Kind::query;
  Term head;
  std::string provenance;
  std::vector<BuildNode*> children;
  Term builtin_result;
  int naf_depth_limit = 0;
};

struct GoalCell {
  Goal goal;
  int remaining_depth = 0;
  BuildNode* parent = nullptr;
  std::size_t child_index = 0;
  const GoalCell* next = nullptr;
};
using GoalList = const GoalCell*;

struct ChoicePoint {
  GoalList goals = nullptr;  // head is the call goal being retried
  std::size_t trail_mark = 0;
  std::span<const std::size_t> candidates;
  std::size_t next_candidate = 0;
};

struct RunStatus {
  bool budget_exhausted = false;
  bool depth_cut = false;
};

Rational eval_arith_node(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::number:
      return t.number_value();
    case Term::Kind::variable:
      throw BuiltinError(BuiltinError::Kind::instantiation,
                         "arithmetic on unbound variable " +
                             canonical_render(t));
    case Term::Kind::atom:
      throw BuiltinError(BuiltinError::Kind::type,
                         "atom '" + t.name() + "' is not a number");
    case Term::Kind::compound: {
      const std::string& f = t.name();
      if (t.arity() == 1 && f == "-") return -eval_arith_node(t.args()[0]);
      if (t.arity() == 2) {
        const Rational lhs = eval_arith_node(t.args()[0]);
        const Rational rhs = eval_arith_node(t.args()[1]);
        if (f == "+") return lhs + rhs;
        if (f == "-") return lhs - rhs;
        if (f == "*") return lhs * rhs;
        if (f == "/") {
          if (rhs == 0) {
            throw BuiltinError(BuiltinError::Kind::division_by_zero,
                               "division by zero");
          }
          return lhs / rhs;
        }
      }
      throw BuiltinError(BuiltinError::Kind::type,
                         "'" + f + "/" + std::to_string(t.arity()) +
                             "' is not an arithmetic function");
    }
  }
  throw BuiltinError(BuiltinError::Kind::type, "unreachable");
}

void require_ground_for_compare(const Term& t) {
  if (!is_ground(t)) {
    throw BuiltinError(BuiltinError::Kind::instantiation,
                       "comparison argument is not ground: " +
                           canonical_render(t));
  }
}

// Evaluates one builtin against a store. On success, `instantiated` is the
// fully resolved goal term and `result` its recorded outcome (the lhs value
// for `is`, atom `true` otherwise). Throws BuiltinError; returns false on
// plain failure.
template <class Store>
bool eval_builtin(BuiltinOp op, const Term& raw_lhs, const Term& raw_rhs,
                  Store& store, bool occurs_check, Term& instantiated,
                  Term& result) {
  const Term lhs = detail::apply_store(store, raw_lhs);
  const Term rhs = detail::apply_store(store, raw_rhs);
  result = Term::atom("true");
  switch (op) {
    case BuiltinOp::eval_is: {
      if (!is_ground(rhs)) {
        throw BuiltinError(BuiltinError::Kind::instantiation,
                           "right side of is/2 is not ground: " +
                               canonical_render(rhs));
      }
      const Rational value = eval_arith_node(rhs);
      if (!detail::unify_into(lhs, Term::number(value), store, occurs_check)) {
        return false;
      }
      instantiated = Term::compound(
          "is", {detail::apply_store(store, lhs), rhs});
      result = Term::number(value);
      return true;
    }
    case BuiltinOp::unify_terms: {
      if (!detail::unify_into(lhs, rhs, store, occurs_check)) return false;
      instantiated = Term::compound(
          "=", {detail::apply_store(store, lhs),
                detail::apply_store(store, rhs)});
      return true;
    }
    case BuiltinOp::struct_eq:
    case BuiltinOp::struct_ne: {
      const bool equal = lhs == rhs;
      instantiated = Term::compound(builtin_name(op), {lhs, rhs});
      return op == BuiltinOp::struct_eq ? equal : !equal;
    }
    default: {
      require_ground_for_compare(lhs);
      require_ground_for_compare(rhs);
      const Rational l = eval_arith_node(lhs);
      const Rational r = eval_arith_node(rhs);
      instantiated = Term::compound(builtin_name(op), {lhs, rhs});
      switch (op) {
        case BuiltinOp::arith_eq: return l == r;
        case BuiltinOp::arith_ne: return l != r;
        case BuiltinOp::less: return l < r;
        case BuiltinOp::greater: return l > r;
        case BuiltinOp::less_eq: return l <= r;
        case BuiltinOp::greater_eq: return l >= r;
        default: return false;
      }
    }
  }
}

class Machine {
 public:
  Machine(const KnowledgeBase& kb, const SearchConfig& cfg, long long& steps,
          int& generation, std::vector<std::string>& diagnostics)
      : kb_(kb),
        cfg_(cfg),
        steps_(steps),
        generation_(generation),
        diagnostics_(diagnostics) {}

  RunStatus run(const std::vector<Goal>& query, int limit, int max_solutions,
                std::vector<Solution>& out) {
    RunStatus status;
    if (query.empty() || max_solutions < 1) return status;

    query_vars_.clear();
    for (const Goal& g : query) collect_vars(g, query_vars_);

    BuildNode* root = new_node();
    root->kind = ProofNode::Kind::query;
    root->children.resize(query.size(), nullptr);

    GoalList goals = nullptr;
    for (std::size_t i = query.size(); i-- > 0;) {
      goals = cons(query[i], limit, root, i, goals);
    }
    std::vector<ChoicePoint> cps;
    bool out_of_budget = false;

    const auto fail_branch = [&]() -> bool {
      // Returns false when the search is finished (exhausted or budget).
      while (!cps.empty()) {
        if (try_candidates(cps, goals, out_of_budget)) return true;
        if (out_of_budget) return false;
      }
      return false;
    };

    while (true) {
      if (out_of_budget) {
        status.budget_exhausted = true;
        return status;
      }
      if (!goals) {
        if (emit_solution(root, out) &&
            static_cast<int>(out.size()) >= max_solutions) {
          return status;
        }
        if (!fail_branch()) {
          if (out_of_budget) continue;
          return status;
        }
        continue;
      }

      const GoalCell& cell = *goals;
      switch (cell.goal.kind) {
        case Goal::Kind::call: {
          const Term& literal = cell.goal.term;
          if (!literal.is_callable()) {
            diagnostics_.push_back("goal is not callable: " +
                                   canonical_render(literal));
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          const auto candidates =
              kb_.candidates(literal.name(), literal.arity());
          if (cell.remaining_depth < 1) {
            if (!candidates.empty()) status.depth_cut = true;
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          if (candidates.empty()) {
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          cps.push_back({goals, store_.mark(), candidates, 0});
          if (!try_candidates(cps, goals, out_of_budget)) {
            if (out_of_budget) continue;
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
          }
          break;
        }
        case Goal::Kind::builtin: {
          if (!charge_step()) {
            out_of_budget = true;
            continue;
          }
          bool ok = false;
          Term instantiated;
          Term result;
          const std::size_t mark = store_.mark();
          try {
            ok = eval_builtin(cell.goal.op, cell.goal.term.args()[0],
                              cell.goal.term.args()[1], store_,
                              cfg_.occurs_check, instantiated, result);
          } catch (const BuiltinError& e) {
            diagnostics_.push_back(std::string("arithmetic error in ") +
                                   canonical_render(detail::apply_store(
                                       store_, cell.goal.term)) +
                                   ": " + e.what());
            ok = false;
          }
          if (!ok) {
            store_.undo_to(mark);
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          BuildNode* node = new_node();
          node->kind = ProofNode::Kind::builtin;
          node->head = instantiated;
          node->builtin_result = result;
          cell.parent->children[cell.child_index] = node;
          goals = cell.next;
          break;
        }
        case Goal::Kind::naf: {
          if (!charge_step()) {
            out_of_budget = true;
            continue;
          }
          const Goal& inner = *cell.goal.inner;
          const Term inner_term = detail::apply_store(store_, inner.term);
          if (!is_ground(inner_term)) {
            diagnostics_.push_back("floundering: non-ground goal under \\+: " +
                                   canonical_render(inner_term));
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          // Negation runs with the full configured depth ceiling, not the
          // remaining branch depth, so a deep positive branch cannot starve
          // its negative subquery.
          const int inner_limit =
              limit == kUnlimitedDepth ? kUnlimitedDepth : cfg_.max_depth;
          const Goal inner_goal =
              inner.kind == Goal::Kind::builtin
                  ? Goal::builtin(inner.op, inner_term.args()[0],
                                  inner_term.args()[1])
                  : Goal::call(inner_term);
          Machine sub(kb_, cfg_, steps_, generation_, diagnostics_);
          std::vector<Solution> sub_out;
          const RunStatus sub_status =
              sub.run({inner_goal}, inner_limit, 1, sub_out);
          if (sub_status.budget_exhausted) {
            out_of_budget = true;
            continue;
          }
          if (!sub_out.empty()) {
            if (!fail_branch()) {
              if (out_of_budget) continue;
              return status;
            }
            break;
          }
          BuildNode* node = new_node();
          node->kind = ProofNode::Kind::naf;
          node->head = inner_term;
          node->naf_depth_limit =
              inner_limit == kUnlimitedDepth ? -1 : inner_limit;
          cell.parent->children[cell.child_index] = node;
          goals = cell.next;
          break;
        }
      }
    }
  }

 private:
  bool charge_step() {
    if (steps_ >= cfg_.step_budget) return false;
    ++steps_;
    return true;
  }

  // Tries the top choice point's remaining clauses. True: a clause resolved
  // and `goals` now holds the new goal list. False: candidates exhausted
  // (choice point popped) or budget hit.
  bool try_candidates(std::vector<ChoicePoint>& cps, GoalList& goals,
                      bool& out_of_budget) {
    ChoicePoint& cp = cps.back();
    const GoalCell& cell = *cp.goals;
    while (cp.next_candidate < cp.candidates.size()) {
      if (!charge_step()) {
        out_of_budget = true;
        return false;
      }
      const std::size_t position = cp.candidates[cp.next_candidate++];
      store_.undo_to(cp.trail_mark);
      const Clause renamed =
          rename_apart(kb_.clauses()[position], ++generation_);
      if (!detail::unify_into(cell.goal.term, renamed.head, store_,
                              cfg_.occurs_check)) {
        continue;
      }
      BuildNode* node = new_node();
      node->kind = renamed.body.empty() ? ProofNode::Kind::fact
                                        : ProofNode::Kind::rule;
      node->head = renamed.head;
      node->provenance = renamed.provenance;
      node->children.resize(renamed.body.size(), nullptr);
      cell.parent->children[cell.child_index] = node;
      GoalList rest = cell.next;
      for (std::size_t i = renamed.body.size(); i-- > 0;) {
        rest = cons(renamed.body[i], cell.remaining_depth - 1, node, i, rest);
      }
      goals = rest;
      return true;
    }
    store_.undo_to(cp.trail_mark);
    cps.pop_back();
    return false;
  }

  ProofTree freeze(const BuildNode& node) {
    switch (node.kind) {
      case ProofNode::Kind::fact:
        return proof_fact(detail::apply_store(store_, node.head),
                          node.provenance);
      case ProofNode::Kind::rule: {
        std::vector<ProofTree> children;
        children.reserve(node.children.size());
        for (const BuildNode* child : node.children) {
          children.push_back(freeze(*child));
        }
        return proof_rule(detail::apply_store(store_, node.head),
                          node.provenance, std::move(children));
      }
      case ProofNode::Kind::builtin:
        return proof_builtin(node.head, node.builtin_result);
      case ProofNode::Kind::naf:
        return proof_naf(node.head, node.naf_depth_limit);
      case ProofNode::Kind::query: {
        std::vector<ProofTree> children;
        children.reserve(node.children.size());
        for (const BuildNode* child : node.children) {
          children.push_back(freeze(*child));
        }
        return proof_query(std::move(children));
      }
    }
    return nullptr;
  }

  bool emit_solution(const BuildNode* root, std::vector<Solution>& out) {
    try {
      ProofTree proof = freeze(*root);
      if (proof->children.size() == 1) proof = proof->children[0];
      Substitution bindings;
      for (const VarKey& key : query_vars_) {
        const Term var = Term::var(key.name, key.index);
        const Term resolved = detail::apply_store(store_, var);
        if (!(resolved == var)) bindings.bind(key, resolved);
      }
      Solution s;
      s.answer_bindings = std::move(bindings);
      s.proof = std::move(proof);
      s.depth_found = proof_depth(s.proof);
      s.steps_used = steps_;
      out.push_back(std::move(s));
      return true;
    } catch (const CyclicTermError& e) {
      diagnostics_.push_back(std::string("cyclic solution skipped: ") +
                             e.what());
      return false;
    }
  }

  BuildNode* new_node() {
    build_arena_.emplace_back();
    return &build_arena_.back();
  }

  GoalList cons(Goal goal, int depth, BuildNode* parent, std::size_t index,
                GoalList next) {
    GoalCell& cell = cell_arena_.emplace_back();
    cell.goal = std::move(goal);
    cell.remaining_depth = depth;
    cell.parent = parent;
    cell.child_index = index;
    cell.next = next;
    return &cell;
  }

  const KnowledgeBase& kb_;
  const SearchConfig& cfg_;
  long long& steps_;
  int& generation_;
  std::vector<std::string>& diagnostics_;
  TrailStore store_;
  std::vector<VarKey> query_vars_;
  std::deque<BuildNode> build_arena_;
  std::deque<GoalCell> cell_arena_;
};

void dedupe_diagnostics(std::vector<std::string>& diagnostics) {
  std::vector<std::string> seen;
  std::vector<std::string> out;
  for (auto& d : diagnostics) {
    if (std::find(seen.begin(), seen.end(), d) != seen.end()) continue;
    seen.push_back(d);
    out.push_back(std::move(d));
  }
  diagnostics = std::move(out);
}

SolveResult run_once(const KnowledgeBase& kb, const std::vector<Goal>& query,
                     int limit, const SearchConfig& cfg) {
  SolveResult result;
  long long steps = 0;
  int generation = 0;
  Machine machine(kb, cfg, steps, generation, result.diagnostics);
  const RunStatus status =
      machine.run(query, limit, cfg.max_solutions, result.solutions);
  result.budget_exhausted = status.budget_exhausted;
  result.depth_capped = status.depth_cut;
  result.steps_used = steps;
  dedupe_diagnostics(result.diagnostics);
  return result;
}

}  // namespace

SolveResult depth_limited_solve(const KnowledgeBase& kb,
                                const std::vector<Goal>& query, int limit,
                                const SearchConfig& cfg) {
  return run_once(kb, query, limit, cfg);
}

SolveResult ids_solve(const KnowledgeBase& kb, const std::vector<Goal>& query,
                      const SearchConfig& cfg) {
  SolveResult result;
  long long steps = 0;
  int generation = 0;
  for (int limit = 1; limit <= cfg.max_depth; ++limit) {
    std::vector<Solution> found;
    Machine machine(kb, cfg, steps, generation, result.diagnostics);
    const RunStatus status =
        machine.run(query, limit, cfg.max_solutions, found);
    result.steps_used = steps;
    if (status.budget_exhausted) {
      result.budget_exhausted = true;
      result.solutions = std::move(found);
      break;
    }
    if (!found.empty()) {
      result.solutions = std::move(found);
      break;
    }
    if (!status.depth_cut) break;  // space exhausted below the limit
    if (limit == cfg.max_depth) result.depth_capped = true;
  }
  dedupe_diagnostics(result.diagnostics);
  return result;
}

SolveResult solve(const KnowledgeBase& kb, const std::vector<Goal>& query,
                  const SearchConfig& cfg) {
  if (cfg.strategy == Strategy::ids) return ids_solve(kb, query, cfg);
  return run_once(kb, query, kUnlimitedDepth, cfg);
}

Rational eval_arith(const Term& expr) { return eval_arith_node(expr); }

std::optional<Substitution> call_builtin(const Goal& builtin_goal,
                                         const Substitution& s,
                                         bool occurs_check) {
  if (builtin_goal.kind != Goal::Kind::builtin) {
    throw BuiltinError(BuiltinError::Kind::type, "goal is not a builtin");
  }
  Substitution extended = s;
  Term instantiated;
  Term result;
  if (!eval_builtin(builtin_goal.op, builtin_goal.term.args()[0],
                    builtin_goal.term.args()[1], extended, occurs_check,
                    instantiated, result)) {
    return std::nullopt;
  }
  return extended;
}

NafResult solve_naf(const Goal& naf_goal, const KnowledgeBase& kb,
                    int depth_limit, const SearchConfig& cfg) {
  if (naf_goal.kind != Goal::Kind::naf) {
    throw FlounderingError("solve_naf expects a \\+ goal");
  }
  const Goal& inner = *naf_goal.inner;
  if (!is_ground(inner.term)) {
    throw FlounderingError("floundering: non-ground goal under \\+: " +
                           canonical_render(inner.term));
  }
  SearchConfig sub_cfg = cfg;
  sub_cfg.max_solutions = 1;
  const SolveResult sub =
      depth_limit < 0
          ? run_once(kb, {inner}, kUnlimitedDepth, sub_cfg)
          : depth_limited_solve(kb, {inner}, depth_limit, sub_cfg);
  NafResult result;
  result.budget_exhausted = sub.budget_exhausted;
  if (sub.budget_exhausted || !sub.solutions.empty()) return result;
  result.succeeded = true;
  result.node = proof_naf(inner.term, depth_limit);
  return result;
}

std::string_view answer_label_name(AnswerLabel label) {
  switch (label) {
    case AnswerLabel::true_: return "True";
    case AnswerLabel::false_: return "False";
    case AnswerLabel::unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<AnswerLabel> answer_label_from(std::string_view name) {
  if (name == "True" || name == "true") return AnswerLabel::true_;
  if (name == "False" || name == "false") return AnswerLabel::false_;
  if (name == "Unknown" || name == "unknown") return AnswerLabel::unknown;
  return std::nullopt;
}

namespace {

Term counterpart_statement(const Term& statement) {
  const std::string& name = statement.name();
  const std::string flipped =
      name.rfind("neg_", 0) == 0 ? name.substr(4) : "neg_" + name;
  if (statement.is_atom()) return Term::atom(flipped);
  return Term::compound(flipped, {statement.args().begin(),
                                  statement.args().end()});
}

}  // namespace

Classification classify_answer(const KnowledgeBase& kb, const Term& statement,
                               const SearchConfig& cfg) {
  if (!statement.is_callable()) {
    throw FlounderingError("statement to classify must be a literal");
  }
  SearchConfig first_only = cfg;
  first_only.max_solutions = 1;

  const SolveResult positive =
      solve(kb, {Goal::call(statement)}, first_only);
  const SolveResult negative =
      solve(kb, {Goal::call(counterpart_statement(statement))}, first_only);

  Classification out;
  out.budget_exhausted =
      positive.budget_exhausted || negative.budget_exhausted;
  out.diagnostics = positive.diagnostics;
  out.diagnostics.insert(out.diagnostics.end(), negative.diagnostics.begin(),
                         negative.diagnostics.end());
  dedupe_diagnostics(out.diagnostics);

  const bool proved = !positive.solutions.empty();
  const bool refuted = !negative.solutions.empty();
  if (proved) {
    out.label = AnswerLabel::true_;
    out.proof = positive.solutions.front().proof;
    out.inconsistent = refuted;
  } else if (refuted) {
    out.label = AnswerLabel::false_;
    out.proof = negative.solutions.front().proof;
  } else {
    out.label = AnswerLabel::unknown;
  }
  return out;
}

Goal goal_from_term(const Term& t) {
  if (t.is_compound() && t.arity() == 2) {
    static const std::pair<const char*, BuiltinOp> ops[] = {
        {"is", BuiltinOp::eval_is},    {"=", BuiltinOp::unify_terms},
        {"==", BuiltinOp::struct_eq},  {"\\==", BuiltinOp::struct_ne},
        {"=:=", BuiltinOp::arith_eq},  {"=\\=", BuiltinOp::arith_ne},
        {"<", BuiltinOp::less},        {">", BuiltinOp::greater},
        {"=<", BuiltinOp::less_eq},    {">=", BuiltinOp::greater_eq},
    };
    for (const auto& [spelling, op] : ops) {
      if (t.name() == spelling) {
        return Goal::builtin(op, t.args()[0], t.args()[1]);
      }
    }
  }
  return Goal::call(t);
}

namespace {

// One-sided matching: only pattern variables bind; the instance is rigid.
bool match_term(const Term& pattern, const Term& instance,
                std::map<VarKey, Term>& env) {
  switch (pattern.kind()) {
    case Term::Kind::variable: {
      const VarKey key = var_key(pattern);
      const auto it = env.find(key);
      if (it != env.end()) return it->second == instance;
      env.emplace(key, instance);
      return true;
    }
    case Term::Kind::number:
      return instance.is_number() &&
             instance.number_value() == pattern.number_value();
    case Term::Kind::atom:
      return instance.is_atom() && instance.name() == pattern.name();
    case Term::Kind::compound: {
      if (!instance.is_compound() || instance.name() != pattern.name() ||
          instance.arity() != pattern.arity()) {
        return false;
      }
      for (std::size_t i = 0; i < pattern.arity(); ++i) {
        if (!match_term(pattern.args()[i], instance.args()[i], env)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

class ProofChecker {
 public:
  ProofChecker(const KnowledgeBase& kb, const SearchConfig& cfg)
      : kb_(kb), cfg_(cfg) {}

  // nullopt = accepted; otherwise the reason at the first failing node.
  std::optional<std::string> check(const ProofTree& node) {
    switch (node->kind) {
      case ProofNode::Kind::query: {
        for (const ProofTree& child : node->children) {
          if (auto reason = check(child)) return reason;
        }
        return std::nullopt;
      }
      case ProofNode::Kind::fact:
      case ProofNode::Kind::rule:
        return check_resolution(node);
      case ProofNode::Kind::builtin:
        return check_builtin(node);
      case ProofNode::Kind::naf:
        return check_naf(node);
    }
    return "unknown proof node kind";
  }

 private:
  std::optional<std::string> check_resolution(const ProofTree& node) {
    if (!node->head.is_callable()) {
      return "node head is not a literal: " + canonical_render(node->head);
    }
    for (const ProofTree& child : node->children) {
      if (auto reason = check(child)) return reason;
    }
    const std::span<const std::size_t> positions =
        node->provenance.empty()
            ? kb_.candidates(node->head.name(), node->head.arity())
            : kb_.by_provenance(node->provenance);
    const bool want_fact = node->kind == ProofNode::Kind::fact;
    for (const std::size_t position : positions) {
      const Clause& clause = kb_.clauses()[position];
      if (clause.is_fact() != want_fact) continue;
      if (clause.body.size() != node->children.size()) continue;
      std::map<VarKey, Term> env;
      if (!match_term(clause.head, node->head, env)) continue;
      bool fits = true;
      for (std::size_t i = 0; i < clause.body.size() && fits; ++i) {
        const Goal& goal = clause.body[i];
        const ProofTree& child = node->children[i];
        switch (goal.kind) {
          case Goal::Kind::call:
            fits = (child->kind == ProofNode::Kind::fact ||
                    child->kind == ProofNode::Kind::rule) &&
                   match_term(goal.term, child->head, env);
            break;
          case Goal::Kind::builtin:
            fits = child->kind == ProofNode::Kind::builtin &&
                   match_term(goal.term, child->head, env);
            break;
          case Goal::Kind::naf:
            fits = child->kind == ProofNode::Kind::naf &&
                   match_term(goal.inner->term, child->head, env);
            break;
        }
      }
      if (fits) return std::nullopt;
    }
    return std::string(want_fact ? "fact" : "rule") +
           " node is not an instance of any kb clause: " +
           canonical_render(node->head);
  }

  std::optional<std::string> check_builtin(const ProofTree& node) {
    const Term& goal = node->head;
    if (!goal.is_compound() || goal.arity() != 2) {
      return "malformed builtin node: " + canonical_render(goal);
    }
    const Goal rebuilt = goal_from_term(goal);
    if (rebuilt.kind != Goal::Kind::builtin) {
      return "not a builtin goal: " + canonical_render(goal);
    }
    try {
      Substitution empty;
      Term instantiated;
      Term result;
      if (!eval_builtin(rebuilt.op, goal.args()[0], goal.args()[1], empty,
                        cfg_.occurs_check, instantiated, result)) {
        return "builtin no longer evaluates to true: " +
               canonical_render(goal);
      }
      if (!(result == node->builtin_result)) {
        return "builtin result mismatch: " + canonical_render(goal) +
               " recorded " + canonical_render(node->builtin_result);
      }
    } catch (const BuiltinError& e) {
      return "builtin re-evaluation failed: " + canonical_render(goal) +
             ": " + e.what();
    }
    return std::nullopt;
  }

  std::optional<std::string> check_naf(const ProofTree& node) {
    if (!is_ground(node->head)) {
      return "naf node goal is not ground: " + canonical_render(node->head);
    }
    SearchConfig sub_cfg = cfg_;
    sub_cfg.max_solutions = 1;
    const Goal inner = goal_from_term(node->head);
    SolveResult sub;
    if (node->naf_depth_limit < 0) {
      sub_cfg.strategy = Strategy::dfs;
      sub = solve(kb_, {inner}, sub_cfg);
    } else {
      sub = depth_limited_solve(kb_, {inner}, node->naf_depth_limit, sub_cfg);
    }
    if (sub.budget_exhausted) {
      return "naf re-check exhausted its step budget: " +
             canonical_render(node->head);
    }
    if (!sub.solutions.empty()) {
      return "negated goal now has a proof: " + canonical_render(node->head);
    }
    return std::nullopt;
  }

  const KnowledgeBase& kb_;
  const SearchConfig& cfg_;
};

}  // namespace

CheckOutcome check_proof(const KnowledgeBase& kb, const ProofTree& proof,
                         const SearchConfig& cfg) {
  CheckOutcome outcome;
  if (!proof) {
    outcome.reason = "empty proof";
    return outcome;
  }
  ProofChecker checker(kb, cfg);
  if (auto reason = checker.check(proof)) {
    outcome.reason = std::move(*reason);
    return outcome;
  }
  outcome.accepted = true;
  return outcome;
}

}  // namespace prooflog
