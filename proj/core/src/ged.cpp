#include "prooflog/ged.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace prooflog {

namespace {

constexpr int kDeleted = -2;
constexpr int kUnassigned = -1;

// Dense index form; node order follows the input graph.
struct Dense {
  int n = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<bool>> adj;

  explicit Dense(const ProofGraph& g) {
    n = static_cast<int>(g.nodes.size());
    labels.reserve(g.nodes.size());
    std::map<int, int> index;
    for (const auto& node : g.nodes) {
      index[node.id] = static_cast<int>(labels.size());
      labels.push_back(node.label);
    }
    adj.assign(n, std::vector<bool>(n, false));
    for (const auto& [from, to] : g.edges) {
      adj[index.at(from)][index.at(to)] = true;
    }
  }

  std::size_t edge_count() const {
    std::size_t count = 0;
    for (const auto& row : adj) {
      count += static_cast<std::size_t>(
          std::count(row.begin(), row.end(), true));
    }
    return count;
  }
};

class GedSearch {
 public:
  GedSearch(const Dense& a, const Dense& b, const EditCosts& costs,
            const GedBudget& budget)
      : a_(a), b_(b), costs_(costs), budget_(budget) {
    map_a_.assign(a_.n, kUnassigned);
    used_b_.assign(b_.n, false);
    remaining_b_labels_.clear();
    for (const auto& label : b_.labels) ++remaining_b_labels_[label];
  }

  GedResult run() {
    best_ = greedy_upper_bound();
    dfs(0, 0);
    return {best_, !aborted_};
  }

 private:
  // Cost of assigning a-node i (to b-node j, or deletion) against all
  // earlier assignments: node cost plus every edge pair decided by this
  // assignment.
  long long assignment_delta(int i, int j) const {
    long long delta = 0;
    if (j == kDeleted) {
      delta += costs_.node_delete;
    } else {
      delta += a_.labels[i] == b_.labels[j] ? 0 : costs_.node_substitute;
    }
    for (int k = 0; k < i; ++k) {
      const int jk = map_a_[k];
      if (j == kDeleted || jk == kDeleted) {
        // Edges touching a deleted node are deleted; b-side edges into the
        // unmatched region are charged at completion.
        if (a_.adj[i][k]) delta += costs_.edge_delete;
        if (a_.adj[k][i]) delta += costs_.edge_delete;
        continue;
      }
      // Both endpoints mapped: compare each direction.
      const bool a_ik = a_.adj[i][k];
      const bool b_ik = b_.adj[j][jk];
      if (a_ik && !b_ik) delta += costs_.edge_delete;
      if (!a_ik && b_ik) delta += costs_.edge_insert;
      const bool a_ki = a_.adj[k][i];
      const bool b_ki = b_.adj[jk][j];
      if (a_ki && !b_ki) delta += costs_.edge_delete;
      if (!a_ki && b_ki) delta += costs_.edge_insert;
    }
    return delta;
  }

  // Insertions pending once every a-node is assigned: unmapped b-nodes and
  // every b-edge with an unmapped endpoint.
  long long completion_cost() const {
    long long cost = 0;
    for (int j = 0; j < b_.n; ++j) {
      if (!used_b_[j]) cost += costs_.node_insert;
    }
    for (int u = 0; u < b_.n; ++u) {
      for (int v = 0; v < b_.n; ++v) {
        if (b_.adj[u][v] && (!used_b_[u] || !used_b_[v])) {
          cost += costs_.edge_insert;
        }
      }
    }
    return cost;
  }

  // Label-multiset lower bound on finishing from a-node i.
  long long lower_bound(int i) const {
    const long long remaining_a = a_.n - i;
    long long remaining_b = 0;
    for (int j = 0; j < b_.n; ++j) {
      if (!used_b_[j]) ++remaining_b;
    }
    long long common = 0;
    std::map<std::string, long long> a_labels;
    for (int k = i; k < a_.n; ++k) ++a_labels[a_.labels[k]];
    for (const auto& [label, count] : a_labels) {
      const auto it = remaining_b_labels_.find(label);
      if (it != remaining_b_labels_.end()) {
        common += std::min(count, it->second);
      }
    }
    return std::max(remaining_a, remaining_b) - common;
  }

  void dfs(int i, long long cost) {
    if (aborted_) return;
    if (++expansions_ > budget_.max_expansions) {
      aborted_ = true;
      return;
    }
    if (i == a_.n) {
      const long long total = cost + completion_cost();
      best_ = std::min(best_, total);
      return;
    }
    if (cost + lower_bound(i) >= best_) return;
    for (int j = 0; j < b_.n; ++j) {
      if (used_b_[j]) continue;
      const long long delta = assignment_delta(i, j);
      if (cost + delta >= best_) continue;
      map_a_[i] = j;
      used_b_[j] = true;
      --remaining_b_labels_[b_.labels[j]];
      dfs(i + 1, cost + delta);
      ++remaining_b_labels_[b_.labels[j]];
      used_b_[j] = false;
      map_a_[i] = kUnassigned;
      if (aborted_) return;
    }
    const long long delta = assignment_delta(i, kDeleted);
    if (cost + delta < best_) {
      map_a_[i] = kDeleted;
      dfs(i + 1, cost + delta);
      map_a_[i] = kUnassigned;
    }
  }

  // First-fit equal-label mapping; any complete mapping is a valid edit
  // path, so its cost is a certified upper bound.
  long long greedy_upper_bound() {
    long long cost = 0;
    for (int i = 0; i < a_.n; ++i) {
      int chosen = kDeleted;
      for (int j = 0; j < b_.n; ++j) {
        if (!used_b_[j] && a_.labels[i] == b_.labels[j]) {
          chosen = j;
          break;
        }
      }
      cost += assignment_delta(i, chosen);
      map_a_[i] = chosen;
      if (chosen != kDeleted) used_b_[chosen] = true;
    }
    cost += completion_cost();
    std::fill(map_a_.begin(), map_a_.end(), kUnassigned);
    std::fill(used_b_.begin(), used_b_.end(), false);
    return cost;
  }

  const Dense& a_;
  const Dense& b_;
  const EditCosts& costs_;
  const GedBudget& budget_;
  std::vector<int> map_a_;
  std::vector<bool> used_b_;
  std::map<std::string, long long> remaining_b_labels_;
  long long best_ = 0;
  long long expansions_ = 0;
  bool aborted_ = false;
};

}  // namespace

GedResult ged(const ProofGraph& g1, const ProofGraph& g2,
              const EditCosts& costs, const GedBudget& budget) {
  const Dense a(g1);
  const Dense b(g2);
  GedSearch search(a, b, costs, budget);
  return search.run();
}

Rational proof_similarity(const ProofGraph& pred, const ProofGraph& gold,
                          bool answer_correct, const EditCosts& costs,
                          const GedBudget& budget) {
  if (!answer_correct) return Rational(0);
  const std::size_t pred_size = pred.size_with_edges();
  const std::size_t gold_size = gold.size_with_edges();
  const std::size_t denominator = std::max(pred_size, gold_size);
  if (denominator == 0) return Rational(1);
  const GedResult distance = ged(pred, gold, costs, budget);
  Rational similarity =
      Rational(1) - Rational(distance.distance) / Rational(denominator);
  if (similarity < 0) return Rational(0);
  if (similarity > 1) return Rational(1);
  return similarity;
}

namespace {

// Backtracking label-preserving isomorphism check for graphs with repeated
// labels.
bool bijection_exists(const Dense& a, const Dense& b, std::vector<int>& map_a,
                      std::vector<bool>& used_b, int i) {
  if (i == a.n) return true;
  for (int j = 0; j < b.n; ++j) {
    if (used_b[j] || a.labels[i] != b.labels[j]) continue;
    bool consistent = true;
    for (int k = 0; k < i && consistent; ++k) {
      if (a.adj[i][k] != b.adj[j][map_a[k]]) consistent = false;
      if (consistent && a.adj[k][i] != b.adj[map_a[k]][j]) consistent = false;
    }
    if (!consistent) continue;
    map_a[i] = j;
    used_b[j] = true;
    if (bijection_exists(a, b, map_a, used_b, i + 1)) return true;
    used_b[j] = false;
    map_a[i] = kUnassigned;
  }
  return false;
}

}  // namespace

int proof_exact_match(const ProofGraph& pred, const ProofGraph& gold,
                      bool answer_correct) {
  if (!answer_correct) return 0;
  if (pred.nodes.size() != gold.nodes.size() ||
      pred.edges.size() != gold.edges.size()) {
    return 0;
  }
  const Dense a(pred);
  const Dense b(gold);
  std::multiset<std::string> a_labels(a.labels.begin(), a.labels.end());
  std::multiset<std::string> b_labels(b.labels.begin(), b.labels.end());
  if (a_labels != b_labels) return 0;

  const bool unique_labels =
      a_labels.size() == std::set<std::string>(a.labels.begin(),
                                               a.labels.end()).size();
  if (unique_labels) {
    // Distinct labels: compare label-pair edge sets directly.
    std::map<std::string, int> b_index;
    for (int j = 0; j < b.n; ++j) b_index[b.labels[j]] = j;
    for (int u = 0; u < a.n; ++u) {
      for (int v = 0; v < a.n; ++v) {
        if (a.adj[u][v] !=
            b.adj[b_index.at(a.labels[u])][b_index.at(a.labels[v])]) {
          return 0;
        }
      }
    }
    return 1;
  }
  std::vector<int> map_a(a.n, kUnassigned);
  std::vector<bool> used_b(b.n, false);
  return bijection_exists(a, b, map_a, used_b, 0) ? 1 : 0;
}

}  // namespace prooflog
