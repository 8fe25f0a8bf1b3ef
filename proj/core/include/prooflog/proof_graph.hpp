#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prooflog/proof.hpp"

namespace prooflog {

/// Labeled DAG form of a derivation: nodes are knowledge fragments, each
/// directed edge runs premise -> conclusion. Node ids are unique; labels may
/// repeat (merging never collapses an ancestor with its descendant).
struct ProofGraph {
  struct Node {
    int id = 0;
    std::string label;
    std::string provenance;  // optional; "" when absent
  };
  std::vector<Node> nodes;
  std::vector<std::pair<int, int>> edges;  // premise_id -> conclusion_id

  bool empty() const { return nodes.empty(); }
  std::size_t size_with_edges() const { return nodes.size() + edges.size(); }
};

/// One labeling scheme per comparison, never mixed: by_provenance labels
/// fact/rule nodes with their source-statement ids and drops builtin/naf
/// nodes (gold datasets do not annotate them); by_render labels every node
/// with its whitespace-normalized canonical text.
enum class Labeling { by_provenance, by_render };

std::optional<Labeling> labeling_from(std::string_view name);

struct MissingProvenanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Collapses the proof tree into a ProofGraph: nodes with identical labels
/// merge unless one is an ancestor of the other (which would create a
/// cycle); edges run child -> parent and parallel duplicates collapse. The
/// synthetic query root is never emitted.
ProofGraph tree_to_dag(const ProofTree& proof, Labeling labeling);

/// Unique ids, edges referencing existing ids, no duplicate edges, acyclic.
bool graph_valid(const ProofGraph& g, std::string* why = nullptr);

/// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_label(std::string_view text);

/// Interchange form {"nodes":[{"id","label","provenance"?}],"edges":[[p,c]]}
/// with stable field order. indent < 0 emits one line.
std::string graph_to_json(const ProofGraph& g, int indent = -1);
std::optional<ProofGraph> graph_from_json(const std::string& text,
                                          std::string* error = nullptr);

}  // namespace prooflog
