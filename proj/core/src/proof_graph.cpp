#include "prooflog/proof_graph.hpp"

#include <map>
#include <set>

#include "graph_json.hpp"

namespace prooflog {

std::optional<Labeling> labeling_from(std::string_view name) {
  if (name == "by_provenance" || name == "provenance") {
    return Labeling::by_provenance;
  }
  if (name == "by_render" || name == "render") return Labeling::by_render;
  return std::nullopt;
}

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += c;
  }
  return out;
}

namespace {

class DagBuilder {
 public:
  explicit DagBuilder(Labeling labeling) : labeling_(labeling) {}

  ProofGraph take() && { return std::move(graph_); }

  // Returns the node id or -1 when the node is dropped under this labeling.
  int visit(const ProofTree& node) {
    if (node->kind == ProofNode::Kind::query) {
      for (const ProofTree& child : node->children) visit(child);
      return -1;
    }
    std::string label;
    std::string provenance;
    const bool is_resolution = node->kind == ProofNode::Kind::fact ||
                               node->kind == ProofNode::Kind::rule;
    if (labeling_ == Labeling::by_provenance) {
      if (!is_resolution) return -1;
      if (node->provenance.empty()) {
        throw MissingProvenanceError(
            "node lacks provenance under by_provenance labeling: " +
            canonical_render(node->head));
      }
      label = node->provenance;
      provenance = node->provenance;
    } else {
      label = node->kind == ProofNode::Kind::naf
                  ? normalize_label("\\+ " + canonical_render(node->head))
                  : normalize_label(canonical_render(node->head));
      provenance = node->provenance;
    }

    // Reuse the first closed node with this label; open (ancestor) nodes are
    // off limits, which keeps the result acyclic.
    int id = -1;
    for (const int candidate : by_label_[label]) {
      if (!open_[static_cast<std::size_t>(candidate)]) {
        id = candidate;
        break;
      }
    }
    if (id < 0) {
      id = static_cast<int>(graph_.nodes.size());
      graph_.nodes.push_back({id, label, provenance});
      by_label_[label].push_back(id);
      open_.push_back(false);
    }
    open_[static_cast<std::size_t>(id)] = true;
    for (const ProofTree& child : node->children) {
      const int child_id = visit(child);
      if (child_id >= 0) add_edge(child_id, id);
    }
    open_[static_cast<std::size_t>(id)] = false;
    return id;
  }

 private:
  void add_edge(int premise, int conclusion) {
    if (edge_set_.insert({premise, conclusion}).second) {
      graph_.edges.emplace_back(premise, conclusion);
    }
  }

  Labeling labeling_;
  ProofGraph graph_;
  std::map<std::string, std::vector<int>> by_label_;
  std::vector<bool> open_;
  std::set<std::pair<int, int>> edge_set_;
};

}  // namespace

ProofGraph tree_to_dag(const ProofTree& proof, Labeling labeling) {
  DagBuilder builder(labeling);
  if (proof) builder.visit(proof);
  return std::move(builder).take();
}

bool graph_valid(const ProofGraph& g, std::string* why) {
  const auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  std::set<int> ids;
  for (const auto& node : g.nodes) {
    if (!ids.insert(node.id).second) return fail("duplicate node id");
  }
  std::set<std::pair<int, int>> seen;
  std::map<int, std::vector<int>> out_edges;
  std::map<int, int> in_degree;
  for (const auto& [from, to] : g.edges) {
    if (!ids.count(from) || !ids.count(to)) {
      return fail("edge references a missing node");
    }
    if (!seen.insert({from, to}).second) return fail("duplicate edge");
    out_edges[from].push_back(to);
    ++in_degree[to];
  }
  // Kahn's algorithm; leftovers mean a cycle.
  std::vector<int> ready;
  for (const int id : ids) {
    if (in_degree.find(id) == in_degree.end()) ready.push_back(id);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int id = ready.back();
    ready.pop_back();
    ++visited;
    const auto it = out_edges.find(id);
    if (it == out_edges.end()) continue;
    for (const int next : it->second) {
      if (--in_degree[next] == 0) ready.push_back(next);
    }
  }
  if (visited != ids.size()) return fail("graph contains a cycle");
  return true;
}

namespace detail {

nlohmann::ordered_json graph_to_json_value(const ProofGraph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& node : g.nodes) {
    nlohmann::ordered_json n;
    n["id"] = node.id;
    n["label"] = node.label;
    if (!node.provenance.empty()) n["provenance"] = node.provenance;
    j["nodes"].push_back(std::move(n));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : g.edges) {
    j["edges"].push_back(nlohmann::ordered_json::array({from, to}));
  }
  return j;
}

ProofGraph graph_from_json_value(const nlohmann::json& j) {
  ProofGraph g;
  if (!j.is_object()) throw std::runtime_error("graph must be a JSON object");
  for (const auto& n : j.value("nodes", nlohmann::json::array())) {
    ProofGraph::Node node;
    node.id = n.at("id").get<int>();
    node.label = n.at("label").get<std::string>();
    node.provenance = n.value("provenance", std::string{});
    g.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.value("edges", nlohmann::json::array())) {
    if (!e.is_array() || e.size() != 2) {
      throw std::runtime_error("edge must be a [premise, conclusion] pair");
    }
    g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  std::string why;
  if (!graph_valid(g, &why)) throw std::runtime_error("invalid graph: " + why);
  return g;
}

}  // namespace detail

std::string graph_to_json(const ProofGraph& g, int indent) {
  return detail::graph_to_json_value(g).dump(indent);
}

std::optional<ProofGraph> graph_from_json(const std::string& text,
                                          std::string* error) {
  try {
    return detail::graph_from_json_value(nlohmann::json::parse(text));
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

}  // namespace prooflog
