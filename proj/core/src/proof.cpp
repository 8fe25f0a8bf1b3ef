#include "prooflog/proof.hpp"

#include <algorithm>

#include <json.hpp>

#include "prooflog/clause.hpp"
#include "prooflog/parser.hpp"

namespace prooflog {

namespace {

std::shared_ptr<ProofNode> make_node(ProofNode::Kind kind) {
  auto node = std::make_shared<ProofNode>();
  node->kind = kind;
  return node;
}

const char* kind_name(ProofNode::Kind kind) {
  switch (kind) {
    case ProofNode::Kind::fact: return "fact";
    case ProofNode::Kind::rule: return "rule";
    case ProofNode::Kind::builtin: return "builtin";
    case ProofNode::Kind::naf: return "naf";
    case ProofNode::Kind::query: return "query";
  }
  return "?";
}

std::string node_label(const ProofNode& node) {
  switch (node.kind) {
    case ProofNode::Kind::naf:
      return "\\+ " + canonical_render(node.head);
    case ProofNode::Kind::query:
      return "?-";
    default:
      return canonical_render(node.head);
  }
}

nlohmann::ordered_json node_to_json(const ProofTree& p) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(p->kind);
  j["label"] = node_label(*p);
  j["provenance"] = p->provenance;
  j["children"] = nlohmann::ordered_json::array();
  for (const ProofTree& child : p->children) {
    j["children"].push_back(node_to_json(child));
  }
  if (p->kind == ProofNode::Kind::builtin) {
    j["result"] = canonical_render(p->builtin_result);
  }
  if (p->kind == ProofNode::Kind::naf) {
    j["depth_limit"] = p->naf_depth_limit;
  }
  return j;
}

ProofTree node_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("label")) {
    throw ProofFormatError("proof node must be an object with kind and label");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const std::string label = j.at("label").get<std::string>();
  std::vector<ProofTree> children;
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) children.push_back(node_from_json(c));
  }
  const std::string provenance =
      j.contains("provenance") ? j.at("provenance").get<std::string>() : "";

  if (kind == "query") {
    return proof_query(std::move(children));
  }
  if (kind == "fact" || kind == "rule") {
    auto head = parse_term(label);
    if (!head || !head->is_callable()) {
      throw ProofFormatError("unparseable proof node label: " + label);
    }
    if (kind == "fact") {
      if (!children.empty()) {
        throw ProofFormatError("fact node cannot have children");
      }
      return proof_fact(*head, provenance);
    }
    return proof_rule(*head, provenance, std::move(children));
  }
  if (kind == "builtin") {
    auto goal = parse_goal(label);
    if (!goal || goal->kind != Goal::Kind::builtin) {
      throw ProofFormatError("unparseable builtin node label: " + label);
    }
    auto result = parse_term(
        j.contains("result") ? j.at("result").get<std::string>() : "true");
    if (!result) throw ProofFormatError("unparseable builtin result");
    return proof_builtin(goal->term, *result);
  }
  if (kind == "naf") {
    auto goal = parse_goal(label);
    if (!goal || goal->kind != Goal::Kind::naf) {
      throw ProofFormatError("unparseable naf node label: " + label);
    }
    const int limit =
        j.contains("depth_limit") ? j.at("depth_limit").get<int>() : -1;
    return proof_naf(goal->inner->term, limit);
  }
  throw ProofFormatError("unknown proof node kind: " + kind);
}

}  // namespace

ProofTree proof_fact(Term head, std::string provenance) {
  auto node = make_node(ProofNode::Kind::fact);
  node->head = std::move(head);
  node->provenance = std::move(provenance);
  return node;
}

ProofTree proof_rule(Term head, std::string provenance,
                     std::vector<ProofTree> children) {
  auto node = make_node(ProofNode::Kind::rule);
  node->head = std::move(head);
  node->provenance = std::move(provenance);
  node->children = std::move(children);
  return node;
}

ProofTree proof_builtin(Term goal, Term result) {
  auto node = make_node(ProofNode::Kind::builtin);
  node->head = std::move(goal);
  node->builtin_result = std::move(result);
  return node;
}

ProofTree proof_naf(Term failed_goal, int depth_limit) {
  auto node = make_node(ProofNode::Kind::naf);
  node->head = std::move(failed_goal);
  node->naf_depth_limit = depth_limit;
  return node;
}

ProofTree proof_query(std::vector<ProofTree> children) {
  auto node = make_node(ProofNode::Kind::query);
  node->head = Term::atom("query");
  node->children = std::move(children);
  return node;
}

int proof_depth(const ProofTree& p) {
  int deepest_child = 0;
  for (const ProofTree& child : p->children) {
    deepest_child = std::max(deepest_child, proof_depth(child));
  }
  const bool counts = p->kind == ProofNode::Kind::fact ||
                      p->kind == ProofNode::Kind::rule;
  return deepest_child + (counts ? 1 : 0);
}

bool proof_equal(const ProofTree& a, const ProofTree& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->provenance != b->provenance ||
      a->children.size() != b->children.size()) {
    return false;
  }
  if (!(a->head == b->head)) return false;
  if (a->kind == ProofNode::Kind::builtin &&
      !(a->builtin_result == b->builtin_result)) {
    return false;
  }
  if (a->kind == ProofNode::Kind::naf &&
      a->naf_depth_limit != b->naf_depth_limit) {
    return false;
  }
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!proof_equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

std::size_t proof_node_count(const ProofTree& p) {
  std::size_t n = 1;
  for (const ProofTree& child : p->children) n += proof_node_count(child);
  return n;
}

std::string proof_to_json(const ProofTree& p, int indent) {
  return node_to_json(p).dump(indent);
}

ProofTree proof_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ProofFormatError(std::string("invalid proof JSON: ") + e.what());
  }
  try {
    return node_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ProofFormatError(std::string("invalid proof record: ") + e.what());
  }
}

}  // namespace prooflog
