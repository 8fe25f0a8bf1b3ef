#pragma once

#include <json.hpp>

#include "prooflog/proof_graph.hpp"

namespace prooflog::detail {

nlohmann::ordered_json graph_to_json_value(const ProofGraph& g);

/// Throws nlohmann::json::exception or std::runtime_error on malformed input.
ProofGraph graph_from_json_value(const nlohmann::json& j);

}  // namespace prooflog::detail
