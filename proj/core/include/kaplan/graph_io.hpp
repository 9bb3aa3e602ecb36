#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "kaplan/graph.hpp"

namespace kaplan {

/// {"vertices":[{"id","mu","boundary","coord"?}], "edges":[{"u","v","w"}], "family":{"kind","params"}}
[[nodiscard]] nlohmann::json graph_to_json(const WeightedGraph& g);

/// Throws ParseError on malformed documents plus any WeightedGraph::build error.
[[nodiscard]] WeightedGraph graph_from_json(const nlohmann::json& doc);

void save_graph(const WeightedGraph& g, const std::filesystem::path& path);
[[nodiscard]] WeightedGraph load_graph(const std::filesystem::path& path);

}  // namespace kaplan
