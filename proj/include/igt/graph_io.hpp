#pragma once

// Graph files hold one JSON object per line:
//
//   {"n_nodes": 7, "edges": [[0,1], ...], "node_features": [[1.0], ...],
//    "label": 2, "invariant_edge_mask": [false, true, ...],
//    "handcrafted_pse": [[...], ...],            // [] until precompute-pse
//    "meta": {"id": "train-0", "base_type": "wheel",
//             "motif_type": "crane", "split": "train"}}

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "igt/graph.hpp"

namespace igt {

nlohmann::json graph_to_json(const Graph& g);
// Throws ParseError naming the offending field.
Graph graph_from_json(const nlohmann::json& j);

void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs);
// Empty file -> empty vector. Malformed lines raise ParseError with the line number.
std::vector<Graph> read_graphs(const std::filesystem::path& path);

// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace igt
