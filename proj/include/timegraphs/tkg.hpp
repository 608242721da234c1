#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace timegraphs {

enum class EdgeKind { Spatial, Temporal, Hierarchy, SuperAdjacency };

std::string to_string(EdgeKind k);
EdgeKind edge_kind_from_string(const std::string& s);

struct TkgNode {
    int node_id = 0;
    int level = 0;
    double timestamp = 0.0;
    std::optional<std::string> entity_id;
    std::vector<double> features;
    // Present exactly when the node was placed at its level by the event
    // model, i.e. on supernodes.
    std::optional<double> attention_score;
};

struct TkgEdge {
    int src = 0;
    int dst = 0;
    EdgeKind kind = EdgeKind::Spatial;
    // Level of the finer endpoint; hierarchy edges are stored super -> member.
    int level = 0;
};

// Fused multi-level graph over all snapshots. Level 0 holds the raw frames
// linked by temporal edges, higher levels hold supernodes.
struct TemporalKnowledgeGraph {
    std::vector<TkgNode> nodes;
    std::vector<TkgEdge> edges;
    int level_count = 1;
    std::vector<std::vector<int>> levels;  // node ids per level

    int add_node(TkgNode node);  // assigns the next dense id, returns it
    void add_edge(int src, int dst, EdgeKind kind, int level);
    int node_count_at(int level) const;
};

// Returns human-readable invariant violations; empty means the graph is
// well-formed.
std::vector<std::string> validate(const TemporalKnowledgeGraph& tkg);

// Versioned export with "nodes"/"edges"/"levels" arrays.
nlohmann::json tkg_to_json(const TemporalKnowledgeGraph& tkg);
TemporalKnowledgeGraph tkg_from_json(const nlohmann::json& j);

}  // namespace timegraphs
