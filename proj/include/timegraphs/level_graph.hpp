#pragma once

#include <vector>

#include "timegraphs/tensor.hpp"
#include "timegraphs/tkg.hpp"

namespace timegraphs {

// Undirected view of one hierarchy level, the graph the pooling model sees.
// Level 0 uses spatial + temporal edges; levels >= 1 use super-adjacency.
struct LevelGraph {
    Tensor features;                    // n x F
    std::vector<std::vector<int>> adj;  // sorted, deduplicated, no self-loops
    std::vector<int> tkg_ids;           // size n; local index -> TKG node id (or -1)
    std::vector<double> timestamps;     // size n

    int n() const { return features.rows; }
};

LevelGraph level_view(const TemporalKnowledgeGraph& tkg, int level);

// Standalone graph for tests and synthetic inputs.
LevelGraph make_level_graph(Tensor features, const std::vector<std::pair<int, int>>& edges);

// BFS ball of radius R around `center`, the closed neighborhood N_v.
struct Neighborhood {
    int center = 0;
    std::vector<int> members;  // BFS order, ascending hop; deterministic
    std::vector<int> hops;     // parallel to members; hops[0] == 0
};

Neighborhood neighborhood(const LevelGraph& graph, int center, int radius);
std::vector<Neighborhood> all_neighborhoods(const LevelGraph& graph, int radius);

// Contraction of a graph onto selected seeds: coarse nodes are the seeds'
// radius-R neighborhoods; two coarse nodes are adjacent when their
// neighborhoods overlap or any fine edge joins them.
struct Contraction {
    std::vector<Neighborhood> neighborhoods;     // one per seed, selection order
    std::vector<std::vector<int>> coarse_adj;    // K x *, sorted
};

Contraction contract(const LevelGraph& graph, const std::vector<int>& seeds, int radius);

}  // namespace timegraphs
