#include "timegraphs/level_graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

void add_undirected(std::vector<std::vector<int>>& adj, int a, int b) {
    if (a == b) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
}

void sort_dedup(std::vector<std::vector<int>>& adj) {
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
}

}  // namespace

LevelGraph level_view(const TemporalKnowledgeGraph& tkg, int level) {
    LevelGraph g;
    if (level < 0 || level >= static_cast<int>(tkg.levels.size())) return g;
    const auto& ids = tkg.levels[level];
    int n = static_cast<int>(ids.size());
    std::unordered_map<int, int> local;
    local.reserve(ids.size());
    size_t dim = 0;
    for (int i = 0; i < n; ++i) {
        local[ids[i]] = i;
        dim = std::max(dim, tkg.nodes[ids[i]].features.size());
    }
    g.features = Tensor(n, static_cast<int>(dim));
    g.tkg_ids.resize(n);
    g.timestamps.resize(n);
    g.adj.assign(n, {});
    for (int i = 0; i < n; ++i) {
        const TkgNode& node = tkg.nodes[ids[i]];
        g.tkg_ids[i] = node.node_id;
        g.timestamps[i] = node.timestamp;
        for (size_t c = 0; c < node.features.size(); ++c)
            g.features.at(i, static_cast<int>(c)) = node.features[c];
    }
    for (const auto& e : tkg.edges) {
        bool within = (level == 0)
                          ? (e.kind == EdgeKind::Spatial || e.kind == EdgeKind::Temporal)
                          : (e.kind == EdgeKind::SuperAdjacency);
        if (!within) continue;
        auto a = local.find(e.src);
        auto b = local.find(e.dst);
        if (a == local.end() || b == local.end()) continue;
        add_undirected(g.adj, a->second, b->second);
    }
    sort_dedup(g.adj);
    return g;
}

LevelGraph make_level_graph(Tensor features, const std::vector<std::pair<int, int>>& edges) {
    LevelGraph g;
    int n = features.rows;
    g.features = std::move(features);
    g.adj.assign(n, {});
    g.tkg_ids.assign(n, -1);
    g.timestamps.assign(n, 0.0);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw schema_error("make_level_graph: edge endpoint out of range");
        add_undirected(g.adj, a, b);
    }
    sort_dedup(g.adj);
    return g;
}

Neighborhood neighborhood(const LevelGraph& graph, int center, int radius) {
    if (center < 0 || center >= graph.n())
        throw domain_error("neighborhood: center out of range");
    Neighborhood nbr;
    nbr.center = center;
    std::vector<int> hop(graph.n(), -1);
    hop[center] = 0;
    std::deque<int> queue{center};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        nbr.members.push_back(v);
        nbr.hops.push_back(hop[v]);
        if (hop[v] == radius) continue;
        for (int u : graph.adj[v]) {
            if (hop[u] < 0) {
                hop[u] = hop[v] + 1;
                queue.push_back(u);
            }
        }
    }
    return nbr;
}

std::vector<Neighborhood> all_neighborhoods(const LevelGraph& graph, int radius) {
    std::vector<Neighborhood> out;
    out.reserve(graph.n());
    for (int v = 0; v < graph.n(); ++v) out.push_back(neighborhood(graph, v, radius));
    return out;
}

Contraction contract(const LevelGraph& graph, const std::vector<int>& seeds, int radius) {
    Contraction c;
    int k = static_cast<int>(seeds.size());
    c.coarse_adj.assign(k, {});
    std::vector<std::vector<int>> covering(graph.n());  // fine node -> coarse indices
    for (int i = 0; i < k; ++i) {
        c.neighborhoods.push_back(neighborhood(graph, seeds[i], radius));
        for (int m : c.neighborhoods.back().members) covering[m].push_back(i);
    }
    // Overlap: a fine node inside two neighborhoods joins their supernodes.
    for (int v = 0; v < graph.n(); ++v) {
        const auto& cov = covering[v];
        for (size_t a = 0; a < cov.size(); ++a)
            for (size_t b = a + 1; b < cov.size(); ++b)
                add_undirected(c.coarse_adj, cov[a], cov[b]);
    }
    // Adjacency: any fine edge between members of two neighborhoods.
    for (int v = 0; v < graph.n(); ++v) {
        for (int u : graph.adj[v]) {
            if (u <= v) continue;
            for (int a : covering[v])
                for (int b : covering[u])
                    if (a != b) add_undirected(c.coarse_adj, a, b);
        }
    }
    sort_dedup(c.coarse_adj);
    return c;
}

}  // namespace timegraphs
