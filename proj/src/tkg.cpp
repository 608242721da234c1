#include "timegraphs/tkg.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "timegraphs/error.hpp"

namespace timegraphs {

std::string to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Spatial: return "spatial";
        case EdgeKind::Temporal: return "temporal";
        case EdgeKind::Hierarchy: return "hierarchy";
        case EdgeKind::SuperAdjacency: return "super";
    }
    return "?";
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "spatial") return EdgeKind::Spatial;
    if (s == "temporal") return EdgeKind::Temporal;
    if (s == "hierarchy") return EdgeKind::Hierarchy;
    if (s == "super") return EdgeKind::SuperAdjacency;
    throw schema_error("unknown edge kind: " + s);
}

int TemporalKnowledgeGraph::add_node(TkgNode node) {
    node.node_id = static_cast<int>(nodes.size());
    int level = node.level;
    if (level < 0) throw schema_error("negative node level");
    if (static_cast<int>(levels.size()) <= level) levels.resize(level + 1);
    levels[level].push_back(node.node_id);
    level_count = std::max(level_count, level + 1);
    nodes.push_back(std::move(node));
    return nodes.back().node_id;
}

void TemporalKnowledgeGraph::add_edge(int src, int dst, EdgeKind kind, int level) {
    edges.push_back(TkgEdge{src, dst, kind, level});
}

int TemporalKnowledgeGraph::node_count_at(int level) const {
    if (level < 0 || level >= static_cast<int>(levels.size())) return 0;
    return static_cast<int>(levels[level].size());
}

std::vector<std::string> validate(const TemporalKnowledgeGraph& tkg) {
    std::vector<std::string> out;
    auto complain = [&out](const std::string& msg) { out.push_back(msg); };

    std::unordered_set<int> ids;
    size_t feat_dim = tkg.nodes.empty() ? 0 : tkg.nodes.front().features.size();
    for (const auto& n : tkg.nodes) {
        if (!ids.insert(n.node_id).second)
            complain("duplicate node_id " + std::to_string(n.node_id));
        if (n.level < 0) complain("negative level on node " + std::to_string(n.node_id));
        if (n.features.size() != feat_dim)
            complain("feature dimension mismatch on node " + std::to_string(n.node_id));
        if (n.attention_score) {
            if (*n.attention_score < 0.0 || *n.attention_score > 1.0)
                complain("attention score outside [0,1] on node " + std::to_string(n.node_id));
            if (n.level == 0)
                complain("attention score on level-0 node " + std::to_string(n.node_id));
        } else if (n.level > 0) {
            complain("missing attention score on supernode " + std::to_string(n.node_id));
        }
    }

    // Level index consistency.
    for (int l = 0; l < static_cast<int>(tkg.levels.size()); ++l) {
        for (int id : tkg.levels[l]) {
            if (id < 0 || id >= static_cast<int>(tkg.nodes.size())) {
                complain("level index references unknown node " + std::to_string(id));
            } else if (tkg.nodes[id].level != l) {
                complain("level index mismatch for node " + std::to_string(id));
            }
        }
    }
    if (tkg.level_count != std::max(1, static_cast<int>(tkg.levels.size())))
        complain("level_count inconsistent with level index");

    // Distinct level-0 timestamps in order; used to check temporal adjacency.
    std::set<double> frame_times;
    for (const auto& n : tkg.nodes)
        if (n.level == 0) frame_times.insert(n.timestamp);
    std::vector<double> times(frame_times.begin(), frame_times.end());
    std::map<double, int> frame_of;
    for (size_t i = 0; i < times.size(); ++i) frame_of[times[i]] = static_cast<int>(i);

    int n_count = static_cast<int>(tkg.nodes.size());
    for (const auto& e : tkg.edges) {
        if (e.src < 0 || e.src >= n_count || e.dst < 0 || e.dst >= n_count) {
            complain("edge endpoint out of range");
            continue;
        }
        const TkgNode& a = tkg.nodes[e.src];
        const TkgNode& b = tkg.nodes[e.dst];
        switch (e.kind) {
            case EdgeKind::Spatial:
                if (a.level != 0 || b.level != 0) complain("spatial edge off level 0");
                break;
            case EdgeKind::Temporal: {
                if (a.level != 0 || b.level != 0) {
                    complain("temporal edge off level 0");
                    break;
                }
                if (!a.entity_id || !b.entity_id || *a.entity_id != *b.entity_id)
                    complain("temporal edge between different entities");
                int fa = frame_of.count(a.timestamp) ? frame_of[a.timestamp] : -1;
                int fb = frame_of.count(b.timestamp) ? frame_of[b.timestamp] : -1;
                if (fa < 0 || fb < 0 || std::abs(fa - fb) != 1)
                    complain("temporal edge between non-consecutive frames");
                break;
            }
            case EdgeKind::Hierarchy:
                if (a.level != b.level + 1)
                    complain("hierarchy edge must connect level l to level l-1");
                break;
            case EdgeKind::SuperAdjacency:
                if (a.level != b.level || a.level < 1)
                    complain("super-adjacency edge must connect equal levels >= 1");
                break;
        }
    }
    return out;
}

nlohmann::json tkg_to_json(const TemporalKnowledgeGraph& tkg) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tkg.nodes) {
        nlohmann::json nj = {{"id", n.node_id},
                             {"level", n.level},
                             {"t", n.timestamp},
                             {"x", n.features}};
        if (n.entity_id) nj["entity"] = *n.entity_id;
        if (n.attention_score) nj["attention"] = *n.attention_score;
        nodes.push_back(std::move(nj));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : tkg.edges)
        edges.push_back({{"s", e.src}, {"d", e.dst}, {"k", to_string(e.kind)}, {"level", e.level}});
    return {{"format_version", 1},
            {"nodes", nodes},
            {"edges", edges},
            {"levels", tkg.levels}};
}

TemporalKnowledgeGraph tkg_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("format_version"))
        throw schema_error("TKG document missing format_version");
    if (j.at("format_version").get<int>() != 1)
        throw schema_error("unsupported TKG format_version");
    TemporalKnowledgeGraph tkg;
    for (const auto& nj : j.at("nodes")) {
        TkgNode n;
        n.node_id = nj.at("id").get<int>();
        n.level = nj.at("level").get<int>();
        n.timestamp = nj.at("t").get<double>();
        n.features = nj.at("x").get<std::vector<double>>();
        if (nj.contains("entity")) n.entity_id = nj.at("entity").get<std::string>();
        if (nj.contains("attention")) n.attention_score = nj.at("attention").get<double>();
        if (n.node_id != static_cast<int>(tkg.nodes.size()))
            throw schema_error("TKG node ids must be dense and ordered");
        tkg.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges")) {
        tkg.edges.push_back(TkgEdge{ej.at("s").get<int>(), ej.at("d").get<int>(),
                                    edge_kind_from_string(ej.at("k").get<std::string>()),
                                    ej.at("level").get<int>()});
    }
    tkg.levels = j.at("levels").get<std::vector<std::vector<int>>>();
    tkg.level_count = std::max(1, static_cast<int>(tkg.levels.size()));
    return tkg;
}

}  // namespace timegraphs
