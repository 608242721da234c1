#include "timegraphs/hierarchy.hpp"

#include <algorithm>
#include <cmath>

#include "timegraphs/error.hpp"
#include "timegraphs/level_graph.hpp"

namespace timegraphs {

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::Mean: return "mean";
        case Aggregation::Sum: return "sum";
        case Aggregation::Max: return "max";
    }
    return "?";
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "mean") return Aggregation::Mean;
    if (s == "sum") return Aggregation::Sum;
    if (s == "max") return Aggregation::Max;
    throw config_error("unknown aggregation: " + s);
}

double HierarchyConfig::ratio_at(int level) const {
    if (pool_ratio.empty()) throw config_error("hierarchy: pool_ratio empty");
    int idx = std::min(level, static_cast<int>(pool_ratio.size()) - 1);
    double r = pool_ratio[idx];
    if (r <= 0.0 || r >= 1.0)
        throw config_error("hierarchy: pool_ratio must be in (0,1)");
    return r;
}

TemporalKnowledgeGraph build_supernodes(const TemporalKnowledgeGraph& tkg,
                                        const PoolSelection& selection, int level,
                                        const HierarchyConfig& config) {
    if (level < 1) throw domain_error("build_supernodes: level must be >= 1");
    LevelGraph fine = level_view(tkg, level - 1);
    int n = fine.n();
    for (int idx : selection.selected)
        if (idx < 0 || idx >= n)
            throw domain_error("build_supernodes: selection references unknown node");
    if (selection.scores.size() != selection.selected.size())
        throw domain_error("build_supernodes: selection missing scores");

    TemporalKnowledgeGraph out = tkg;
    Contraction con = contract(fine, selection.selected, config.radius);

    std::vector<int> super_ids(selection.selected.size());
    int feat_dim = fine.features.cols;
    for (size_t j = 0; j < selection.selected.size(); ++j) {
        const Neighborhood& nb = con.neighborhoods[j];
        TkgNode node;
        node.level = level;
        node.timestamp = fine.timestamps[selection.selected[j]];
        node.attention_score = selection.scores[j];
        node.features.assign(feat_dim, 0.0);
        for (size_t m = 0; m < nb.members.size(); ++m) {
            for (int c = 0; c < feat_dim; ++c) {
                double v = fine.features.at(nb.members[m], c);
                switch (config.aggregation) {
                    case Aggregation::Mean:
                    case Aggregation::Sum:
                        node.features[c] += v;
                        break;
                    case Aggregation::Max:
                        node.features[c] = (m == 0) ? v : std::max(node.features[c], v);
                        break;
                }
            }
        }
        if (config.aggregation == Aggregation::Mean && !nb.members.empty())
            for (double& v : node.features) v /= static_cast<double>(nb.members.size());
        super_ids[j] = out.add_node(std::move(node));
    }

    // Hierarchy edges super -> member, members in BFS order.
    for (size_t j = 0; j < selection.selected.size(); ++j)
        for (int m : con.neighborhoods[j].members)
            out.add_edge(super_ids[j], fine.tkg_ids[m], EdgeKind::Hierarchy, level - 1);

    for (size_t a = 0; a < con.coarse_adj.size(); ++a)
        for (int b : con.coarse_adj[a])
            if (static_cast<int>(a) < b)
                out.add_edge(super_ids[a], super_ids[b], EdgeKind::SuperAdjacency, level);

    return out;
}

TemporalKnowledgeGraph build_hierarchy(const TemporalKnowledgeGraph& tkg,
                                       const EventModelParams& params,
                                       const EventModelConfig& model_cfg,
                                       const HierarchyConfig& config) {
    TemporalKnowledgeGraph out = tkg;
    for (int level = 1; level <= config.levels; ++level) {
        LevelGraph view = level_view(out, level - 1);
        if (view.n() == 0) break;
        int k = std::max(1, static_cast<int>(std::ceil(config.ratio_at(level - 1) * view.n())));
        EventModelConfig mc = model_cfg;
        mc.radius = config.radius;
        PoolSelection sel = greedy_select(params, view, k, mc);
        out = build_supernodes(out, sel, level, config);
    }
    return out;
}

}  // namespace timegraphs
