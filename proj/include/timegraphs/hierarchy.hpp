#pragma once

#include <string>
#include <vector>

#include "timegraphs/event_model.hpp"
#include "timegraphs/tkg.hpp"

namespace timegraphs {

enum class Aggregation { Mean, Sum, Max };

std::string to_string(Aggregation a);
Aggregation aggregation_from_string(const std::string& s);

struct HierarchyConfig {
    int levels = 2;                        // levels above 0; 0 leaves the graph flat
    std::vector<double> pool_ratio{0.5};   // per level, last entry repeats
    Aggregation aggregation = Aggregation::Mean;
    int radius = 1;

    double ratio_at(int level) const;
};

// Adds one level of supernodes from a selection computed on the level-1
// subgraph. Supernode features aggregate the seed's closed radius-R
// neighborhood; a hierarchy edge joins the supernode to every member, and
// super-adjacency follows the contraction rule (neighborhood overlap or any
// fine edge between neighborhoods). Pure extension: existing levels are
// copied untouched.
TemporalKnowledgeGraph build_supernodes(const TemporalKnowledgeGraph& tkg,
                                        const PoolSelection& selection, int level,
                                        const HierarchyConfig& config);

// Runs greedy selection and supernode construction per level on top of
// level 0. Deterministic given (tkg, params, config).
TemporalKnowledgeGraph build_hierarchy(const TemporalKnowledgeGraph& tkg,
                                       const EventModelParams& params,
                                       const EventModelConfig& model_cfg,
                                       const HierarchyConfig& config);

}  // namespace timegraphs
