#pragma once

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "timegraphs/snapshot.hpp"
#include "timegraphs/tkg.hpp"

namespace timegraphs {

struct BuilderConfig {
    // When true, an entity that skips frames is still linked to its most
    // recent appearance. Off by default: temporal edges connect consecutive
    // frames only.
    bool bridge_gaps = false;
};

// Batch construction of level 0. Single pass over the ordered snapshots;
// preserves all nodes/edges (kind = Spatial) and adds one temporal edge per
// entity shared between consecutive frames.
TemporalKnowledgeGraph build_level0(const std::vector<SnapshotGraph>& snapshots,
                                    const BuilderConfig& config = {});

// Incremental construction. Each ingest costs O(|V_t| + |E_t|) plus entity
// index lookups, independent of history length. Must produce the same graph
// as build_level0 on the same sequence.
class StreamingBuilder {
public:
    explicit StreamingBuilder(BuilderConfig config = {});

    void ingest(const SnapshotGraph& snapshot);
    const TemporalKnowledgeGraph& graph() const { return tkg_; }
    size_t frames_ingested() const { return frames_; }

private:
    BuilderConfig cfg_;
    TemporalKnowledgeGraph tkg_;
    std::unordered_map<std::string, int> entity_last_;  // entity -> node id in previous frame
    double last_timestamp_ = -std::numeric_limits<double>::infinity();
    size_t frames_ = 0;
    int feature_dim_ = -1;
};

}  // namespace timegraphs
