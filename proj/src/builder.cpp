#include "timegraphs/builder.hpp"

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

// Canonical per-frame emission order, shared by contract (not code) between
// the batch and streaming paths: nodes in snapshot order, then temporal
// edges in node order, then spatial edges in snapshot order.
void check_feature_dim(const SnapshotGraph& g, int& feature_dim) {
    for (const auto& n : g.nodes) {
        int d = static_cast<int>(n.features.size());
        if (feature_dim < 0)
            feature_dim = d;
        else if (d != feature_dim)
            throw schema_error("feature dimension mismatch across snapshots: expected " +
                               std::to_string(feature_dim) + ", got " + std::to_string(d));
    }
}

}  // namespace

TemporalKnowledgeGraph build_level0(const std::vector<SnapshotGraph>& snapshots,
                                    const BuilderConfig& config) {
    TemporalKnowledgeGraph tkg;
    tkg.levels.resize(1);
    int feature_dim = -1;
    double prev_time = -std::numeric_limits<double>::infinity();
    std::unordered_map<std::string, int> prev_entities;  // previous frame (or all seen, if bridging)

    for (const auto& snap : snapshots) {
        validate_snapshot(snap);
        check_feature_dim(snap, feature_dim);
        if (snap.timestamp <= prev_time)
            throw ordering_error("snapshot timestamps must be strictly increasing");
        prev_time = snap.timestamp;

        std::vector<int> frame_ids(snap.nodes.size());
        for (size_t i = 0; i < snap.nodes.size(); ++i) {
            TkgNode node;
            node.level = 0;
            node.timestamp = snap.timestamp;
            node.entity_id = snap.nodes[i].entity_id;
            node.features = snap.nodes[i].features;
            frame_ids[i] = tkg.add_node(std::move(node));
        }
        std::unordered_map<std::string, int> current;
        current.reserve(snap.nodes.size());
        for (size_t i = 0; i < snap.nodes.size(); ++i) {
            auto it = prev_entities.find(snap.nodes[i].entity_id);
            if (it != prev_entities.end())
                tkg.add_edge(it->second, frame_ids[i], EdgeKind::Temporal, 0);
            current.emplace(snap.nodes[i].entity_id, frame_ids[i]);
        }
        for (const auto& e : snap.edges)
            tkg.add_edge(frame_ids[e.src], frame_ids[e.dst], EdgeKind::Spatial, 0);

        if (config.bridge_gaps) {
            for (auto& [entity, id] : current) prev_entities[entity] = id;
        } else {
            prev_entities = std::move(current);
        }
    }
    return tkg;
}

StreamingBuilder::StreamingBuilder(BuilderConfig config) : cfg_(config) {
    tkg_.levels.resize(1);
}

void StreamingBuilder::ingest(const SnapshotGraph& snapshot) {
    validate_snapshot(snapshot);
    check_feature_dim(snapshot, feature_dim_);
    if (snapshot.timestamp <= last_timestamp_)
        throw ordering_error("ingest: stale timestamp " + std::to_string(snapshot.timestamp));
    last_timestamp_ = snapshot.timestamp;
    ++frames_;

    std::vector<int> frame_ids(snapshot.nodes.size());
    for (size_t i = 0; i < snapshot.nodes.size(); ++i) {
        TkgNode node;
        node.level = 0;
        node.timestamp = snapshot.timestamp;
        node.entity_id = snapshot.nodes[i].entity_id;
        node.features = snapshot.nodes[i].features;
        frame_ids[i] = tkg_.add_node(std::move(node));
    }
    std::unordered_map<std::string, int> current;
    current.reserve(snapshot.nodes.size());
    for (size_t i = 0; i < snapshot.nodes.size(); ++i) {
        auto it = entity_last_.find(snapshot.nodes[i].entity_id);
        if (it != entity_last_.end())
            tkg_.add_edge(it->second, frame_ids[i], EdgeKind::Temporal, 0);
        current.emplace(snapshot.nodes[i].entity_id, frame_ids[i]);
    }
    for (const auto& e : snapshot.edges)
        tkg_.add_edge(frame_ids[e.src], frame_ids[e.dst], EdgeKind::Spatial, 0);

    if (cfg_.bridge_gaps) {
        for (auto& [entity, id] : current) entity_last_[entity] = id;
    } else {
        entity_last_ = std::move(current);
    }
}

}  // namespace timegraphs
