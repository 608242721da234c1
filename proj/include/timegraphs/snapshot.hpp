#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace timegraphs {

struct SnapshotNode {
    std::string entity_id;
    std::string node_type;
    std::vector<double> features;
};

struct SnapshotEdge {
    int src = 0;
    int dst = 0;
    std::string edge_type;
    std::optional<std::vector<double>> features;
};

// One time-stamped input graph.
struct SnapshotGraph {
    double timestamp = 0.0;
    std::vector<SnapshotNode> nodes;
    std::vector<SnapshotEdge> edges;
};

// Checks per-snapshot invariants: unique entity ids, valid edge endpoints,
// no self-loops, uniform feature dimension. Throws schema errors.
void validate_snapshot(const SnapshotGraph& g);

// Wire format per line: {"t": number, "nodes": [{"id","type","x"}],
// "edges": [{"s","d","k"}]}. Unknown keys are rejected.
nlohmann::json snapshot_to_json(const SnapshotGraph& g);
SnapshotGraph snapshot_from_json(const nlohmann::json& j);

std::vector<SnapshotGraph> read_snapshot_jsonl(std::istream& in);
std::vector<SnapshotGraph> read_snapshot_jsonl_file(const std::string& path);
void write_snapshot_jsonl(std::ostream& out, const std::vector<SnapshotGraph>& snapshots);
void write_snapshot_jsonl_file(const std::string& path,
                               const std::vector<SnapshotGraph>& snapshots);

}  // namespace timegraphs
