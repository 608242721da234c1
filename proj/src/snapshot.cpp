#include "timegraphs/snapshot.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "timegraphs/error.hpp"

namespace timegraphs {

namespace {

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw schema_error("unexpected key \"" + it.key() + "\" in " + where);
    }
}

}  // namespace

void validate_snapshot(const SnapshotGraph& g) {
    std::unordered_set<std::string> seen;
    size_t dim = g.nodes.empty() ? 0 : g.nodes.front().features.size();
    for (const auto& n : g.nodes) {
        if (!seen.insert(n.entity_id).second)
            throw schema_error("duplicate entity_id in snapshot: " + n.entity_id);
        if (n.features.size() != dim)
            throw schema_error("feature dimension mismatch within snapshot for entity " +
                               n.entity_id);
    }
    int count = static_cast<int>(g.nodes.size());
    for (const auto& e : g.edges) {
        if (e.src < 0 || e.src >= count || e.dst < 0 || e.dst >= count)
            throw schema_error("edge endpoint out of range in snapshot");
        if (e.src == e.dst) throw schema_error("self-loop in snapshot input");
    }
}

nlohmann::json snapshot_to_json(const SnapshotGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes)
        nodes.push_back({{"id", n.entity_id}, {"type", n.node_type}, {"x", n.features}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"s", e.src}, {"d", e.dst}, {"k", e.edge_type}});
    return {{"t", g.timestamp}, {"nodes", nodes}, {"edges", edges}};
}

SnapshotGraph snapshot_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw schema_error("snapshot line must be a JSON object");
    reject_unknown_keys(j, {"t", "nodes", "edges"}, "snapshot");
    SnapshotGraph g;
    g.timestamp = j.at("t").get<double>();
    for (const auto& nj : j.at("nodes")) {
        reject_unknown_keys(nj, {"id", "type", "x"}, "snapshot node");
        SnapshotNode n;
        n.entity_id = nj.at("id").get<std::string>();
        n.node_type = nj.at("type").get<std::string>();
        n.features = nj.at("x").get<std::vector<double>>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges")) {
        reject_unknown_keys(ej, {"s", "d", "k"}, "snapshot edge");
        SnapshotEdge e;
        e.src = ej.at("s").get<int>();
        e.dst = ej.at("d").get<int>();
        e.edge_type = ej.at("k").get<std::string>();
        g.edges.push_back(std::move(e));
    }
    validate_snapshot(g);
    return g;
}

std::vector<SnapshotGraph> read_snapshot_jsonl(std::istream& in) {
    std::vector<SnapshotGraph> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            out.push_back(snapshot_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("snapshot line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw parse_error("snapshot line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<SnapshotGraph> read_snapshot_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    return read_snapshot_jsonl(in);
}

void write_snapshot_jsonl(std::ostream& out, const std::vector<SnapshotGraph>& snapshots) {
    for (const auto& g : snapshots) out << snapshot_to_json(g).dump() << "\n";
}

void write_snapshot_jsonl_file(const std::string& path,
                               const std::vector<SnapshotGraph>& snapshots) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    write_snapshot_jsonl(out, snapshots);
    if (!out) throw io_error("write failed: " + path);
}

}  // namespace timegraphs
