#include "timegraphs/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "timegraphs/error.hpp"

namespace timegraphs {

Tensor* NamedParams::find(const std::string& name) const {
    for (const auto& [n, t] : entries)
        if (n == name) return t;
    return nullptr;
}

nlohmann::json params_to_json(const NamedParams& params) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [name, t] : params.entries) {
        arr.push_back({{"name", name}, {"rows", t->rows}, {"cols", t->cols}, {"data", t->data}});
    }
    return arr;
}

void params_from_json(const nlohmann::json& j, const NamedParams& params) {
    if (!j.is_array()) throw schema_error("parameter block must be an array");
    if (j.size() != params.entries.size())
        throw schema_error("parameter count mismatch: file has " + std::to_string(j.size()) +
                           ", model expects " + std::to_string(params.entries.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        const auto& entry = j[i];
        const std::string name = entry.at("name").get<std::string>();
        Tensor* t = params.entries[i].second;
        if (name != params.entries[i].first)
            throw schema_error("parameter name mismatch at index " + std::to_string(i) + ": " +
                               name + " vs " + params.entries[i].first);
        int rows = entry.at("rows").get<int>();
        int cols = entry.at("cols").get<int>();
        if (rows != t->rows || cols != t->cols)
            throw schema_error("parameter shape mismatch for " + name);
        auto data = entry.at("data").get<std::vector<double>>();
        if (static_cast<int>(data.size()) != t->size())
            throw schema_error("parameter data length mismatch for " + name);
        t->data = std::move(data);
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("write failed: " + path);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return j;
}

std::string json_fingerprint(const nlohmann::json& j) {
    std::string dump = j.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace timegraphs
