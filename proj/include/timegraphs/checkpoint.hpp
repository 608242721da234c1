#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "timegraphs/tensor.hpp"

namespace timegraphs {

// Ordered named parameter view used for serialization and optimizer wiring.
struct NamedParams {
    std::vector<std::pair<std::string, Tensor*>> entries;

    void add(const std::string& name, Tensor& t) { entries.emplace_back(name, &t); }
    Tensor* find(const std::string& name) const;
};

// Serializes parameters as {"name": ..., "rows": ..., "cols": ..., "data": [...]}.
// Doubles round-trip bit-exactly through nlohmann's shortest representation.
nlohmann::json params_to_json(const NamedParams& params);

// Restores values into the existing tensors; names and shapes must match.
void params_from_json(const nlohmann::json& j, const NamedParams& params);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// FNV-1a over the canonical dump; stable content fingerprint for configs.
std::string json_fingerprint(const nlohmann::json& j);

}  // namespace timegraphs
