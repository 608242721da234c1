#pragma once

#include <stdexcept>
#include <string>

namespace timegraphs {

// Error taxonomy shared across the library. `kind` is machine-readable and
// surfaces in CLI error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

inline Error schema_error(const std::string& msg) { return Error("schema", msg); }
inline Error ordering_error(const std::string& msg) { return Error("ordering", msg); }
inline Error shape_error(const std::string& msg) { return Error("shape", msg); }
inline Error parse_error(const std::string& msg) { return Error("parse", msg); }
inline Error config_error(const std::string& msg) { return Error("config", msg); }
inline Error io_error(const std::string& msg) { return Error("io", msg); }
inline Error numeric_error(const std::string& msg) { return Error("numeric", msg); }
inline Error domain_error(const std::string& msg) { return Error("domain", msg); }

}  // namespace timegraphs
