#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace trackwall {

// Shortest round-trip decimal form, laid out like Python's float repr
// ("3.0", "0.0001", "1e-05", "1e+16"). Non-finite values are rejected.
std::string format_double(double value);

// Compact JSON with object keys in insertion order, UTF-8 passed through
// unescaped and floats rendered by format_double. The output is byte-stable
// across platforms, which is what the golden files rely on.
std::string dump_canonical(const nlohmann::ordered_json& value);

}  // namespace trackwall
