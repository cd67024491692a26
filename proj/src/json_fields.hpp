#pragma once

// Positioned accessors for JSON documents. Error messages start with the JSON
// pointer of the offending element.

#include "openloop/ptsp_map.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

namespace openloop::detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw SchemaError((where.empty() ? "/" : where) + ": " + what);
}

inline const nlohmann::json& member(const nlohmann::json& obj, const std::string& where, const char* key) {
    if (!obj.is_object()) {
        fail(where, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail(where + "/" + key, "missing required field");
    }
    return *it;
}

inline double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(where, "expected a finite number");
    }
    return d;
}

inline double number_field(const nlohmann::json& obj, const std::string& where, const char* key) {
    return number(member(obj, where, key), where + "/" + key);
}

inline double optional_number(const nlohmann::json& obj, const std::string& where, const char* key,
                              double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    return number(obj.at(key), where + "/" + key);
}

inline std::int64_t integer_field(const nlohmann::json& obj, const std::string& where, const char* key) {
    const nlohmann::json& v = member(obj, where, key);
    if (!v.is_number_integer()) {
        fail(where + "/" + key, "expected an integer");
    }
    return v.get<std::int64_t>();
}

inline std::string string_field(const nlohmann::json& obj, const std::string& where, const char* key) {
    const nlohmann::json& v = member(obj, where, key);
    if (!v.is_string()) {
        fail(where + "/" + key, "expected a string");
    }
    return v.get<std::string>();
}

}  // namespace openloop::detail
