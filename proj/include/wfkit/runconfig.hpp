#pragma once

// Run configuration: JSON config files, command-line overrides, and the
// config hash embedded in every output so runs can be traced back to their
// exact settings.

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wfkit/common.hpp"

namespace wfkit {

using Json = nlohmann::json;

inline Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("config parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw Error("config root must be an object: " + path);
    return j;
}

// dotted-path lookup ("train.epochs"); returns nullptr when absent
inline const Json* config_find(const Json& root, const std::string& key) {
    const Json* cur = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        cur = &*it;
        if (dot == std::string::npos) return cur;
        start = dot + 1;
    }
}

inline double config_number(const Json& root, const std::string& key, double fallback) {
    const Json* v = config_find(root, key);
    if (!v) return fallback;
    if (!v->is_number()) throw Error("config field '" + key + "' must be a number");
    return v->get<double>();
}

inline long long config_int(const Json& root, const std::string& key, long long fallback) {
    const Json* v = config_find(root, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw Error("config field '" + key + "' must be an integer");
    return v->get<long long>();
}

inline std::string config_string(const Json& root, const std::string& key,
                                 const std::string& fallback) {
    const Json* v = config_find(root, key);
    if (!v) return fallback;
    if (!v->is_string()) throw Error("config field '" + key + "' must be a string");
    return v->get<std::string>();
}

inline bool config_bool(const Json& root, const std::string& key, bool fallback) {
    const Json* v = config_find(root, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw Error("config field '" + key + "' must be a boolean");
    return v->get<bool>();
}

// set a dotted-path key, creating intermediate objects
inline void config_set(Json& root, const std::string& key, Json value) {
    Json* cur = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (dot == std::string::npos) {
            (*cur)[part] = std::move(value);
            return;
        }
        Json& next = (*cur)[part];
        if (!next.is_object()) next = Json::object();
        cur = &next;
        start = dot + 1;
    }
}

// Hash of the effective (post-override) configuration.  nlohmann keeps object
// keys sorted, so dump() is canonical for equal content.
inline std::string config_hash(const Json& effective) {
    return hex64(fnv1a(effective.dump()));
}

inline std::string csv_stamp(const std::string& hash, std::uint64_t seed) {
    return "# config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
}

}  // namespace wfkit
