#pragma once

// JSONL dataset persistence. One record per line; an optional leading
// {"run": {...}} header line carries provenance (config hash, seed).

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "wfkit/trace.hpp"

namespace wfkit {

using Json = nlohmann::json;

inline Json record_to_json(const TraceRecord& rec) {
    Json ev = Json::array();
    for (const TraceEvent& e : rec.events) {
        Json row = Json::array({e.time, static_cast<int>(e.direction), e.size});
        if (e.dummy || e.payload != e.size) row.push_back(e.payload);
        ev.push_back(std::move(row));
    }
    Json j;
    j["label"] = rec.label;
    j["events"] = std::move(ev);
    if (!rec.meta.empty()) j["meta"] = rec.meta;
    return j;
}

inline TraceRecord record_from_json(const Json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("label") || !j.contains("events"))
        throw Error(where + ": record needs 'label' and 'events'");
    TraceRecord rec;
    rec.label = j.at("label").get<std::string>();
    const Json& ev = j.at("events");
    if (!ev.is_array()) throw Error(where + ": 'events' must be an array");
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const Json& row = ev[i];
        if (!row.is_array() || row.size() < 3 || row.size() > 4)
            throw Error(where + ": event " + std::to_string(i) + " must be [t,dir,size(,payload)]");
        double t = row[0].get<double>();
        int dir = row[1].get<int>();
        int size = row[2].get<int>();
        if (dir != 1 && dir != -1)
            throw Error(where + ": event " + std::to_string(i) + " direction out of domain");
        Direction d = dir > 0 ? Direction::Outgoing : Direction::Incoming;
        if (row.size() == 4) {
            int payload = row[3].get<int>();
            if (payload < 0 || payload > size)
                throw Error(where + ": event " + std::to_string(i) + " payload outside [0,size]");
            rec.events.emplace_back(t, d, size, payload);
        } else {
            rec.events.emplace_back(t, d, size);
        }
    }
    if (j.contains("meta"))
        for (const auto& [k, v] : j.at("meta").items()) rec.meta[k] = v.get<double>();
    if (auto why = rec.violation()) throw Error(where + ": " + *why);
    return rec;
}

struct JsonlFile {
    std::optional<Json> run_header;  // the "run" object, if the file had one
    Dataset dataset;
};

inline JsonlFile read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);
    JsonlFile out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw Error(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
        }
        if (j.is_object() && j.contains("run")) {
            if (lineno != 1 || out.run_header)
                throw Error(path + ":" + std::to_string(lineno) + ": run header must be line 1 only");
            out.run_header = j.at("run");
            continue;
        }
        out.dataset.records.push_back(
            record_from_json(j, path + ":" + std::to_string(lineno)));
    }
    if (out.dataset.records.empty()) throw Error(path + ": no records");
    out.dataset.rebuild_class_index();
    return out;
}

inline void write_jsonl(std::ostream& os, const Dataset& ds,
                        const std::optional<Json>& run_header = std::nullopt) {
    if (run_header) {
        Json h;
        h["run"] = *run_header;
        os << h.dump() << '\n';
    }
    for (const TraceRecord& rec : ds.records) os << record_to_json(rec).dump() << '\n';
}

}  // namespace wfkit
