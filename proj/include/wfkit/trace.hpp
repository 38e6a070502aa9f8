#pragma once

// Canonical trace data model, cell-file ingestion, deterministic synthetic
// corpus generation and train/test iteration splitting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

inline constexpr const char* kBackgroundLabel = "background";
inline constexpr int kTorCellBytes = 512;

enum class Direction : int { Outgoing = +1, Incoming = -1 };

struct TraceEvent {
    double time = 0.0;
    Direction direction = Direction::Outgoing;
    int size = 0;     // wire size in bytes
    int payload = 0;  // real bytes carried; == size for undefended traffic
    bool dummy = false;

    TraceEvent() = default;
    TraceEvent(double t, Direction d, int s) : time(t), direction(d), size(s), payload(s) {}
    TraceEvent(double t, Direction d, int s, int real)
        : time(t), direction(d), size(s), payload(real), dummy(real == 0) {}

    bool operator==(const TraceEvent&) const = default;
};

struct TraceRecord {
    std::string label;
    std::vector<TraceEvent> events;
    std::map<std::string, double> meta;  // capture_bytes, html_bytes, duration_seconds

    bool operator==(const TraceRecord&) const = default;

    // checks the type invariants; returns a description of the first violation
    std::optional<std::string> violation() const {
        if (events.empty()) return "empty event sequence";
        double prev = 0.0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const TraceEvent& e = events[i];
            if (e.time < 0.0) return "negative event time at index " + std::to_string(i);
            if (e.time < prev) return "events not sorted by time at index " + std::to_string(i);
            if (!e.dummy && e.size < 1) return "non-positive size at index " + std::to_string(i);
            prev = e.time;
        }
        auto it = meta.find("duration_seconds");
        if (it != meta.end() && it->second < events.back().time)
            return "duration_seconds shorter than last event time";
        return std::nullopt;
    }

    std::int64_t total_bytes() const {
        std::int64_t s = 0;
        for (const TraceEvent& e : events) s += e.size;
        return s;
    }

    std::int64_t total_payload_bytes() const {
        std::int64_t s = 0;
        for (const TraceEvent& e : events)
            if (!e.dummy) s += e.payload;
        return s;
    }
};

struct Dataset {
    std::vector<TraceRecord> records;
    std::map<std::string, int> class_index;  // label -> ordinal; background owns the last one

    int n_classes() const { return static_cast<int>(class_index.size()); }

    bool has_background() const { return class_index.count(kBackgroundLabel) != 0; }

    int background_ordinal() const {
        auto it = class_index.find(kBackgroundLabel);
        return it == class_index.end() ? -1 : it->second;
    }

    int ordinal_of(const std::string& label) const {
        auto it = class_index.find(label);
        if (it == class_index.end()) throw Error("unknown label: " + label);
        return it->second;
    }

    std::vector<int> ordinals() const {
        std::vector<int> out;
        out.reserve(records.size());
        for (const TraceRecord& r : records) out.push_back(ordinal_of(r.label));
        return out;
    }

    // class_index from first-appearance order, background forced to the last ordinal
    void rebuild_class_index() {
        class_index.clear();
        std::vector<std::string> order;
        bool background = false;
        for (const TraceRecord& r : records) {
            if (r.label == kBackgroundLabel) {
                background = true;
                continue;
            }
            if (std::find(order.begin(), order.end(), r.label) == order.end()) order.push_back(r.label);
        }
        for (std::size_t i = 0; i < order.size(); ++i) class_index[order[i]] = static_cast<int>(i);
        if (background) class_index[kBackgroundLabel] = static_cast<int>(order.size());
    }
};

// ---------------------------------------------------------------------------
// ingestion

// Wang-style per-instance cell file: one "time direction [size]" event per line.
inline TraceRecord ingest_cell_file(const std::string& path, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open cell file: " + path);
    TraceRecord rec;
    rec.label = label;
    std::string line;
    std::size_t lineno = 0;
    double prev_time = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        double t = 0.0, dir = 0.0;
        if (!(ls >> t)) {
            // blank line: ignore
            std::istringstream probe(line);
            std::string tok;
            if (!(probe >> tok)) continue;
            throw Error(path + ":" + std::to_string(lineno) + ": malformed time field");
        }
        if (!(ls >> dir)) throw Error(path + ":" + std::to_string(lineno) + ": missing direction field");
        if (dir != 1.0 && dir != -1.0)
            throw Error(path + ":" + std::to_string(lineno) + ": direction out of domain (want +1/-1)");
        long size = kTorCellBytes;
        if (ls >> size) {
            if (size < 1) throw Error(path + ":" + std::to_string(lineno) + ": non-positive size");
        }
        std::string trailing;
        if (ls >> trailing) throw Error(path + ":" + std::to_string(lineno) + ": trailing tokens");
        if (t < 0.0) throw Error(path + ":" + std::to_string(lineno) + ": negative time");
        if (t < prev_time) throw Error(path + ":" + std::to_string(lineno) + ": events not sorted by time");
        prev_time = t;
        rec.events.emplace_back(t, dir > 0 ? Direction::Outgoing : Direction::Incoming,
                                static_cast<int>(size));
    }
    if (rec.events.empty()) throw Error(path + ": empty trace");
    return rec;
}

// ---------------------------------------------------------------------------
// synthetic corpus

struct SyntheticConfig {
    int n_classes = 2;
    int n_instances = 10;      // per monitored class
    int n_background = 0;      // background instances, one random pattern each
    int trace_len_mean = 100;  // events per prototype, before perturbation
    double noise_rate = 0.0;   // per-event perturbation probability
};

namespace detail {

struct Prototype {
    std::vector<Direction> dirs;
    std::vector<double> gaps;  // inter-event gaps, gaps[0] measured from t=0
};

inline Prototype random_prototype(int len_mean, Rng& rng) {
    Prototype p;
    std::uniform_int_distribution<int> len_dist(static_cast<int>(len_mean * 0.8),
                                                static_cast<int>(len_mean * 1.2));
    int len = std::max(1, len_dist(rng));
    std::uniform_real_distribution<double> persist_dist(0.55, 0.9);
    std::uniform_real_distribution<double> gap_scale_dist(0.005, 0.05);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double persist = persist_dist(rng);
    double gap_scale = gap_scale_dist(rng);
    Direction cur = unit(rng) < 0.5 ? Direction::Outgoing : Direction::Incoming;
    p.dirs.reserve(static_cast<std::size_t>(len));
    p.gaps.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        p.dirs.push_back(cur);
        p.gaps.push_back(gap_scale * (0.5 + unit(rng)));
        if (unit(rng) >= persist)
            cur = (cur == Direction::Outgoing) ? Direction::Incoming : Direction::Outgoing;
    }
    return p;
}

// One instance from a prototype: each prototype event is kept, flipped, deleted
// or doubled with probability noise_rate. Returns the perturbation count so the
// noise calibration property can be checked directly.
inline TraceRecord perturb_prototype(const Prototype& proto, const std::string& label,
                                     double noise_rate, Rng& rng, long* n_perturbed = nullptr) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Direction> dirs;
    std::vector<double> gaps;
    long hits = 0;
    for (std::size_t i = 0; i < proto.dirs.size(); ++i) {
        Direction d = proto.dirs[i];
        double g = proto.gaps[i];
        if (noise_rate > 0.0 && unit(rng) < noise_rate) {
            ++hits;
            double kind = unit(rng);
            if (kind < 0.6) {  // flip
                dirs.push_back(d == Direction::Outgoing ? Direction::Incoming : Direction::Outgoing);
                gaps.push_back(g);
            } else if (kind < 0.8) {  // delete
            } else {  // insert a duplicate after
                dirs.push_back(d);
                gaps.push_back(g);
                dirs.push_back(d);
                gaps.push_back(g * 0.5);
            }
        } else {
            dirs.push_back(d);
            gaps.push_back(g);
        }
    }
    if (dirs.empty()) {  // deletion can empty a tiny trace; keep one event
        dirs.push_back(proto.dirs.front());
        gaps.push_back(proto.gaps.front());
    }
    TraceRecord rec;
    rec.label = label;
    double t = 0.0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        t += gaps[i];
        rec.events.emplace_back(t, dirs[i], kTorCellBytes);
    }
    rec.meta["duration_seconds"] = t;
    rec.meta["capture_bytes"] = static_cast<double>(rec.total_bytes());
    if (n_perturbed) *n_perturbed += hits;
    return rec;
}

}  // namespace detail

inline std::string synthetic_class_label(int c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "site-%03d", c);
    return buf;
}

inline Dataset generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    if (cfg.n_classes < 2) throw Error("generate_synthetic: n_classes must be >= 2");
    if (cfg.noise_rate < 0.0 || cfg.noise_rate >= 1.0)
        throw Error("generate_synthetic: noise_rate must lie in [0,1)");
    Rng proto_rng = make_rng(seed, 0);
    Rng noise_rng = make_rng(seed, 1);
    Rng bg_rng = make_rng(seed, 2);
    Dataset ds;
    for (int c = 0; c < cfg.n_classes; ++c) {
        detail::Prototype proto = detail::random_prototype(cfg.trace_len_mean, proto_rng);
        std::string label = synthetic_class_label(c);
        for (int i = 0; i < cfg.n_instances; ++i)
            ds.records.push_back(detail::perturb_prototype(proto, label, cfg.noise_rate, noise_rng));
    }
    for (int i = 0; i < cfg.n_background; ++i) {
        // one fresh pattern per background instance (one instance per site)
        detail::Prototype proto = detail::random_prototype(cfg.trace_len_mean, bg_rng);
        ds.records.push_back(
            detail::perturb_prototype(proto, kBackgroundLabel, cfg.noise_rate, bg_rng));
    }
    ds.rebuild_class_index();
    return ds;
}

// ---------------------------------------------------------------------------
// split plans

struct SplitIteration {
    std::vector<int> train;  // record indices
    std::vector<int> test;
};

struct SplitPlan {
    std::vector<SplitIteration> iterations;
    double ratio = 0.6;
    std::uint64_t seed = 0;
};

// Per iteration every monitored class contributes the same train/test counts;
// background instances are split by the same ratio at the instance level.
inline SplitPlan split_iterations(const Dataset& ds, double ratio = 0.6, int n_iters = 20,
                                  std::uint64_t seed = 0) {
    if (ratio <= 0.0 || ratio >= 1.0) throw Error("split_iterations: ratio must lie in (0,1)");
    if (n_iters < 1) throw Error("split_iterations: n_iters must be >= 1");

    std::map<std::string, std::vector<int>> by_class;
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        by_class[ds.records[i].label].push_back(static_cast<int>(i));

    std::size_t min_count = 0;
    bool first = true;
    for (const auto& [label, idx] : by_class) {
        if (label == kBackgroundLabel) continue;
        if (idx.size() < 2) throw Error("split_iterations: class '" + label + "' has fewer than 2 instances");
        if (first || idx.size() < min_count) min_count = idx.size();
        first = false;
    }
    if (first) throw Error("split_iterations: no monitored classes");

    const int per_class = static_cast<int>(min_count);
    const int n_train = static_cast<int>(std::llround(ratio * per_class));
    if (n_train < 1 || n_train >= per_class)
        throw Error("split_iterations: ratio leaves an empty train or test side");

    SplitPlan plan;
    plan.ratio = ratio;
    plan.seed = seed;
    Rng rng = make_rng(seed, 3);
    for (int it = 0; it < n_iters; ++it) {
        SplitIteration si;
        for (const auto& [label, idx] : by_class) {
            std::vector<int> shuffled = idx;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            if (label == kBackgroundLabel) {
                int bg_train = static_cast<int>(std::llround(ratio * shuffled.size()));
                for (std::size_t i = 0; i < shuffled.size(); ++i)
                    (static_cast<int>(i) < bg_train ? si.train : si.test).push_back(shuffled[i]);
            } else {
                for (int i = 0; i < per_class; ++i)
                    (i < n_train ? si.train : si.test).push_back(shuffled[static_cast<std::size_t>(i)]);
            }
        }
        plan.iterations.push_back(std::move(si));
    }
    return plan;
}

}  // namespace wfkit
