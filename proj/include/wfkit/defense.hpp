#pragma once

// Trace-level padding defenses: BuFLO (one interval, minimum duration) and
// Tamaraw (per-direction intervals, tail padding to a multiple of L), plus
// bandwidth overhead accounting. Pure deterministic per-trace transforms.

#include <string>
#include <vector>

#include "wfkit/trace.hpp"

namespace wfkit {

struct BufloParams {
    int packet_size = 512;      // bytes per output event
    double interval = 0.02;     // seconds between same-direction events
    double min_duration = 10.0; // keep transmitting until at least this time
};

struct TamarawParams {
    double rho_out = 0.04;  // outgoing interval, seconds
    double rho_in = 0.012;  // incoming interval, seconds
    long pad_multiple = 100;
    int packet_size = 512;
};

namespace detail {

// Fixed-interval schedule for one direction: slot k fires at k*interval and
// carries up to packet_size bytes of whatever real payload has arrived by
// then. Slots continue while time < min_duration (when set) or real bytes
// remain unsent; afterwards the event count is padded up to a multiple of
// pad_multiple with dummies.
inline std::vector<TraceEvent> fixed_schedule(const std::vector<std::pair<double, int>>& arrivals,
                                              Direction dir, int packet_size, double interval,
                                              double min_duration, long pad_multiple) {
    std::int64_t total = 0;
    for (const auto& [t, bytes] : arrivals) total += bytes;
    std::vector<TraceEvent> out;
    std::int64_t consumed = 0, available = 0;
    std::size_t next_arrival = 0;
    for (long k = 0;; ++k) {
        double t = static_cast<double>(k) * interval;
        bool want_duration = min_duration > 0.0 && t < min_duration;
        if (!want_duration && consumed >= total) break;
        while (next_arrival < arrivals.size() && arrivals[next_arrival].first <= t)
            available += arrivals[next_arrival++].second;
        int take = static_cast<int>(std::min<std::int64_t>(packet_size, available - consumed));
        consumed += take;
        out.emplace_back(t, dir, packet_size, take);
    }
    if (pad_multiple > 1) {
        long k = static_cast<long>(out.size());
        while (static_cast<long>(out.size()) % pad_multiple != 0) {
            out.emplace_back(static_cast<double>(k) * interval, dir, packet_size, 0);
            ++k;
        }
    }
    return out;
}

inline std::vector<std::pair<double, int>> direction_arrivals(const TraceRecord& trace,
                                                              Direction dir) {
    std::vector<std::pair<double, int>> a;
    for (const TraceEvent& e : trace.events)
        if (e.direction == dir && !e.dummy && e.payload > 0) a.emplace_back(e.time, e.payload);
    return a;
}

inline TraceRecord merge_directions(const TraceRecord& original, std::vector<TraceEvent> out_ev,
                                    std::vector<TraceEvent> in_ev) {
    TraceRecord rec;
    rec.label = original.label;
    rec.events.reserve(out_ev.size() + in_ev.size());
    std::size_t i = 0, j = 0;
    while (i < out_ev.size() || j < in_ev.size()) {
        bool take_out = j >= in_ev.size() ||
                        (i < out_ev.size() && out_ev[i].time <= in_ev[j].time);
        rec.events.push_back(take_out ? out_ev[i++] : in_ev[j++]);
    }
    if (!rec.events.empty()) {
        rec.meta["duration_seconds"] = rec.events.back().time;
        rec.meta["capture_bytes"] = static_cast<double>(rec.total_bytes());
    }
    return rec;
}

}  // namespace detail

inline TraceRecord apply_buflo(const TraceRecord& trace, const BufloParams& p) {
    if (p.packet_size < 1) throw Error("apply_buflo: packet_size must be >= 1");
    if (p.interval <= 0.0) throw Error("apply_buflo: interval must be > 0");
    if (p.min_duration <= 0.0) throw Error("apply_buflo: min_duration must be > 0");
    auto out_ev = detail::fixed_schedule(detail::direction_arrivals(trace, Direction::Outgoing),
                                         Direction::Outgoing, p.packet_size, p.interval,
                                         p.min_duration, 1);
    auto in_ev = detail::fixed_schedule(detail::direction_arrivals(trace, Direction::Incoming),
                                        Direction::Incoming, p.packet_size, p.interval,
                                        p.min_duration, 1);
    return detail::merge_directions(trace, std::move(out_ev), std::move(in_ev));
}

inline TraceRecord apply_tamaraw(const TraceRecord& trace, const TamarawParams& p,
                                 std::vector<std::string>* warnings = nullptr) {
    if (p.packet_size < 1) throw Error("apply_tamaraw: packet_size must be >= 1");
    if (p.rho_out <= 0.0 || p.rho_in <= 0.0) throw Error("apply_tamaraw: intervals must be > 0");
    if (p.pad_multiple < 1) throw Error("apply_tamaraw: pad_multiple must be >= 1");
    if (warnings && p.rho_out < p.rho_in)
        warnings->push_back("tamaraw: rho_out < rho_in (outgoing is usually the slower direction)");
    auto out_ev = detail::fixed_schedule(detail::direction_arrivals(trace, Direction::Outgoing),
                                         Direction::Outgoing, p.packet_size, p.rho_out, 0.0,
                                         p.pad_multiple);
    auto in_ev = detail::fixed_schedule(detail::direction_arrivals(trace, Direction::Incoming),
                                        Direction::Incoming, p.packet_size, p.rho_in, 0.0,
                                        p.pad_multiple);
    return detail::merge_directions(trace, std::move(out_ev), std::move(in_ev));
}

inline double bandwidth_overhead(const TraceRecord& original, const TraceRecord& defended) {
    std::int64_t orig = original.total_bytes();
    if (orig <= 0) throw Error("bandwidth_overhead: original trace carries no bytes");
    std::int64_t def = defended.total_bytes();
    return 100.0 * static_cast<double>(def - orig) / static_cast<double>(orig);
}

struct OverheadReport {
    std::vector<double> per_instance;  // percent, aligned with dataset records
    double mean = 0.0;
};

template <typename DefenseFn>
inline std::pair<Dataset, OverheadReport> defend_dataset(const Dataset& ds, DefenseFn&& defense) {
    Dataset out;
    out.class_index = ds.class_index;
    OverheadReport report;
    for (const TraceRecord& rec : ds.records) {
        TraceRecord defended = defense(rec);
        report.per_instance.push_back(bandwidth_overhead(rec, defended));
        out.records.push_back(std::move(defended));
    }
    report.mean = report.per_instance.empty() ? 0.0 : mean_of(report.per_instance);
    return {std::move(out), std::move(report)};
}

}  // namespace wfkit
