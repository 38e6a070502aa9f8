#pragma once

// Fixed-dimension feature pipelines over traces: cell direction sequences,
// the largest incoming burst (RESP), and the TLS-level variants.

#include <string>
#include <vector>

#include "wfkit/trace.hpp"

namespace wfkit {

enum class Pipeline {
    CellDirection,
    Resp,
    TlsRecordSize,
    TlsDirection,
    PacketTiming,
    AeEncoded,
    HtmlRank,
};

inline const char* pipeline_name(Pipeline p) {
    switch (p) {
        case Pipeline::CellDirection: return "cell_direction";
        case Pipeline::Resp: return "resp";
        case Pipeline::TlsRecordSize: return "tls_record_size";
        case Pipeline::TlsDirection: return "tls_direction";
        case Pipeline::PacketTiming: return "packet_timing";
        case Pipeline::AeEncoded: return "ae_encoded";
        case Pipeline::HtmlRank: return "html_rank";
    }
    return "?";
}

inline Pipeline pipeline_from_name(const std::string& s) {
    for (Pipeline p : {Pipeline::CellDirection, Pipeline::Resp, Pipeline::TlsRecordSize,
                       Pipeline::TlsDirection, Pipeline::PacketTiming, Pipeline::AeEncoded,
                       Pipeline::HtmlRank})
        if (s == pipeline_name(p)) return p;
    throw Error("unknown feature pipeline: " + s);
}

struct FeatureVector {
    std::vector<double> values;
    Pipeline pipeline = Pipeline::CellDirection;

    int dim() const { return static_cast<int>(values.size()); }
};

namespace detail {

// pad with zeros / truncate the tail so the output is exactly dim long
inline std::vector<double> fit_dim(std::vector<double> v, int dim) {
    v.resize(static_cast<std::size_t>(dim), 0.0);
    return v;
}

}  // namespace detail

inline FeatureVector cell_direction_features(const TraceRecord& trace, int dim) {
    if (dim < 1) throw Error("cell_direction_features: dim must be >= 1");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(dim));
    for (const TraceEvent& e : trace.events) {
        if (static_cast<int>(v.size()) == dim) break;
        v.push_back(static_cast<double>(static_cast<int>(e.direction)));
    }
    return {detail::fit_dim(std::move(v), dim), Pipeline::CellDirection};
}

// Largest incoming burst by total bytes; a burst is a maximal contiguous run of
// incoming events, cut by any outgoing event. Earliest burst wins ties.
inline FeatureVector resp_features(const TraceRecord& trace, int dim) {
    if (dim < 1) throw Error("resp_features: dim must be >= 1");
    std::vector<double> best, cur;
    std::int64_t best_bytes = -1, cur_bytes = 0;
    auto flush = [&] {
        if (!cur.empty() && cur_bytes > best_bytes) {
            best = cur;
            best_bytes = cur_bytes;
        }
        cur.clear();
        cur_bytes = 0;
    };
    for (const TraceEvent& e : trace.events) {
        if (e.direction == Direction::Incoming) {
            cur.push_back(static_cast<double>(e.size));
            cur_bytes += e.size;
        } else {
            flush();
        }
    }
    flush();
    if (best_bytes < 0) throw Error("resp_features: trace has no incoming events");
    return {detail::fit_dim(std::move(best), dim), Pipeline::Resp};
}

enum class TlsVariant { RecordSize, Direction, InterPacketTime };

inline FeatureVector tls_features(const TraceRecord& trace, int dim, TlsVariant variant) {
    if (dim < 1) throw Error("tls_features: dim must be >= 1");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(dim));
    double prev_time = 0.0;
    Pipeline pipe = Pipeline::TlsRecordSize;
    for (const TraceEvent& e : trace.events) {
        if (static_cast<int>(v.size()) == dim) break;
        switch (variant) {
            case TlsVariant::RecordSize:
                v.push_back(static_cast<double>(static_cast<int>(e.direction)) * e.size);
                break;
            case TlsVariant::Direction:
                v.push_back(static_cast<double>(static_cast<int>(e.direction)));
                break;
            case TlsVariant::InterPacketTime:
                v.push_back(e.time - prev_time);
                prev_time = e.time;
                break;
        }
    }
    switch (variant) {
        case TlsVariant::RecordSize: pipe = Pipeline::TlsRecordSize; break;
        case TlsVariant::Direction: pipe = Pipeline::TlsDirection; break;
        case TlsVariant::InterPacketTime: pipe = Pipeline::PacketTiming; break;
    }
    return {detail::fit_dim(std::move(v), dim), pipe};
}

inline FeatureVector extract_features(const TraceRecord& trace, Pipeline p, int dim) {
    switch (p) {
        case Pipeline::CellDirection: return cell_direction_features(trace, dim);
        case Pipeline::Resp: return resp_features(trace, dim);
        case Pipeline::TlsRecordSize: return tls_features(trace, dim, TlsVariant::RecordSize);
        case Pipeline::TlsDirection: return tls_features(trace, dim, TlsVariant::Direction);
        case Pipeline::PacketTiming: return tls_features(trace, dim, TlsVariant::InterPacketTime);
        default: throw Error("extract_features: pipeline is not trace-derived");
    }
}

inline std::vector<std::vector<double>> feature_matrix(const Dataset& ds, Pipeline p, int dim) {
    std::vector<std::vector<double>> m;
    m.reserve(ds.records.size());
    for (const TraceRecord& r : ds.records) m.push_back(extract_features(r, p, dim).values);
    return m;
}

}  // namespace wfkit
