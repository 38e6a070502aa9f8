#pragma once

// Layer-wise relevance propagation (w²-rule) over dense networks, plus
// cross-run aggregation and grouping of relevance by direction value.

#include <string>
#include <vector>

#include "wfkit/neural.hpp"

namespace wfkit {

struct RelevanceVector {
    std::vector<double> scores;  // one per model input feature
    int target = 0;              // class ordinal whose logit was decomposed
    std::vector<std::string> warnings;
};

// Backward redistribution R_i = Σ_j w_ij² / Σ_i' w_i'j² · R_j, seeded with the
// pre-softmax score of the target class; pass target_class=-1 to use the
// predicted class. Dense stacks only.
inline RelevanceVector lrp_w2(const NeuralModel& model, const std::vector<double>& input,
                              int target_class = -1) {
    if (model.layers.empty() || model.layers.back().spec.kind != LayerKind::SoftmaxOutput)
        throw Error("lrp_w2: model has no softmax output layer");
    for (const Layer& L : model.layers)
        if (L.spec.kind == LayerKind::Conv1D || L.spec.kind == LayerKind::MaxPool1D)
            throw Error("lrp_w2: unsupported architecture (conv/pool layers present)");

    std::vector<double> z = logits(model, input);
    if (target_class == -1) {
        std::vector<double> p = detail::forward_sample(model, input, nullptr, nullptr);
        target_class = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    if (target_class < 0 || target_class >= model.output_dim)
        throw Error("lrp_w2: target class out of range");

    RelevanceVector rv;
    rv.target = target_class;
    std::vector<double> rel(static_cast<std::size_t>(model.output_dim), 0.0);
    rel[static_cast<std::size_t>(target_class)] = z[static_cast<std::size_t>(target_class)];

    for (int li = static_cast<int>(model.layers.size()) - 1; li >= 0; --li) {
        const Layer& L = model.layers[static_cast<std::size_t>(li)];
        if (L.spec.kind == LayerKind::Dropout) continue;  // identity at inference
        const int out_n = L.spec.units, in_n = L.flat_in();
        std::vector<double> prev(static_cast<std::size_t>(in_n), 0.0);
        for (int j = 0; j < out_n; ++j) {
            double rj = rel[static_cast<std::size_t>(j)];
            if (rj == 0.0) continue;
            const double* wj = L.w.data() + static_cast<std::size_t>(j) * in_n;
            double denom = 0.0;
            for (int i = 0; i < in_n; ++i) denom += wj[i] * wj[i];
            if (denom == 0.0) {
                rv.warnings.push_back("layer " + std::to_string(li) + " unit " + std::to_string(j) +
                                      " has all-zero incoming weights; its relevance was dropped");
                continue;
            }
            for (int i = 0; i < in_n; ++i) prev[static_cast<std::size_t>(i)] += wj[i] * wj[i] / denom * rj;
        }
        rel = std::move(prev);
    }
    rv.scores = std::move(rel);
    return rv;
}

struct AggregatedRelevance {
    std::vector<double> summed;   // elementwise sum across runs
    std::vector<int> ranking;     // feature indices, highest summed score first
};

inline AggregatedRelevance aggregate_relevance(const std::vector<RelevanceVector>& runs) {
    if (runs.empty()) throw Error("aggregate_relevance: no runs");
    const std::size_t dim = runs.front().scores.size();
    AggregatedRelevance agg;
    agg.summed.assign(dim, 0.0);
    for (const RelevanceVector& rv : runs) {
        if (rv.scores.size() != dim) throw Error("aggregate_relevance: input_dim mismatch between runs");
        for (std::size_t i = 0; i < dim; ++i) agg.summed[i] += rv.scores[i];
    }
    agg.ranking.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) agg.ranking[i] = static_cast<int>(i);
    std::stable_sort(agg.ranking.begin(), agg.ranking.end(),
                     [&](int a, int b) { return agg.summed[static_cast<std::size_t>(a)] >
                                                agg.summed[static_cast<std::size_t>(b)]; });
    return agg;
}

struct DirectionGroup {
    int value = 0;  // -1, 0 or +1
    std::vector<double> scores;
    double mean = 0.0;
    double stddev = 0.0;
};

// Partition per-feature relevance by the underlying direction value.
inline std::vector<DirectionGroup> relevance_by_direction(const std::vector<double>& relevances,
                                                          const FeatureVector& features) {
    if (features.pipeline != Pipeline::CellDirection && features.pipeline != Pipeline::TlsDirection)
        throw Error("relevance_by_direction: features are not a direction pipeline");
    if (relevances.size() != features.values.size())
        throw Error("relevance_by_direction: length mismatch");
    std::vector<DirectionGroup> groups;
    for (int value : {-1, 0, +1}) {
        DirectionGroup g;
        g.value = value;
        for (std::size_t i = 0; i < features.values.size(); ++i)
            if (static_cast<int>(features.values[i]) == value) g.scores.push_back(relevances[i]);
        if (g.scores.empty()) continue;
        g.mean = mean_of(g.scores);
        g.stddev = stddev_of(g.scores);
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace wfkit
