#pragma once

// Open/closed-world outcome accounting: confusion counts, TPR/FPR/BDR/WMacc,
// the confidence-threshold and top-k decision policies, class-weighted
// accuracy/MSE and per-site accuracy.

#include <map>
#include <string>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

enum class Outcome { TP, FP, TN, FN };

struct PredictionOutcome {
    int true_label = 0;
    std::vector<double> probs;
    int decided = 0;
    Outcome outcome = Outcome::TP;
};

// background_ordinal < 0 means closed world: every sample is monitored and a
// wrong decision is a false negative.
inline Outcome classify_outcome(int true_label, int decided, int background_ordinal) {
    bool true_bg = background_ordinal >= 0 && true_label == background_ordinal;
    bool decided_bg = background_ordinal >= 0 && decided == background_ordinal;
    if (true_bg) return decided_bg ? Outcome::TN : Outcome::FP;
    return decided == true_label ? Outcome::TP : Outcome::FN;  // other-monitored miss is FN
}

inline int argmax_label(const std::vector<double>& probs) {
    if (probs.empty()) throw Error("argmax_label: empty probability vector");
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

// Highest probability wins unless it falls below the threshold, in which case
// the sample is deemed "others" (the background label).
inline int decide_with_confidence(const std::vector<double>& probs, double threshold,
                                  int background_ordinal) {
    if (threshold < 0.0 || threshold >= 1.0) throw Error("decide_with_confidence: threshold outside [0,1)");
    int best = argmax_label(probs);
    if (threshold == 0.0) return best;
    if (background_ordinal < 0)
        throw Error("decide_with_confidence: positive threshold needs a background class");
    return probs[static_cast<std::size_t>(best)] >= threshold ? best : background_ordinal;
}

// Monitored sample: FN whenever background makes the top-k list, else TP iff
// the true label does. Background sample: judged by argmax only.
inline Outcome topk_outcome(const std::vector<double>& probs, int k, int true_label,
                            int background_ordinal) {
    const int n = static_cast<int>(probs.size());
    if (k < 1 || k > n) throw Error("topk_outcome: k outside [1, n_classes]");
    if (background_ordinal < 0) throw Error("topk_outcome: open world only");
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    });
    if (true_label == background_ordinal)
        return order.front() == background_ordinal ? Outcome::TN : Outcome::FP;
    bool bg_in_topk = false, true_in_topk = false;
    for (int i = 0; i < k; ++i) {
        if (order[static_cast<std::size_t>(i)] == background_ordinal) bg_in_topk = true;
        if (order[static_cast<std::size_t>(i)] == true_label) true_in_topk = true;
    }
    if (bg_in_topk) return Outcome::FN;  // unmonitored in the list always defeats a monitored truth
    return true_in_topk ? Outcome::TP : Outcome::FN;
}

struct ConfusionCounts {
    long tp = 0, fp = 0, tn = 0, fn = 0;

    long total() const { return tp + fp + tn + fn; }
    long monitored() const { return tp + fn; }
    long background() const { return fp + tn; }
    double tpr() const { return monitored() > 0 ? static_cast<double>(tp) / monitored() : 0.0; }
    double fpr() const { return background() > 0 ? static_cast<double>(fp) / background() : 0.0; }

    void add(Outcome o) {
        switch (o) {
            case Outcome::TP: ++tp; break;
            case Outcome::FP: ++fp; break;
            case Outcome::TN: ++tn; break;
            case Outcome::FN: ++fn; break;
        }
    }
};

inline ConfusionCounts tally(const std::vector<PredictionOutcome>& outcomes) {
    ConfusionCounts c;
    for (const PredictionOutcome& p : outcomes) c.add(p.outcome);
    return c;
}

// Bayesian detection rate: P(monitored | flagged).
inline double bdr(double tpr, double fpr, long n_monitored, long n_background) {
    if (n_monitored <= 0 || n_background <= 0) throw Error("bdr: counts must be > 0");
    double pm = static_cast<double>(n_monitored) / static_cast<double>(n_monitored + n_background);
    double num = tpr * pm;
    if (num == 0.0) return 0.0;
    return num / (num + fpr * (1.0 - pm));
}

inline double wmacc(const ConfusionCounts& c) {
    if (c.monitored() == 0) throw Error("wmacc: no monitored samples");
    return static_cast<double>(c.tp) / static_cast<double>(c.monitored());
}

struct WeightedMetrics {
    double accuracy = 0.0;
    double mse = 0.0;
};

// w_i = weight of instance i's true class; accuracy = (1/N) Σ w_i 1(y==y'),
// mse = (1/N) Σ w_i (y-y')².
inline WeightedMetrics weighted_metrics(const std::vector<int>& predicted,
                                        const std::vector<int>& truth,
                                        const std::vector<double>& class_weights) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw Error("weighted_metrics: bad prediction/label lists");
    WeightedMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        int y = truth[i];
        if (y < 0 || y >= static_cast<int>(class_weights.size()))
            throw Error("weighted_metrics: label without a class weight");
        double w = class_weights[static_cast<std::size_t>(y)];
        if (w <= 0.0) throw Error("weighted_metrics: non-positive class weight");
        double diff = static_cast<double>(predicted[i] - y);
        m.accuracy += w * (predicted[i] == y ? 1.0 : 0.0);
        m.mse += w * diff * diff;
    }
    m.accuracy /= static_cast<double>(truth.size());
    m.mse /= static_cast<double>(truth.size());
    return m;
}

// Per site, TP / test-instance count, pooled over all supplied outcomes.
inline std::map<std::string, double> site_accuracy(
    const std::vector<std::pair<std::string, Outcome>>& site_outcomes) {
    std::map<std::string, std::pair<long, long>> agg;  // site -> (tp, total)
    for (const auto& [site, o] : site_outcomes) {
        auto& [tp, total] = agg[site];
        tp += o == Outcome::TP ? 1 : 0;
        ++total;
    }
    std::map<std::string, double> out;
    for (const auto& [site, counts] : agg)
        out[site] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return out;
}

}  // namespace wfkit
