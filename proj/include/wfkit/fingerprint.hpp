#pragma once

// Fingerprintability prediction: label page instances by whether their site
// exceeds an accuracy threshold, then train a small MLP on (rank-transformed)
// document features and score it with class-weighted metrics.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfkit/common.hpp"
#include "wfkit/experiment.hpp"
#include "wfkit/html_features.hpp"
#include "wfkit/metrics.hpp"
#include "wfkit/neural.hpp"

namespace wfkit {

struct StratifiedSplit {
    std::vector<int> train, test;
};

// Per-label-class ratio split (labels need not be balanced); each class keeps
// at least one instance on each side.
inline std::vector<StratifiedSplit> stratified_splits(const std::vector<int>& labels,
                                                      double ratio, int n_iters,
                                                      std::uint64_t seed) {
    if (ratio <= 0.0 || ratio >= 1.0) throw Error("stratified_splits: ratio must lie in (0,1)");
    if (n_iters < 1) throw Error("stratified_splits: n_iters must be >= 1");
    if (labels.empty()) throw Error("stratified_splits: no instances");
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    for (const auto& [c, idx] : by_class)
        if (idx.size() < 2)
            throw Error("stratified_splits: class " + std::to_string(c) +
                        " has fewer than 2 instances");

    Rng rng = make_rng(seed, 3);
    std::vector<StratifiedSplit> out;
    for (int it = 0; it < n_iters; ++it) {
        StratifiedSplit s;
        for (const auto& [c, idx] : by_class) {
            std::vector<int> pool = idx;
            std::shuffle(pool.begin(), pool.end(), rng);
            long n_train = std::llround(ratio * static_cast<double>(pool.size()));
            if (n_train < 1) n_train = 1;
            if (n_train > static_cast<long>(pool.size()) - 1)
                n_train = static_cast<long>(pool.size()) - 1;
            for (std::size_t i = 0; i < pool.size(); ++i)
                (static_cast<long>(i) < n_train ? s.train : s.test).push_back(pool[i]);
        }
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.test.begin(), s.test.end());
        out.push_back(std::move(s));
    }
    return out;
}

struct FpConfig {
    double ratio = 0.6;
    int n_iters = 10;
    std::vector<int> hidden = {64, 64};
    double l2 = 1e-4;
    double keep_prob = 1.0;
    TrainConfig train;
};

struct FpReport {
    double threshold = 0.5;
    long n_fingerprintable = 0;
    long n_rest = 0;
    double weight0 = 1.0, weight1 = 1.0;
    Summary weighted_accuracy, weighted_mse;
};

inline FpReport run_fp_experiment(const std::vector<std::vector<double>>& X,
                                  const std::vector<std::string>& sites,
                                  const std::map<std::string, double>& site_acc,
                                  double threshold, const FpConfig& cfg) {
    if (X.size() != sites.size() || X.empty())
        throw Error("run_fp_experiment: feature rows and site list disagree");
    const FpLabeling lab = fp_labels(site_acc, sites, threshold);
    const std::vector<double> class_weights = {lab.weight0, lab.weight1};

    FpReport rep;
    rep.threshold = threshold;
    for (int l : lab.labels) (l == 1 ? rep.n_fingerprintable : rep.n_rest) += 1;
    rep.weight0 = lab.weight0;
    rep.weight1 = lab.weight1;

    const int dim = static_cast<int>(X.front().size());
    const auto splits = stratified_splits(lab.labels, cfg.ratio, cfg.n_iters, cfg.train.seed);

    std::vector<double> accs, mses;
    for (std::size_t it = 0; it < splits.size(); ++it) {
        const std::uint64_t iter_seed = mix_seed(cfg.train.seed, static_cast<std::uint64_t>(it));
        NeuralModel m = build_mlp(dim, 2, cfg.hidden, Activation::Tanh, cfg.l2, cfg.keep_prob,
                                  iter_seed);
        TrainConfig tc = cfg.train;
        tc.seed = iter_seed;
        std::vector<std::vector<double>> Xtr;
        std::vector<int> ytr;
        for (int i : splits[it].train) {
            Xtr.push_back(X[static_cast<std::size_t>(i)]);
            ytr.push_back(lab.labels[static_cast<std::size_t>(i)]);
        }
        if (tc.batch_size > static_cast<int>(Xtr.size()))
            tc.batch_size = static_cast<int>(Xtr.size());
        train_classifier(m, Xtr, ytr, tc);

        std::vector<int> pred, truth;
        for (int i : splits[it].test) {
            pred.push_back(predict_class(m, X[static_cast<std::size_t>(i)]));
            truth.push_back(lab.labels[static_cast<std::size_t>(i)]);
        }
        WeightedMetrics wm = weighted_metrics(pred, truth, class_weights);
        accs.push_back(wm.accuracy);
        mses.push_back(wm.mse);
    }
    rep.weighted_accuracy = {mean_of(accs), stddev_of(accs)};
    rep.weighted_mse = {mean_of(mses), stddev_of(mses)};
    return rep;
}

}  // namespace wfkit
