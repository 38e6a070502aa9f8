#pragma once

// Experiment orchestration: per-iteration train/evaluate over a split plan,
// open- and closed-world accounting, aggregation across iterations, and
// post-hoc threshold sweeps over recorded predictions.

#include <atomic>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "wfkit/features.hpp"
#include "wfkit/metrics.hpp"
#include "wfkit/neural.hpp"
#include "wfkit/trace.hpp"

namespace wfkit {

enum class ModelKind { Mlp, Cnn };
enum class ClassMode { Multiclass, Binary };

struct DecisionPolicy {
    double threshold = 0.0;  // confidence threshold; 0 = argmax
    int top_k = 0;           // >0 switches to the top-k rule
};

struct ExperimentConfig {
    Pipeline pipeline = Pipeline::CellDirection;
    int dim = 784;
    ModelKind model = ModelKind::Mlp;
    ClassMode class_mode = ClassMode::Multiclass;
    std::vector<int> mlp_hidden = {650, 650};
    double l2 = 1e-4;
    double keep_prob = 0.8;
    int cnn_filters = 32;
    int cnn_filter_width = 3;
    int cnn_pool_width = 2;
    int cnn_hidden = 256;
    TrainConfig train;
    DecisionPolicy policy;
    int jobs = 1;
};

struct IterationResult {
    ConfusionCounts counts;
    double accuracy = 0.0;                       // decided == true over the test set
    std::vector<int> test_indices;               // dataset record index per prediction
    std::vector<PredictionOutcome> predictions;  // aligned with test_indices
};

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentReport {
    std::vector<IterationResult> iterations;
    bool open_world = false;
    int background_ordinal = -1;  // ordinal in the evaluation label space
    int n_classes = 0;
    Summary accuracy, tpr, fpr, bdr_summary, wmacc_summary;
};

namespace detail {

inline Summary summarize(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    return {mean_of(xs), stddev_of(xs)};
}

}  // namespace detail

// Labels in the evaluation space: multiclass keeps the dataset ordinals;
// binary collapses every monitored site onto ordinal 0 with background at 1.
inline std::vector<int> evaluation_labels(const Dataset& ds, ClassMode mode) {
    std::vector<int> y = ds.ordinals();
    if (mode == ClassMode::Multiclass) return y;
    if (!ds.has_background())
        throw Error("evaluation_labels: binary mode needs a background class");
    int bg = ds.background_ordinal();
    for (int& v : y) v = v == bg ? 1 : 0;
    return y;
}

inline int evaluation_n_classes(const Dataset& ds, ClassMode mode) {
    return mode == ClassMode::Binary ? 2 : ds.n_classes();
}

inline int evaluation_background(const Dataset& ds, ClassMode mode) {
    if (!ds.has_background()) return -1;
    return mode == ClassMode::Binary ? 1 : ds.background_ordinal();
}

inline ExperimentReport run_experiment(const Dataset& ds, const SplitPlan& plan,
                                       const ExperimentConfig& cfg) {
    if (plan.iterations.empty()) throw Error("run_experiment: empty split plan");
    const std::vector<std::vector<double>> X = feature_matrix(ds, cfg.pipeline, cfg.dim);
    const std::vector<int> y = evaluation_labels(ds, cfg.class_mode);
    const int n_classes = evaluation_n_classes(ds, cfg.class_mode);
    const int bg = evaluation_background(ds, cfg.class_mode);

    ExperimentReport report;
    report.open_world = bg >= 0;
    report.background_ordinal = bg;
    report.n_classes = n_classes;
    report.iterations.resize(plan.iterations.size());

    auto run_one = [&](std::size_t it) {
        const SplitIteration& si = plan.iterations[it];
        std::vector<std::vector<double>> train_X;
        std::vector<int> train_y;
        train_X.reserve(si.train.size());
        for (int idx : si.train) {
            train_X.push_back(X[static_cast<std::size_t>(idx)]);
            train_y.push_back(y[static_cast<std::size_t>(idx)]);
        }
        std::uint64_t iter_seed = mix_seed(cfg.train.seed, static_cast<std::uint64_t>(it));
        NeuralModel model =
            cfg.model == ModelKind::Mlp
                ? build_mlp(cfg.dim, n_classes, cfg.mlp_hidden, Activation::Tanh, cfg.l2,
                            cfg.keep_prob, iter_seed)
                : build_cnn(cfg.dim, n_classes, cfg.cnn_filters, cfg.cnn_filter_width,
                            cfg.cnn_pool_width, cfg.cnn_hidden, Activation::Tanh, cfg.l2,
                            iter_seed);
        TrainConfig tc = cfg.train;
        tc.seed = iter_seed;
        tc.batch_size = std::min(tc.batch_size, static_cast<int>(train_X.size()));
        train_classifier(model, train_X, train_y, tc);

        IterationResult res;
        long correct = 0;
        for (int idx : si.test) {
            PredictionOutcome po;
            po.true_label = y[static_cast<std::size_t>(idx)];
            po.probs = predict_proba(model, X[static_cast<std::size_t>(idx)]);
            if (cfg.policy.top_k > 0) {
                po.decided = argmax_label(po.probs);
                po.outcome = topk_outcome(po.probs, cfg.policy.top_k, po.true_label, bg);
            } else {
                po.decided = decide_with_confidence(po.probs, cfg.policy.threshold, bg);
                po.outcome = classify_outcome(po.true_label, po.decided, bg);
            }
            correct += po.decided == po.true_label ? 1 : 0;
            res.counts.add(po.outcome);
            res.test_indices.push_back(idx);
            res.predictions.push_back(std::move(po));
        }
        res.accuracy = si.test.empty() ? 0.0 : static_cast<double>(correct) / si.test.size();
        report.iterations[it] = std::move(res);
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || plan.iterations.size() == 1) {
        for (std::size_t it = 0; it < plan.iterations.size(); ++it) run_one(it);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        int n_workers = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(jobs), plan.iterations.size()));
        for (int w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (std::size_t it = next.fetch_add(1); it < plan.iterations.size();
                     it = next.fetch_add(1))
                    run_one(it);
            });
        for (std::thread& t : workers) t.join();
    }

    std::vector<double> accs, tprs, fprs, bdrs, wmaccs;
    for (const IterationResult& r : report.iterations) {
        accs.push_back(r.accuracy);
        if (r.counts.monitored() > 0) wmaccs.push_back(wmacc(r.counts));
        if (report.open_world) {
            tprs.push_back(r.counts.tpr());
            fprs.push_back(r.counts.fpr());
            if (r.counts.monitored() > 0 && r.counts.background() > 0)
                bdrs.push_back(bdr(r.counts.tpr(), r.counts.fpr(), r.counts.monitored(),
                                   r.counts.background()));
        }
    }
    report.accuracy = detail::summarize(accs);
    report.tpr = detail::summarize(tprs);
    report.fpr = detail::summarize(fprs);
    report.bdr_summary = detail::summarize(bdrs);
    report.wmacc_summary = detail::summarize(wmaccs);
    return report;
}

// Re-decide recorded predictions at a new confidence threshold (no retraining)
// and pool the confusion counts across iterations.
inline ConfusionCounts redecide_at_threshold(const ExperimentReport& report, double threshold) {
    if (!report.open_world) throw Error("redecide_at_threshold: closed-world report");
    ConfusionCounts c;
    for (const IterationResult& r : report.iterations)
        for (const PredictionOutcome& po : r.predictions) {
            int decided = decide_with_confidence(po.probs, threshold, report.background_ordinal);
            c.add(classify_outcome(po.true_label, decided, report.background_ordinal));
        }
    return c;
}

// Pooled per-site accuracy over all iterations; sites are dataset labels.
inline std::map<std::string, double> site_accuracy_from_report(const Dataset& ds,
                                                               const ExperimentReport& report) {
    std::vector<std::pair<std::string, Outcome>> rows;
    for (const IterationResult& r : report.iterations)
        for (std::size_t i = 0; i < r.predictions.size(); ++i)
            rows.emplace_back(ds.records[static_cast<std::size_t>(r.test_indices[i])].label,
                              r.predictions[i].outcome);
    return site_accuracy(rows);
}

}  // namespace wfkit
