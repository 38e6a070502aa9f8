#pragma once

// Random forest of CART trees (Gini splits, bootstrap sampling, sqrt-d feature
// candidates), Gini importance, and the leaf-vector / Hamming-distance
// classification scheme built on top of the forest.

#include <cmath>
#include <cstdint>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    std::vector<int> counts;  // class histogram of the training samples here
    int leaf_id = -1;
    int n_samples = 0;
    double impurity = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int n_leaves = 0;
};

struct DecisionForest {
    std::vector<DecisionTree> trees;
    int n_classes = 0;
    int n_features = 0;
    int max_depth = 0;  // 0 = grow to purity
    std::uint64_t seed = 0;
};

namespace detail {

inline double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
        double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& X;
    const std::vector<int>& y;
    int n_classes;
    int n_candidates;
    int max_depth;
    Rng& rng;
    DecisionTree tree;

    std::vector<int> count_classes(const std::vector<int>& idx) const {
        std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
        for (int i : idx) ++counts[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
        return counts;
    }

    // sample n_candidates distinct features, in draw order
    std::vector<int> draw_candidates() {
        int d = static_cast<int>(X.front().size());
        std::vector<int> all(static_cast<std::size_t>(d));
        for (int f = 0; f < d; ++f) all[static_cast<std::size_t>(f)] = f;
        for (int i = 0; i < n_candidates; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        all.resize(static_cast<std::size_t>(n_candidates));
        return all;
    }

    int build(std::vector<int> idx, int depth) {
        TreeNode node;
        node.counts = count_classes(idx);
        node.n_samples = static_cast<int>(idx.size());
        node.impurity = gini(node.counts, node.n_samples);
        int me = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);

        bool pure = node.impurity == 0.0;
        bool depth_capped = max_depth > 0 && depth >= max_depth;
        if (pure || depth_capped || node.n_samples < 2) {
            tree.nodes[static_cast<std::size_t>(me)].leaf_id = tree.n_leaves++;
            return me;
        }

        // best Gini split over the sampled candidate features
        int best_f = -1;
        double best_thr = 0.0, best_decrease = 0.0;
        std::vector<int> candidates = draw_candidates();
        std::vector<std::pair<double, int>> vals;
        for (int f : candidates) {
            vals.clear();
            for (int i : idx)
                vals.emplace_back(X[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)],
                                  y[static_cast<std::size_t>(i)]);
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;
            std::vector<int> left_counts(static_cast<std::size_t>(n_classes), 0);
            int n_left = 0, n_total = node.n_samples;
            for (std::size_t s = 0; s + 1 < vals.size(); ++s) {
                ++left_counts[static_cast<std::size_t>(vals[s].second)];
                ++n_left;
                if (vals[s].first == vals[s + 1].first) continue;
                std::vector<int> right_counts = node.counts;
                for (int c = 0; c < n_classes; ++c)
                    right_counts[static_cast<std::size_t>(c)] -= left_counts[static_cast<std::size_t>(c)];
                int n_right = n_total - n_left;
                double child =
                    (n_left * gini(left_counts, n_left) + n_right * gini(right_counts, n_right)) /
                    n_total;
                double decrease = node.impurity - child;
                if (decrease > best_decrease) {
                    best_decrease = decrease;
                    best_f = f;
                    best_thr = 0.5 * (vals[s].first + vals[s + 1].first);
                }
            }
        }
        if (best_f < 0) {  // no candidate feature separates anything
            tree.nodes[static_cast<std::size_t>(me)].leaf_id = tree.n_leaves++;
            return me;
        }

        std::vector<int> left_idx, right_idx;
        for (int i : idx)
            (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_f)] <= best_thr ? left_idx
                                                                                          : right_idx)
                .push_back(i);
        tree.nodes[static_cast<std::size_t>(me)].feature = best_f;
        tree.nodes[static_cast<std::size_t>(me)].threshold = best_thr;
        int l = build(std::move(left_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(me)].left = l;
        int r = build(std::move(right_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }
};

inline const TreeNode& descend(const DecisionTree& t, const std::vector<double>& x) {
    int cur = 0;
    while (t.nodes[static_cast<std::size_t>(cur)].feature >= 0) {
        const TreeNode& n = t.nodes[static_cast<std::size_t>(cur)];
        cur = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return t.nodes[static_cast<std::size_t>(cur)];
}

inline int histogram_vote(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;  // ties fall to the lowest ordinal
}

}  // namespace detail

inline DecisionForest train_forest(const std::vector<std::vector<double>>& X,
                                   const std::vector<int>& y, int n_trees = 100, int max_depth = 0,
                                   std::uint64_t seed = 0) {
    if (X.empty() || X.size() != y.size()) throw Error("train_forest: bad training data");
    int n_classes = 0;
    for (int label : y) {
        if (label < 0) throw Error("train_forest: negative label ordinal");
        n_classes = std::max(n_classes, label + 1);
    }
    if (n_classes < 2) throw Error("train_forest: need at least 2 classes");
    if (n_trees < 1) throw Error("train_forest: n_trees must be >= 1");
    const int n = static_cast<int>(X.size());
    const int d = static_cast<int>(X.front().size());
    const int n_candidates = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));

    DecisionForest forest;
    forest.n_classes = n_classes;
    forest.n_features = d;
    forest.max_depth = max_depth;
    forest.seed = seed;
    forest.trees.resize(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        Rng rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(t)), 7);
        std::vector<int> sample(static_cast<std::size_t>(n));
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (int& i : sample) i = pick(rng);  // bootstrap
        detail::TreeBuilder builder{X, y, n_classes, n_candidates, max_depth, rng, {}};
        builder.build(std::move(sample), 0);
        forest.trees[static_cast<std::size_t>(t)] = std::move(builder.tree);
    }
    return forest;
}

inline int tree_predict(const DecisionTree& t, const std::vector<double>& x) {
    return detail::histogram_vote(detail::descend(t, x).counts);
}

// majority over per-tree votes; ties fall to the lowest ordinal
inline int forest_predict(const DecisionForest& f, const std::vector<double>& x) {
    std::vector<int> votes(static_cast<std::size_t>(f.n_classes), 0);
    for (const DecisionTree& t : f.trees) ++votes[static_cast<std::size_t>(tree_predict(t, x))];
    return detail::histogram_vote(votes);
}

inline std::vector<double> forest_vote_fractions(const DecisionForest& f,
                                                 const std::vector<double>& x) {
    std::vector<double> votes(static_cast<std::size_t>(f.n_classes), 0.0);
    for (const DecisionTree& t : f.trees) votes[static_cast<std::size_t>(tree_predict(t, x))] += 1.0;
    for (double& v : votes) v /= static_cast<double>(f.trees.size());
    return votes;
}

// Impurity decrease weighted by the fraction of samples reaching each split,
// averaged over trees, normalized to sum 1 (all-zero when nothing ever split).
inline std::vector<double> gini_importance(const DecisionForest& f) {
    std::vector<double> imp(static_cast<std::size_t>(f.n_features), 0.0);
    for (const DecisionTree& t : f.trees) {
        double root_n = static_cast<double>(t.nodes.front().n_samples);
        for (const TreeNode& node : t.nodes) {
            if (node.feature < 0) continue;
            const TreeNode& L = t.nodes[static_cast<std::size_t>(node.left)];
            const TreeNode& R = t.nodes[static_cast<std::size_t>(node.right)];
            double child = (L.n_samples * L.impurity + R.n_samples * R.impurity) / node.n_samples;
            imp[static_cast<std::size_t>(node.feature)] +=
                (node.n_samples / root_n) * (node.impurity - child);
        }
    }
    for (double& v : imp) v /= static_cast<double>(f.trees.size());
    double total = 0.0;
    for (double v : imp) total += v;
    if (total > 0.0)
        for (double& v : imp) v /= total;
    return imp;
}

// ---------------------------------------------------------------------------
// k-FP: leaf identities as the instance fingerprint

using LeafVector = std::vector<int>;  // one leaf id per tree

inline LeafVector leaf_vector(const DecisionForest& f, const std::vector<double>& x) {
    LeafVector lv;
    lv.reserve(f.trees.size());
    for (const DecisionTree& t : f.trees) lv.push_back(detail::descend(t, x).leaf_id);
    return lv;
}

inline int hamming(const LeafVector& a, const LeafVector& b) {
    if (a.size() != b.size()) throw Error("hamming: leaf vector length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

// k nearest training leaf vectors by Hamming distance; majority label, ties by
// smaller summed Hamming distance among tied labels, then lowest ordinal.
inline int kfp_classify(const DecisionForest& f, const std::vector<LeafVector>& train_lv,
                        const std::vector<int>& train_labels, const std::vector<double>& query,
                        int k = 3) {
    if (train_lv.empty() || train_lv.size() != train_labels.size())
        throw Error("kfp_classify: bad training leaf vectors");
    if (k < 1 || k > static_cast<int>(train_lv.size()))
        throw Error("kfp_classify: k outside [1, |train|]");
    LeafVector q = leaf_vector(f, query);
    std::vector<std::pair<int, int>> dist;  // (hamming, index)
    dist.reserve(train_lv.size());
    for (std::size_t i = 0; i < train_lv.size(); ++i)
        dist.emplace_back(hamming(q, train_lv[i]), static_cast<int>(i));
    std::sort(dist.begin(), dist.end());
    std::vector<int> votes(static_cast<std::size_t>(f.n_classes), 0);
    std::vector<long> summed(static_cast<std::size_t>(f.n_classes), 0);
    for (int i = 0; i < k; ++i) {
        int label = train_labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)];
        ++votes[static_cast<std::size_t>(label)];
        summed[static_cast<std::size_t>(label)] += dist[static_cast<std::size_t>(i)].first;
    }
    int best = -1;
    for (int c = 0; c < f.n_classes; ++c) {
        if (votes[static_cast<std::size_t>(c)] == 0) continue;
        if (best < 0 || votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)] ||
            (votes[static_cast<std::size_t>(c)] == votes[static_cast<std::size_t>(best)] &&
             summed[static_cast<std::size_t>(c)] < summed[static_cast<std::size_t>(best)]))
            best = c;
    }
    return best;
}

}  // namespace wfkit
