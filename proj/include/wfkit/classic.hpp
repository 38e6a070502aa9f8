#pragma once

// Distance-weighted k-NN and a one-vs-rest linear SVM (Pegasos-style hinge
// subgradient descent), plus the feature standardizer the SVM expects.

#include <cmath>
#include <cstdint>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

struct Standardizer {
    std::vector<double> means, stds;

    static Standardizer fit(const std::vector<std::vector<double>>& X) {
        if (X.empty()) throw Error("Standardizer: empty data");
        const std::size_t d = X.front().size();
        Standardizer s;
        s.means.assign(d, 0.0);
        s.stds.assign(d, 0.0);
        for (const auto& row : X) {
            if (row.size() != d) throw Error("Standardizer: ragged rows");
            for (std::size_t j = 0; j < d; ++j) s.means[j] += row[j];
        }
        for (double& m : s.means) m /= static_cast<double>(X.size());
        for (const auto& row : X)
            for (std::size_t j = 0; j < d; ++j) {
                double dv = row[j] - s.means[j];
                s.stds[j] += dv * dv;
            }
        for (double& v : s.stds) v = std::sqrt(v / static_cast<double>(X.size()));
        return s;
    }

    std::vector<double> transform(const std::vector<double>& x) const {
        if (x.size() != means.size()) throw Error("Standardizer: dim mismatch");
        std::vector<double> out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = (x[j] - means[j]) / (stds[j] > 1e-12 ? stds[j] : 1.0);
        return out;
    }

    std::vector<std::vector<double>> transform_all(const std::vector<std::vector<double>>& X) const {
        std::vector<std::vector<double>> out;
        out.reserve(X.size());
        for (const auto& row : X) out.push_back(transform(row));
        return out;
    }
};

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("euclidean: dim mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct KnnResult {
    int label = 0;
    std::vector<double> class_scores;  // summed inverse-distance weights
};

// Euclidean k nearest, vote weight 1/(distance + 1e-12); ties in neighbor
// selection break on index, ties in the vote on the lowest ordinal.
inline KnnResult knn_classify(const std::vector<std::vector<double>>& train_X,
                              const std::vector<int>& train_y, const std::vector<double>& query,
                              int k = 2) {
    if (train_X.empty() || train_X.size() != train_y.size())
        throw Error("knn_classify: bad training data");
    if (k < 1 || k > static_cast<int>(train_X.size()))
        throw Error("knn_classify: k outside [1, |train|]");
    int n_classes = 0;
    for (int y : train_y) n_classes = std::max(n_classes, y + 1);
    std::vector<std::pair<double, int>> dist;
    dist.reserve(train_X.size());
    for (std::size_t i = 0; i < train_X.size(); ++i)
        dist.emplace_back(euclidean(train_X[i], query), static_cast<int>(i));
    std::sort(dist.begin(), dist.end());
    KnnResult r;
    r.class_scores.assign(static_cast<std::size_t>(n_classes), 0.0);
    for (int i = 0; i < k; ++i) {
        const auto& [d, idx] = dist[static_cast<std::size_t>(i)];
        r.class_scores[static_cast<std::size_t>(train_y[static_cast<std::size_t>(idx)])] +=
            1.0 / (d + 1e-12);
    }
    r.label = 0;
    for (std::size_t c = 1; c < r.class_scores.size(); ++c)
        if (r.class_scores[c] > r.class_scores[static_cast<std::size_t>(r.label)])
            r.label = static_cast<int>(c);
    return r;
}

struct LinearSvm {
    std::vector<std::vector<double>> w;  // one weight vector per class
    std::vector<double> b;
    int n_classes = 0;
};

// One-vs-rest hinge loss with L2 regularization lambda = 1/C. Callers should
// standardize features first (zero mean, unit variance on training statistics).
inline LinearSvm train_linear_svm(const std::vector<std::vector<double>>& X,
                                  const std::vector<int>& y, double C = 1.0, int epochs = 20,
                                  std::uint64_t seed = 0) {
    if (X.empty() || X.size() != y.size()) throw Error("train_linear_svm: bad training data");
    if (C <= 0.0) throw Error("train_linear_svm: C must be > 0");
    if (epochs < 1) throw Error("train_linear_svm: epochs must be >= 1");
    int n_classes = 0;
    for (int label : y) n_classes = std::max(n_classes, label + 1);
    bool multi = false;
    for (int label : y)
        if (label != y.front()) multi = true;
    if (!multi) throw Error("train_linear_svm: training data holds a single class");

    const std::size_t n = X.size(), d = X.front().size();
    const double lambda = 1.0 / C;
    LinearSvm model;
    model.n_classes = n_classes;
    model.w.assign(static_cast<std::size_t>(n_classes), std::vector<double>(d, 0.0));
    model.b.assign(static_cast<std::size_t>(n_classes), 0.0);

    for (int c = 0; c < n_classes; ++c) {
        Rng rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(c)), 8);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::vector<double>& w = model.w[static_cast<std::size_t>(c)];
        double& b = model.b[static_cast<std::size_t>(c)];
        long t = 0;
        for (int e = 0; e < epochs; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t i : order) {
                ++t;
                double eta = 1.0 / (lambda * static_cast<double>(t));
                double target = y[i] == c ? 1.0 : -1.0;
                double margin = b;
                for (std::size_t j = 0; j < d; ++j) margin += w[j] * X[i][j];
                double shrink = 1.0 - eta * lambda;
                if (target * margin < 1.0) {
                    for (std::size_t j = 0; j < d; ++j) w[j] = shrink * w[j] + eta * target * X[i][j];
                    b += eta * target;  // bias unregularized
                } else {
                    for (std::size_t j = 0; j < d; ++j) w[j] *= shrink;
                }
            }
        }
    }
    return model;
}

inline std::vector<double> svm_margins(const LinearSvm& m, const std::vector<double>& x) {
    std::vector<double> s(static_cast<std::size_t>(m.n_classes));
    for (int c = 0; c < m.n_classes; ++c) {
        double v = m.b[static_cast<std::size_t>(c)];
        const std::vector<double>& w = m.w[static_cast<std::size_t>(c)];
        if (w.size() != x.size()) throw Error("svm_margins: dim mismatch");
        for (std::size_t j = 0; j < x.size(); ++j) v += w[j] * x[j];
        s[static_cast<std::size_t>(c)] = v;
    }
    return s;
}

inline int svm_predict(const LinearSvm& m, const std::vector<double>& x) {
    std::vector<double> s = svm_margins(m, x);
    int best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
        if (s[c] > s[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

}  // namespace wfkit
