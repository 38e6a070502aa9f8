#pragma once

// Small dense/conv neural engine: the three stock architectures (MLP, CNN,
// autoencoder), mini-batch training with SGD/Adam/RMSProp, prediction and
// bottleneck encoding. Double precision, deterministic under a fixed seed.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wfkit/common.hpp"
#include "wfkit/features.hpp"

namespace wfkit {

enum class LayerKind { Dense, Conv1D, MaxPool1D, Dropout, SoftmaxOutput };
enum class Activation { Tanh, Relu, Sigmoid, LeakyRelu, Elu, Linear };
enum class LossKind { CategoricalCrossEntropy, MeanSquaredError };
enum class Optimizer { SGD, Adam, RMSProp };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv1D: return "conv1d";
        case LayerKind::MaxPool1D: return "maxpool1d";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::SoftmaxOutput: return "softmax_output";
    }
    return "?";
}

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Elu: return "elu";
        case Activation::Linear: return "linear";
    }
    return "?";
}

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    int units = 0;         // dense/softmax output width; conv1d filter count
    int filter_width = 0;  // conv1d
    int pool_width = 0;    // maxpool1d
    Activation activation = Activation::Linear;
    double l2 = 0.0;
    double keep_prob = 1.0;  // dropout retention probability

    bool operator==(const LayerSpec&) const = default;
};

namespace detail {

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::LeakyRelu: return z > 0.0 ? z : 0.01 * z;
        case Activation::Elu: return z > 0.0 ? z : std::expm1(z);
        case Activation::Linear: return z;
    }
    return z;
}

inline double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: {
            double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
        case Activation::LeakyRelu: return z > 0.0 ? 1.0 : 0.01;
        case Activation::Elu: return z > 0.0 ? 1.0 : std::exp(z);
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

}  // namespace detail

// A layer with resolved shapes and parameters. Activations are stored flat,
// channel-major: index = channel * width + position.
struct Layer {
    LayerSpec spec;
    int in_width = 0, in_channels = 1;
    int out_width = 0, out_channels = 1;
    std::vector<double> w, b;       // dense: units x flat_in row-major; conv: filters x filter_width
    std::vector<double> gw, gb;     // gradient accumulators (training only)

    int flat_in() const { return in_width * in_channels; }
    int flat_out() const { return out_width * out_channels; }

    bool same_params(const Layer& o) const { return spec == o.spec && w == o.w && b == o.b; }
};

// Per-layer forward caches for one sample; owned by the caller so that a
// trained model stays immutable and shareable across threads.
struct LayerState {
    std::vector<double> in, z, out;
    std::vector<double> mask;  // dropout
    std::vector<int> argmax;   // maxpool
};

struct TrainConfig {
    Optimizer optimizer = Optimizer::SGD;
    double learning_rate = 0.01;
    int epochs = 10;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

struct NeuralModel {
    std::vector<Layer> layers;
    int input_dim = 0;
    int output_dim = 0;  // class count (classification) or reconstruction dim (AE)
    LossKind loss = LossKind::CategoricalCrossEntropy;
    bool trained = false;
    int bottleneck_layer = -1;  // encoder output layer index (AE only)

    bool same_network(const NeuralModel& o) const {
        if (layers.size() != o.layers.size() || input_dim != o.input_dim ||
            output_dim != o.output_dim || loss != o.loss || trained != o.trained ||
            bottleneck_layer != o.bottleneck_layer)
            return false;
        for (std::size_t i = 0; i < layers.size(); ++i)
            if (!layers[i].same_params(o.layers[i])) return false;
        return true;
    }
};

namespace detail {

// walk the stack once, resolving every layer's input/output shape
inline void resolve_shapes(NeuralModel& m) {
    int width = m.input_dim, channels = 1;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        Layer& L = m.layers[li];
        L.in_width = width;
        L.in_channels = channels;
        switch (L.spec.kind) {
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput:
                if (L.spec.units < 1) throw Error("layer " + std::to_string(li) + ": units must be >= 1");
                if (L.flat_in() < 1) throw Error("layer " + std::to_string(li) + ": empty input");
                L.out_width = L.spec.units;
                L.out_channels = 1;
                break;
            case LayerKind::Conv1D:
                if (channels != 1) throw Error("layer " + std::to_string(li) + ": conv1d wants a single input channel");
                if (L.spec.filter_width < 1 || L.spec.filter_width > width)
                    throw Error("layer " + std::to_string(li) + ": filter width outside [1, input width]");
                if (L.spec.units < 1) throw Error("layer " + std::to_string(li) + ": filter count must be >= 1");
                L.out_width = width - L.spec.filter_width + 1;  // valid convolution
                L.out_channels = L.spec.units;
                break;
            case LayerKind::MaxPool1D:
                if (L.spec.pool_width < 1) throw Error("layer " + std::to_string(li) + ": pool width must be >= 1");
                L.out_width = width / L.spec.pool_width;
                L.out_channels = channels;
                if (L.out_width < 1) throw Error("layer " + std::to_string(li) + ": pooling collapses the input");
                break;
            case LayerKind::Dropout:
                if (!(L.spec.keep_prob > 0.0 && L.spec.keep_prob <= 1.0))
                    throw Error("layer " + std::to_string(li) + ": keep_prob outside (0,1]");
                L.out_width = width;
                L.out_channels = channels;
                break;
        }
        width = L.out_width;
        channels = L.out_channels;
    }
    if (m.layers.empty()) throw Error("model has no layers");
    if (width * channels != m.output_dim) throw Error("layer stack does not produce output_dim values");
}

inline void init_params(NeuralModel& m, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    for (Layer& L : m.layers) {
        switch (L.spec.kind) {
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput: {
                int fan_in = L.flat_in();
                double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
                std::uniform_real_distribution<double> dist(-bound, bound);
                L.w.resize(static_cast<std::size_t>(L.spec.units) * fan_in);
                for (double& x : L.w) x = dist(rng);
                L.b.assign(static_cast<std::size_t>(L.spec.units), 0.0);
                break;
            }
            case LayerKind::Conv1D: {
                double bound = 1.0 / std::sqrt(static_cast<double>(L.spec.filter_width));
                std::uniform_real_distribution<double> dist(-bound, bound);
                L.w.resize(static_cast<std::size_t>(L.spec.units) * L.spec.filter_width);
                for (double& x : L.w) x = dist(rng);
                L.b.assign(static_cast<std::size_t>(L.spec.units), 0.0);
                break;
            }
            default:
                L.w.clear();
                L.b.clear();
                break;
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// builders

inline NeuralModel build_mlp(int input_dim, int n_classes,
                             const std::vector<int>& hidden_units = {650, 650},
                             Activation activation = Activation::Tanh, double l2 = 1e-4,
                             double keep_prob = 0.8, std::uint64_t seed = 0) {
    if (input_dim < 1) throw Error("build_mlp: input_dim must be >= 1");
    if (n_classes < 2) throw Error("build_mlp: n_classes must be >= 2");
    if (hidden_units.size() != 2) throw Error("build_mlp: expected two hidden layer sizes");
    NeuralModel m;
    m.input_dim = input_dim;
    m.output_dim = n_classes;
    m.loss = LossKind::CategoricalCrossEntropy;
    m.layers.push_back({LayerSpec{LayerKind::Dense, hidden_units[0], 0, 0, activation, l2, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::Dropout, 0, 0, 0, Activation::Linear, 0.0, keep_prob}});
    m.layers.push_back({LayerSpec{LayerKind::Dense, hidden_units[1], 0, 0, activation, l2, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::SoftmaxOutput, n_classes, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(m);
    detail::init_params(m, seed);
    return m;
}

inline NeuralModel build_cnn(int input_dim, int n_classes, int n_filters = 32,
                             int filter_width = 3, int pool_width = 2, int hidden_units = 256,
                             Activation activation = Activation::Tanh, double l2 = 1e-4,
                             std::uint64_t seed = 0) {
    if (input_dim < filter_width) throw Error("build_cnn: input narrower than the filter");
    if (n_classes < 2) throw Error("build_cnn: n_classes must be >= 2");
    NeuralModel m;
    m.input_dim = input_dim;
    m.output_dim = n_classes;
    m.loss = LossKind::CategoricalCrossEntropy;
    m.layers.push_back({LayerSpec{LayerKind::Conv1D, n_filters, filter_width, 0, activation, l2, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::MaxPool1D, 0, 0, pool_width, Activation::Linear, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::Dense, hidden_units, 0, 0, activation, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::SoftmaxOutput, n_classes, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(m);
    detail::init_params(m, seed);
    return m;
}

// Encoder/decoder of two dense layers each; linear reconstruction layer so
// arbitrary-range targets are reachable under the squared-error loss.
inline NeuralModel build_ae(int input_dim, int bottleneck, int hidden_units = 256,
                            std::uint64_t seed = 0) {
    if (input_dim < 2) throw Error("build_ae: input_dim must be >= 2");
    if (bottleneck < 1 || bottleneck >= input_dim)
        throw Error("build_ae: bottleneck must lie in [1, input_dim)");
    NeuralModel m;
    m.input_dim = input_dim;
    m.output_dim = input_dim;
    m.loss = LossKind::MeanSquaredError;
    m.layers.push_back({LayerSpec{LayerKind::Dense, hidden_units, 0, 0, Activation::Tanh, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::Dense, bottleneck, 0, 0, Activation::Tanh, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::Dense, hidden_units, 0, 0, Activation::Tanh, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::Dense, input_dim, 0, 0, Activation::Linear, 0.0, 1.0}});
    m.bottleneck_layer = 1;
    detail::resolve_shapes(m);
    detail::init_params(m, seed);
    return m;
}

inline TrainConfig default_ae_train_config(std::uint64_t seed) {
    TrainConfig c;
    c.optimizer = Optimizer::Adam;
    c.learning_rate = 0.001;
    c.epochs = 10;
    c.batch_size = 256;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------
// forward / backward

namespace detail {

// Single-sample forward pass. `states` (when given) receives per-layer caches
// for a subsequent backward pass; `dropout_rng` non-null enables dropout.
inline std::vector<double> forward_sample(const NeuralModel& m, const std::vector<double>& x,
                                          std::vector<LayerState>* states, Rng* dropout_rng) {
    if (static_cast<int>(x.size()) != m.input_dim)
        throw Error("forward: input has dim " + std::to_string(x.size()) + ", model wants " +
                    std::to_string(m.input_dim));
    if (states) states->resize(m.layers.size());
    std::vector<double> cur = x;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const Layer& L = m.layers[li];
        LayerState* st = states ? &(*states)[li] : nullptr;
        if (st) st->in = cur;
        std::vector<double> next;
        switch (L.spec.kind) {
            case LayerKind::Dense:
            case LayerKind::SoftmaxOutput: {
                const int out_n = L.spec.units, in_n = L.flat_in();
                std::vector<double> z(static_cast<std::size_t>(out_n));
                for (int j = 0; j < out_n; ++j) {
                    double s = L.b[static_cast<std::size_t>(j)];
                    const double* wj = L.w.data() + static_cast<std::size_t>(j) * in_n;
                    for (int i = 0; i < in_n; ++i) s += wj[i] * cur[static_cast<std::size_t>(i)];
                    z[static_cast<std::size_t>(j)] = s;
                }
                if (L.spec.kind == LayerKind::SoftmaxOutput) {
                    double zmax = z[0];
                    for (double v : z) zmax = std::max(zmax, v);
                    double denom = 0.0;
                    next.resize(z.size());
                    for (std::size_t j = 0; j < z.size(); ++j) {
                        next[j] = std::exp(z[j] - zmax);
                        denom += next[j];
                    }
                    for (double& v : next) v /= denom;
                } else {
                    next.resize(z.size());
                    for (std::size_t j = 0; j < z.size(); ++j) next[j] = activate(L.spec.activation, z[j]);
                }
                if (st) st->z = std::move(z);
                break;
            }
            case LayerKind::Conv1D: {
                const int fw = L.spec.filter_width, ow = L.out_width, nf = L.spec.units;
                std::vector<double> z(static_cast<std::size_t>(nf) * ow);
                for (int f = 0; f < nf; ++f) {
                    const double* wf = L.w.data() + static_cast<std::size_t>(f) * fw;
                    for (int x0 = 0; x0 < ow; ++x0) {
                        double s = L.b[static_cast<std::size_t>(f)];
                        for (int k = 0; k < fw; ++k) s += wf[k] * cur[static_cast<std::size_t>(x0 + k)];
                        z[static_cast<std::size_t>(f) * ow + x0] = s;
                    }
                }
                next.resize(z.size());
                for (std::size_t j = 0; j < z.size(); ++j) next[j] = activate(L.spec.activation, z[j]);
                if (st) st->z = std::move(z);
                break;
            }
            case LayerKind::MaxPool1D: {
                const int pw = L.spec.pool_width, ow = L.out_width, iw = L.in_width;
                next.resize(static_cast<std::size_t>(L.out_channels) * ow);
                if (st) st->argmax.assign(next.size(), 0);
                for (int c = 0; c < L.out_channels; ++c) {
                    for (int j = 0; j < ow; ++j) {
                        int base = c * iw + j * pw;
                        int best = base;
                        for (int k = 1; k < pw; ++k)
                            if (cur[static_cast<std::size_t>(base + k)] > cur[static_cast<std::size_t>(best)])
                                best = base + k;
                        next[static_cast<std::size_t>(c) * ow + j] = cur[static_cast<std::size_t>(best)];
                        if (st) st->argmax[static_cast<std::size_t>(c) * ow + j] = best;
                    }
                }
                break;
            }
            case LayerKind::Dropout: {
                next = cur;
                if (dropout_rng && L.spec.keep_prob < 1.0) {
                    std::uniform_real_distribution<double> unit(0.0, 1.0);
                    std::vector<double> mask(cur.size());
                    for (std::size_t j = 0; j < cur.size(); ++j) {
                        mask[j] = unit(*dropout_rng) < L.spec.keep_prob ? 1.0 / L.spec.keep_prob : 0.0;
                        next[j] *= mask[j];
                    }
                    if (st) st->mask = std::move(mask);
                } else if (st) {
                    st->mask.clear();
                }
                break;
            }
        }
        if (st) st->out = next;
        cur = std::move(next);
    }
    return cur;
}

// Backward pass for one sample; seeds with d(loss)/d(output) except that for
// cross entropy `dout` must already be (p - t) / batch, applied at the softmax
// pre-activation. Accumulates into each layer's gw/gb.
inline void backward_sample(NeuralModel& m, const std::vector<LayerState>& states,
                            std::vector<double> dout, bool ce_seed_at_logits) {
    for (int li = static_cast<int>(m.layers.size()) - 1; li >= 0; --li) {
        Layer& L = m.layers[li];
        const LayerState& st = states[static_cast<std::size_t>(li)];
        std::vector<double> din;
        switch (L.spec.kind) {
            case LayerKind::SoftmaxOutput:
            case LayerKind::Dense: {
                const int out_n = L.spec.units, in_n = L.flat_in();
                std::vector<double> dz(static_cast<std::size_t>(out_n));
                if (L.spec.kind == LayerKind::SoftmaxOutput) {
                    if (!ce_seed_at_logits) throw Error("softmax output only supports the cross-entropy loss");
                    dz = std::move(dout);  // already (p - t)/B
                } else {
                    for (int j = 0; j < out_n; ++j)
                        dz[static_cast<std::size_t>(j)] =
                            dout[static_cast<std::size_t>(j)] *
                            activate_grad(L.spec.activation, st.z[static_cast<std::size_t>(j)]);
                }
                din.assign(static_cast<std::size_t>(in_n), 0.0);
                for (int j = 0; j < out_n; ++j) {
                    const double d = dz[static_cast<std::size_t>(j)];
                    double* gwj = L.gw.data() + static_cast<std::size_t>(j) * in_n;
                    const double* wj = L.w.data() + static_cast<std::size_t>(j) * in_n;
                    for (int i = 0; i < in_n; ++i) {
                        gwj[i] += d * st.in[static_cast<std::size_t>(i)];
                        din[static_cast<std::size_t>(i)] += d * wj[i];
                    }
                    L.gb[static_cast<std::size_t>(j)] += d;
                }
                break;
            }
            case LayerKind::Conv1D: {
                const int fw = L.spec.filter_width, ow = L.out_width, nf = L.spec.units;
                din.assign(static_cast<std::size_t>(L.in_width), 0.0);
                for (int f = 0; f < nf; ++f) {
                    const double* wf = L.w.data() + static_cast<std::size_t>(f) * fw;
                    double* gwf = L.gw.data() + static_cast<std::size_t>(f) * fw;
                    for (int x0 = 0; x0 < ow; ++x0) {
                        std::size_t oj = static_cast<std::size_t>(f) * ow + x0;
                        double d = dout[oj] * activate_grad(L.spec.activation, st.z[oj]);
                        for (int k = 0; k < fw; ++k) {
                            gwf[k] += d * st.in[static_cast<std::size_t>(x0 + k)];
                            din[static_cast<std::size_t>(x0 + k)] += d * wf[k];
                        }
                        L.gb[static_cast<std::size_t>(f)] += d;
                    }
                }
                break;
            }
            case LayerKind::MaxPool1D: {
                din.assign(st.in.size(), 0.0);
                for (std::size_t j = 0; j < dout.size(); ++j)
                    din[static_cast<std::size_t>(st.argmax[j])] += dout[j];
                break;
            }
            case LayerKind::Dropout: {
                din = std::move(dout);
                if (!st.mask.empty())
                    for (std::size_t j = 0; j < din.size(); ++j) din[j] *= st.mask[j];
                break;
            }
        }
        dout = std::move(din);
    }
}

inline double l2_penalty(const NeuralModel& m) {
    double p = 0.0;
    for (const Layer& L : m.layers) {
        if (L.spec.l2 <= 0.0 || L.w.empty()) continue;
        double ss = 0.0;
        for (double v : L.w) ss += v * v;
        p += 0.5 * L.spec.l2 * ss;
    }
    return p;
}

inline double sample_data_loss(const NeuralModel& m, const std::vector<double>& out,
                               const std::vector<double>& target) {
    if (m.loss == LossKind::CategoricalCrossEntropy) {
        double e = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (target[i] != 0.0) e -= target[i] * std::log(std::max(out[i], 1e-300));
        return e;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double d = out[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(out.size());
}

// One batch: accumulate gradients over the samples listed in `idx`, including
// the L2 term; returns the mean per-sample data loss.
inline double batch_loss_and_grads(NeuralModel& m, const std::vector<std::vector<double>>& X,
                                   const std::vector<std::vector<double>>& T,
                                   const std::vector<int>& idx, Rng* dropout_rng) {
    const double B = static_cast<double>(idx.size());
    for (Layer& L : m.layers) {
        L.gw.assign(L.w.size(), 0.0);
        L.gb.assign(L.b.size(), 0.0);
    }
    double data_loss = 0.0;
    std::vector<LayerState> states;
    for (int si : idx) {
        const std::vector<double>& x = X[static_cast<std::size_t>(si)];
        const std::vector<double>& t = T[static_cast<std::size_t>(si)];
        std::vector<double> out = forward_sample(m, x, &states, dropout_rng);
        data_loss += sample_data_loss(m, out, t);
        std::vector<double> seed(out.size());
        if (m.loss == LossKind::CategoricalCrossEntropy) {
            for (std::size_t i = 0; i < out.size(); ++i) seed[i] = (out[i] - t[i]) / B;
            backward_sample(m, states, std::move(seed), true);
        } else {
            const double D = static_cast<double>(out.size());
            for (std::size_t i = 0; i < out.size(); ++i) seed[i] = 2.0 * (out[i] - t[i]) / (B * D);
            backward_sample(m, states, std::move(seed), false);
        }
    }
    for (Layer& L : m.layers)
        if (L.spec.l2 > 0.0)
            for (std::size_t i = 0; i < L.w.size(); ++i) L.gw[i] += L.spec.l2 * L.w[i];
    return data_loss / B;
}

struct OptState {
    std::vector<std::vector<double>> mw, vw, mb, vb;  // per-layer moment buffers
    long step = 0;

    void reset(const NeuralModel& m) {
        mw.clear(); vw.clear(); mb.clear(); vb.clear();
        for (const Layer& L : m.layers) {
            mw.emplace_back(L.w.size(), 0.0);
            vw.emplace_back(L.w.size(), 0.0);
            mb.emplace_back(L.b.size(), 0.0);
            vb.emplace_back(L.b.size(), 0.0);
        }
        step = 0;
    }
};

inline void apply_update(NeuralModel& m, OptState& os, const TrainConfig& cfg) {
    const double lr = cfg.learning_rate;
    ++os.step;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        Layer& L = m.layers[li];
        auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                          std::vector<double>& mo, std::vector<double>& vo) {
            switch (cfg.optimizer) {
                case Optimizer::SGD:
                    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
                    break;
                case Optimizer::Adam: {
                    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                    const double c1 = 1.0 - std::pow(b1, static_cast<double>(os.step));
                    const double c2 = 1.0 - std::pow(b2, static_cast<double>(os.step));
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        mo[i] = b1 * mo[i] + (1.0 - b1) * g[i];
                        vo[i] = b2 * vo[i] + (1.0 - b2) * g[i] * g[i];
                        p[i] -= lr * (mo[i] / c1) / (std::sqrt(vo[i] / c2) + eps);
                    }
                    break;
                }
                case Optimizer::RMSProp: {
                    const double rho = 0.9, eps = 1e-8;
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        vo[i] = rho * vo[i] + (1.0 - rho) * g[i] * g[i];
                        p[i] -= lr * g[i] / (std::sqrt(vo[i]) + eps);
                    }
                    break;
                }
            }
        };
        update(L.w, L.gw, os.mw[li], os.vw[li]);
        update(L.b, L.gb, os.mb[li], os.vb[li]);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// training

struct TrainResult {
    std::vector<double> epoch_loss;  // mean data loss per epoch + L2 penalty at epoch end
};

inline TrainResult train_targets(NeuralModel& model, const std::vector<std::vector<double>>& X,
                                 const std::vector<std::vector<double>>& T, const TrainConfig& cfg) {
    const int n = static_cast<int>(X.size());
    if (n == 0) throw Error("train: empty training set");
    if (T.size() != X.size()) throw Error("train: feature/target count mismatch");
    for (const auto& x : X)
        if (static_cast<int>(x.size()) != model.input_dim) throw Error("train: feature dim mismatch");
    for (const auto& t : T)
        if (static_cast<int>(t.size()) != model.output_dim) throw Error("train: target dim mismatch");
    if (cfg.epochs < 1) throw Error("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (cfg.batch_size > n) throw Error("train: batch_size exceeds the training set size");
    if (cfg.learning_rate < 0.0) throw Error("train: negative learning rate");
    if (model.loss == LossKind::CategoricalCrossEntropy &&
        model.layers.back().spec.kind != LayerKind::SoftmaxOutput)
        throw Error("train: cross-entropy loss needs a softmax output layer");

    Rng shuffle_rng = make_rng(cfg.seed, 1);
    Rng dropout_rng = make_rng(cfg.seed, 2);
    bool uses_dropout = false;
    for (const Layer& L : model.layers)
        if (L.spec.kind == LayerKind::Dropout && L.spec.keep_prob < 1.0) uses_dropout = true;

    detail::OptState os;
    os.reset(model);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_data_loss = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            int end = std::min(n, start + cfg.batch_size);
            std::vector<int> idx(order.begin() + start, order.begin() + end);
            double bl = detail::batch_loss_and_grads(model, X, T, idx,
                                                     uses_dropout ? &dropout_rng : nullptr);
            if (!std::isfinite(bl))
                throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch starting at " + std::to_string(start));
            epoch_data_loss += bl * static_cast<double>(idx.size());
            detail::apply_update(model, os, cfg);
        }
        result.epoch_loss.push_back(epoch_data_loss / static_cast<double>(n) +
                                    detail::l2_penalty(model));
    }
    model.trained = true;
    for (Layer& L : model.layers) {  // drop scratch buffers from the returned model
        L.gw.clear();
        L.gb.clear();
    }
    return result;
}

inline std::vector<std::vector<double>> one_hot(const std::vector<int>& labels, int n_classes) {
    std::vector<std::vector<double>> T;
    T.reserve(labels.size());
    for (int y : labels) {
        if (y < 0 || y >= n_classes) throw Error("one_hot: label ordinal out of range");
        std::vector<double> t(static_cast<std::size_t>(n_classes), 0.0);
        t[static_cast<std::size_t>(y)] = 1.0;
        T.push_back(std::move(t));
    }
    return T;
}

inline TrainResult train_classifier(NeuralModel& model, const std::vector<std::vector<double>>& X,
                                    const std::vector<int>& labels, const TrainConfig& cfg) {
    if (model.loss != LossKind::CategoricalCrossEntropy)
        throw Error("train_classifier: model does not use the cross-entropy loss");
    return train_targets(model, X, one_hot(labels, model.output_dim), cfg);
}

inline TrainResult train_autoencoder(NeuralModel& model, const std::vector<std::vector<double>>& X,
                                     const TrainConfig& cfg) {
    if (model.loss != LossKind::MeanSquaredError)
        throw Error("train_autoencoder: model does not use the squared-error loss");
    return train_targets(model, X, X, cfg);
}

// ---------------------------------------------------------------------------
// inference

inline std::vector<double> predict_proba(const NeuralModel& model, const std::vector<double>& x) {
    if (!model.trained) throw Error("predict_proba: model is untrained");
    if (model.loss != LossKind::CategoricalCrossEntropy)
        throw Error("predict_proba: not a classification model");
    return detail::forward_sample(model, x, nullptr, nullptr);
}

inline int predict_class(const NeuralModel& model, const std::vector<double>& x) {
    std::vector<double> p = predict_proba(model, x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

// pre-softmax scores of the output layer
inline std::vector<double> logits(const NeuralModel& model, const std::vector<double>& x) {
    if (model.layers.empty() || model.layers.back().spec.kind != LayerKind::SoftmaxOutput)
        throw Error("logits: model has no softmax output layer");
    std::vector<LayerState> states;
    detail::forward_sample(model, x, &states, nullptr);
    return states.back().z;
}

inline std::vector<double> reconstruct(const NeuralModel& model, const std::vector<double>& x) {
    if (!model.trained) throw Error("reconstruct: model is untrained");
    return detail::forward_sample(model, x, nullptr, nullptr);
}

inline FeatureVector encode(const NeuralModel& model, const std::vector<double>& x) {
    if (!model.trained) throw Error("encode: model is untrained");
    if (model.bottleneck_layer < 0 ||
        model.bottleneck_layer >= static_cast<int>(model.layers.size()))
        throw Error("encode: model has no bottleneck layer");
    std::vector<LayerState> states;
    detail::forward_sample(model, x, &states, nullptr);
    return {states[static_cast<std::size_t>(model.bottleneck_layer)].out, Pipeline::AeEncoded};
}

// ---------------------------------------------------------------------------
// gradient verification

// Analytic vs central-difference gradients on up to `per_layer` randomly chosen
// parameters per layer; returns the worst relative error. Dropout disabled.
inline double numeric_gradient_check(NeuralModel model, const std::vector<double>& x,
                                     const std::vector<double>& target, double epsilon = 1e-5,
                                     int per_layer = 12, std::uint64_t seed = 7) {
    if (epsilon <= 0.0) throw Error("numeric_gradient_check: epsilon must be > 0");
    std::vector<std::vector<double>> X{x}, T{target};
    std::vector<int> idx{0};
    detail::batch_loss_and_grads(model, X, T, idx, nullptr);
    std::vector<std::vector<double>> analytic_w, analytic_b;
    for (Layer& L : model.layers) {
        analytic_w.push_back(L.gw);
        analytic_b.push_back(L.gb);
    }
    auto total_loss = [&]() {
        std::vector<double> out = detail::forward_sample(model, x, nullptr, nullptr);
        return detail::sample_data_loss(model, out, target) + detail::l2_penalty(model);
    };
    Rng rng = make_rng(seed, 4);
    double worst = 0.0;
    auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        if (params.empty()) return;
        std::vector<std::size_t> picks;
        if (static_cast<int>(params.size()) <= per_layer) {
            for (std::size_t i = 0; i < params.size(); ++i) picks.push_back(i);
        } else {
            std::uniform_int_distribution<std::size_t> dist(0, params.size() - 1);
            for (int i = 0; i < per_layer; ++i) picks.push_back(dist(rng));
        }
        for (std::size_t i : picks) {
            double keep = params[i];
            params[i] = keep + epsilon;
            double up = total_loss();
            params[i] = keep - epsilon;
            double down = total_loss();
            params[i] = keep;
            double numeric = (up - down) / (2.0 * epsilon);
            double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
        }
    };
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        probe(model.layers[li].w, analytic_w[li]);
        probe(model.layers[li].b, analytic_b[li]);
    }
    return worst;
}

}  // namespace wfkit
