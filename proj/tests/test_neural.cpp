#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "wfkit/model_io.hpp"
#include "wfkit/neural.hpp"

using namespace wfkit;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

// 2-in / 2-out stack with hand-set parameters: Dense(2, linear) then softmax
NeuralModel hand_model() {
    NeuralModel m;
    m.input_dim = 2;
    m.output_dim = 2;
    m.loss = LossKind::CategoricalCrossEntropy;
    m.layers.push_back({LayerSpec{LayerKind::Dense, 2, 0, 0, Activation::Linear, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::SoftmaxOutput, 2, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(m);
    m.layers[0].w = {1.0, 0.5, -1.0, 0.25};  // row-major: unit0 = [1, .5], unit1 = [-1, .25]
    m.layers[0].b = {0.1, -0.1};
    m.layers[1].w = {1.0, 0.0, 0.0, 1.0};  // identity
    m.layers[1].b = {0.0, 0.0};
    m.trained = true;
    return m;
}

// separable two-blob toy set around (+2,+2) and (-2,-2)
void blob_data(std::vector<std::vector<double>>& X, std::vector<int>& y, int per_class,
               std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> noise(0.0, 0.4);
    for (int c = 0; c < 2; ++c) {
        double mu = c == 0 ? 2.0 : -2.0;
        for (int i = 0; i < per_class; ++i) {
            X.push_back({mu + noise(rng), mu + noise(rng)});
            y.push_back(c);
        }
    }
}

}  // namespace

TEST_CASE("builder validation") {
    CHECK_THROWS_WITH(build_mlp(0, 2), ContainsSubstring("input_dim"));
    CHECK_THROWS_WITH(build_mlp(4, 1), ContainsSubstring("n_classes"));
    CHECK_THROWS_WITH(build_mlp(4, 2, {8}), ContainsSubstring("two hidden layer sizes"));
    CHECK_THROWS_WITH(build_cnn(2, 2, 4, 3), ContainsSubstring("narrower than the filter"));
    CHECK_THROWS_WITH(build_cnn(8, 1), ContainsSubstring("n_classes"));
    CHECK_THROWS_WITH(build_ae(1, 1), ContainsSubstring("input_dim"));
    CHECK_THROWS_WITH(build_ae(8, 0), ContainsSubstring("bottleneck"));
    CHECK_THROWS_WITH(build_ae(8, 8), ContainsSubstring("bottleneck"));
}

TEST_CASE("shape resolution walks the layer stack") {
    NeuralModel mlp = build_mlp(30, 5, {16, 8}, Activation::Tanh, 0.0, 0.9, 1);
    REQUIRE(mlp.layers.size() == 4);
    CHECK(mlp.layers[0].in_width == 30);
    CHECK(mlp.layers[0].out_width == 16);
    CHECK(mlp.layers[1].out_width == 16);  // dropout passes shape through
    CHECK(mlp.layers[2].out_width == 8);
    CHECK(mlp.layers[3].out_width == 5);
    CHECK(mlp.layers[0].w.size() == 16 * 30);

    NeuralModel cnn = build_cnn(10, 3, 4, 3, 2, 6, Activation::Relu, 0.0, 1);
    // valid conv: 10 - 3 + 1 = 8 positions x 4 filters; pool 2 -> width 4
    CHECK(cnn.layers[0].out_width == 8);
    CHECK(cnn.layers[0].out_channels == 4);
    CHECK(cnn.layers[1].out_width == 4);
    CHECK(cnn.layers[1].out_channels == 4);
    CHECK(cnn.layers[2].flat_in() == 16);
    CHECK(cnn.layers[0].w.size() == 4 * 3);

    NeuralModel ae = build_ae(12, 3, 7, 1);
    CHECK(ae.bottleneck_layer == 1);
    CHECK(ae.layers[1].out_width == 3);
    CHECK(ae.layers[3].out_width == 12);
    CHECK(ae.loss == LossKind::MeanSquaredError);
}

TEST_CASE("forward pass matches hand-computed values") {
    NeuralModel m = hand_model();
    // z = [1*1 + .5*2 + .1, -1*1 + .25*2 - .1] = [2.1, -0.6]
    std::vector<double> lg = logits(m, {1.0, 2.0});
    REQUIRE(lg.size() == 2);
    CHECK(lg[0] == Approx(2.1));
    CHECK(lg[1] == Approx(-0.6));

    std::vector<double> p = predict_proba(m, {1.0, 2.0});
    double e0 = std::exp(2.1), e1 = std::exp(-0.6);
    CHECK(p[0] == Approx(e0 / (e0 + e1)).epsilon(1e-12));
    CHECK(p[1] == Approx(e1 / (e0 + e1)).epsilon(1e-12));
    CHECK(p[0] + p[1] == Approx(1.0).margin(1e-12));
    CHECK(predict_class(m, {1.0, 2.0}) == 0);
    CHECK(predict_class(m, {-3.0, 0.0}) == 1);
}

TEST_CASE("conv and pool forward matches hand-computed values") {
    NeuralModel m;
    m.input_dim = 4;
    m.output_dim = 2;
    m.loss = LossKind::CategoricalCrossEntropy;
    m.layers.push_back({LayerSpec{LayerKind::Conv1D, 1, 3, 0, Activation::Linear, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::MaxPool1D, 0, 0, 2, Activation::Linear, 0.0, 1.0}});
    m.layers.push_back({LayerSpec{LayerKind::SoftmaxOutput, 2, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(m);
    m.layers[0].w = {1.0, 0.0, -1.0};
    m.layers[0].b = {0.5};
    m.layers[2].w = {1.0, -1.0};  // two outputs from the single pooled value
    m.layers[2].b = {0.0, 0.0};
    m.trained = true;

    // conv over [1,3,2,5]: z0 = 1-2+.5 = -0.5, z1 = 3-5+.5 = -1.5; pool max -> -0.5
    std::vector<double> lg = logits(m, {1.0, 3.0, 2.0, 5.0});
    CHECK(lg[0] == Approx(-0.5));
    CHECK(lg[1] == Approx(0.5));
}

TEST_CASE("one-hot encoding") {
    auto T = one_hot({0, 2, 1}, 3);
    REQUIRE(T.size() == 3);
    CHECK(T[0] == std::vector<double>{1, 0, 0});
    CHECK(T[1] == std::vector<double>{0, 0, 1});
    CHECK(T[2] == std::vector<double>{0, 1, 0});
    CHECK_THROWS_WITH(one_hot({3}, 3), ContainsSubstring("out of range"));
    CHECK_THROWS_WITH(one_hot({-1}, 3), ContainsSubstring("out of range"));
}

TEST_CASE("training converges on separable blobs") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 40, 3);
    NeuralModel m = build_mlp(2, 2, {8, 8}, Activation::Tanh, 0.0, 1.0, 5);
    TrainConfig cfg{Optimizer::SGD, 0.1, 30, 16, 5};
    TrainResult tr = train_classifier(m, X, y, cfg);
    REQUIRE(tr.epoch_loss.size() == 30);
    CHECK(tr.epoch_loss.back() < tr.epoch_loss.front());
    int correct = 0;
    for (std::size_t i = 0; i < X.size(); ++i)
        if (predict_class(m, X[i]) == y[i]) ++correct;
    CHECK(correct == static_cast<int>(X.size()));
}

TEST_CASE("each optimizer reduces the loss") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 30, 9);
    for (Optimizer opt : {Optimizer::SGD, Optimizer::Adam, Optimizer::RMSProp}) {
        NeuralModel m = build_mlp(2, 2, {6, 6}, Activation::Tanh, 0.0, 1.0, 2);
        double lr = opt == Optimizer::SGD ? 0.1 : 0.01;
        TrainResult tr = train_classifier(m, X, y, TrainConfig{opt, lr, 15, 10, 2});
        INFO(optimizer_name(opt));
        CHECK(tr.epoch_loss.back() < 0.5 * tr.epoch_loss.front());
    }
}

TEST_CASE("training is deterministic in the seed") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 20, 4);
    auto run = [&](std::uint64_t seed) {
        NeuralModel m = build_mlp(2, 2, {6, 6}, Activation::Tanh, 1e-4, 0.7, seed);
        TrainResult tr = train_classifier(m, X, y, TrainConfig{Optimizer::Adam, 0.01, 8, 8, seed});
        return std::pair{m, tr};
    };
    auto [m1, t1] = run(11);
    auto [m2, t2] = run(11);
    CHECK(t1.epoch_loss == t2.epoch_loss);
    CHECK(m1.same_network(m2));
    auto [m3, t3] = run(12);
    CHECK_FALSE(m1.same_network(m3));
}

TEST_CASE("keep probability one behaves exactly like an absent dropout layer") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 15, 6);

    NeuralModel with_layer = build_mlp(2, 2, {5, 4}, Activation::Tanh, 0.0, 1.0, 8);

    NeuralModel bare;
    bare.input_dim = 2;
    bare.output_dim = 2;
    bare.loss = LossKind::CategoricalCrossEntropy;
    bare.layers.push_back({LayerSpec{LayerKind::Dense, 5, 0, 0, Activation::Tanh, 0.0, 1.0}});
    bare.layers.push_back({LayerSpec{LayerKind::Dense, 4, 0, 0, Activation::Tanh, 0.0, 1.0}});
    bare.layers.push_back({LayerSpec{LayerKind::SoftmaxOutput, 2, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(bare);
    detail::init_params(bare, 8);

    TrainConfig cfg{Optimizer::SGD, 0.05, 6, 8, 8};
    train_classifier(with_layer, X, y, cfg);
    train_classifier(bare, X, y, cfg);
    for (const auto& x : X) CHECK(predict_proba(with_layer, x) == predict_proba(bare, x));
}

TEST_CASE("dropout keeps training deterministic and changes the fit") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 15, 7);
    auto run = [&](double keep) {
        NeuralModel m = build_mlp(2, 2, {8, 8}, Activation::Tanh, 0.0, keep, 3);
        train_classifier(m, X, y, TrainConfig{Optimizer::SGD, 0.05, 5, 8, 3});
        return m;
    };
    NeuralModel a = run(0.6), b = run(0.6), c = run(1.0);
    CHECK(a.same_network(b));
    CHECK_FALSE(a.same_network(c));
}

TEST_CASE("training input validation") {
    NeuralModel m = build_mlp(3, 2, {4, 4}, Activation::Tanh, 0.0, 1.0, 1);
    std::vector<std::vector<double>> X{{1, 2, 3}, {4, 5, 6}};
    std::vector<int> y{0, 1};
    TrainConfig cfg{Optimizer::SGD, 0.1, 2, 2, 1};

    CHECK_THROWS_WITH(train_classifier(m, {}, {}, cfg), ContainsSubstring("empty training set"));
    CHECK_THROWS_WITH(train_classifier(m, X, {0}, cfg), ContainsSubstring("count mismatch"));
    CHECK_THROWS_WITH(train_classifier(m, {{1, 2}, {3, 4}}, y, cfg),
                      ContainsSubstring("feature dim mismatch"));
    {
        TrainConfig bad = cfg;
        bad.epochs = 0;
        CHECK_THROWS_WITH(train_classifier(m, X, y, bad), ContainsSubstring("epochs"));
    }
    {
        TrainConfig bad = cfg;
        bad.batch_size = 0;
        CHECK_THROWS_WITH(train_classifier(m, X, y, bad), ContainsSubstring("batch_size"));
    }
    {
        TrainConfig bad = cfg;
        bad.batch_size = 3;
        CHECK_THROWS_WITH(train_classifier(m, X, y, bad), ContainsSubstring("exceeds"));
    }
    {
        TrainConfig bad = cfg;
        bad.learning_rate = -0.5;
        CHECK_THROWS_WITH(train_classifier(m, X, y, bad), ContainsSubstring("negative learning rate"));
    }

    NeuralModel ae = build_ae(3, 2, 4, 1);
    CHECK_THROWS_WITH(train_classifier(ae, X, y, cfg), ContainsSubstring("cross-entropy"));
    CHECK_THROWS_WITH(train_autoencoder(m, X, cfg), ContainsSubstring("squared-error"));
}

TEST_CASE("runaway learning rate reports divergence") {
    std::vector<std::vector<double>> X;
    for (int i = 0; i < 16; ++i) X.push_back({double(i), double(i % 3), 1.0});
    NeuralModel ae = build_ae(3, 2, 8, 1);
    TrainConfig cfg{Optimizer::SGD, 1e8, 10, 8, 1};
    CHECK_THROWS_WITH(train_autoencoder(ae, X, cfg), ContainsSubstring("training diverged"));
}

TEST_CASE("untrained models refuse inference") {
    NeuralModel m = build_mlp(3, 2, {4, 4});
    CHECK_THROWS_WITH(predict_proba(m, {1, 2, 3}), ContainsSubstring("untrained"));
    NeuralModel ae = build_ae(3, 2);
    CHECK_THROWS_WITH(reconstruct(ae, {1, 2, 3}), ContainsSubstring("untrained"));
    CHECK_THROWS_WITH(encode(ae, {1, 2, 3}), ContainsSubstring("untrained"));
}

TEST_CASE("inference dispatch errors") {
    NeuralModel ae = build_ae(4, 2, 6, 1);
    std::vector<std::vector<double>> X{{0, 0.5, 1, 0}, {1, 0, 0, 1}};
    train_autoencoder(ae, X, TrainConfig{Optimizer::Adam, 0.01, 3, 2, 1});
    CHECK_THROWS_WITH(predict_proba(ae, X[0]), ContainsSubstring("not a classification model"));
    CHECK_THROWS_WITH(logits(ae, X[0]), ContainsSubstring("no softmax output layer"));

    NeuralModel m = build_mlp(4, 2, {4, 4}, Activation::Tanh, 0.0, 1.0, 1);
    train_classifier(m, X, {0, 1}, TrainConfig{Optimizer::SGD, 0.1, 2, 2, 1});
    CHECK_THROWS_WITH(encode(m, X[0]), ContainsSubstring("no bottleneck layer"));
    CHECK_THROWS_WITH(predict_proba(m, {1, 2}), ContainsSubstring("model wants 4"));
}

TEST_CASE("autoencoder encodes to the bottleneck and reconstructs the input") {
    Rng rng = make_rng(21, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<std::vector<double>> X;
    for (int i = 0; i < 60; ++i) {
        // points on a 2-parameter manifold inside 6 dimensions
        double a = unit(rng), b = unit(rng);
        X.push_back({a, b, a + b, a - b, 0.5 * a, 0.5 * b});
    }
    NeuralModel ae = build_ae(6, 2, 32, 13);
    TrainResult tr = train_autoencoder(ae, X, TrainConfig{Optimizer::Adam, 0.005, 60, 16, 13});
    CHECK(tr.epoch_loss.back() < 0.05 * tr.epoch_loss.front());

    FeatureVector code = encode(ae, X[0]);
    CHECK(code.dim() == 2);
    CHECK(code.pipeline == Pipeline::AeEncoded);

    std::vector<double> rec = reconstruct(ae, X[0]);
    REQUIRE(rec.size() == 6);
    double err = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) err += (rec[i] - X[0][i]) * (rec[i] - X[0][i]);
    CHECK(err / 6.0 < 0.05);
}

TEST_CASE("analytic gradients agree with central differences") {
    Rng rng = make_rng(77, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::vector<double> x(12), t(3, 0.0);
        for (double& v : x) v = unit(rng);
        t[seed % 3] = 1.0;

        NeuralModel mlp = build_mlp(12, 3, {10, 8}, Activation::Tanh, 1e-3, 0.8, seed);
        double worst_mlp = numeric_gradient_check(mlp, x, t, 1e-5, 12, seed);
        INFO("mlp seed " << seed);
        CHECK(worst_mlp < 1e-4);

        NeuralModel cnn = build_cnn(12, 3, 4, 3, 2, 8, Activation::Tanh, 1e-3, seed);
        double worst_cnn = numeric_gradient_check(cnn, x, t, 1e-5, 12, seed);
        INFO("cnn seed " << seed);
        CHECK(worst_cnn < 1e-4);

        NeuralModel ae = build_ae(12, 4, 10, seed);
        double worst_ae = numeric_gradient_check(ae, x, x, 1e-5, 12, seed);
        INFO("ae seed " << seed);
        CHECK(worst_ae < 1e-4);
    }
}

TEST_CASE("model JSON round trip is bit-exact") {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    blob_data(X, y, 10, 14);
    NeuralModel m = build_mlp(2, 2, {5, 4}, Activation::Elu, 1e-4, 0.9, 14);
    train_classifier(m, X, y, TrainConfig{Optimizer::RMSProp, 0.01, 4, 8, 14});

    Json j = model_to_json(m);
    NeuralModel back = model_from_json(j);
    CHECK(back.same_network(m));
    for (const auto& x : X) CHECK(predict_proba(back, x) == predict_proba(m, x));

    std::string path = (std::filesystem::temp_directory_path() / "wfkit_model_rt.json").string();
    save_model(m, path);
    NeuralModel loaded = load_model(path);
    CHECK(loaded.same_network(m));
    std::remove(path.c_str());

    SECTION("autoencoder keeps its bottleneck marker") {
        NeuralModel ae = build_ae(4, 2, 6, 3);
        std::vector<std::vector<double>> A{{0, 1, 0, 1}, {1, 0, 1, 0}};
        train_autoencoder(ae, A, TrainConfig{Optimizer::Adam, 0.01, 2, 2, 3});
        NeuralModel ae2 = model_from_json(model_to_json(ae));
        CHECK(ae2.bottleneck_layer == 1);
        CHECK(encode(ae2, A[0]).values == encode(ae, A[0]).values);
    }
    SECTION("format guards") {
        Json bad = j;
        bad["format"] = "other";
        CHECK_THROWS_WITH(model_from_json(bad), ContainsSubstring("not a wfkit-model"));
        bad = j;
        bad["version"] = 99;
        CHECK_THROWS_WITH(model_from_json(bad), ContainsSubstring("unsupported version"));
        CHECK_THROWS_WITH(load_model("/nonexistent/m.json"), ContainsSubstring("cannot open model"));
    }
}

TEST_CASE("enum name parsing") {
    CHECK(optimizer_from_name("sgd") == Optimizer::SGD);
    CHECK(optimizer_from_name("adam") == Optimizer::Adam);
    CHECK(optimizer_from_name("rmsprop") == Optimizer::RMSProp);
    CHECK_THROWS_WITH(optimizer_from_name("lbfgs"), ContainsSubstring("unknown optimizer"));
    CHECK(activation_from_name("tanh") == Activation::Tanh);
    CHECK(activation_from_name("relu") == Activation::Relu);
    CHECK_THROWS_WITH(activation_from_name("swish"), ContainsSubstring("unknown activation"));
}
