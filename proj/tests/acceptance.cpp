// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Library criteria run in-process; the determinism criterion drives
// the installed binary named by the WFKIT_BIN environment variable.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <wfkit/classic.hpp>
#include <wfkit/common.hpp>
#include <wfkit/defense.hpp>
#include <wfkit/experiment.hpp>
#include <wfkit/features.hpp>
#include <wfkit/fingerprint.hpp>
#include <wfkit/forest.hpp>
#include <wfkit/html.hpp>
#include <wfkit/html_features.hpp>
#include <wfkit/lrp.hpp>
#include <wfkit/metrics.hpp>
#include <wfkit/neural.hpp>
#include <wfkit/tpe.hpp>
#include <wfkit/trace.hpp>

namespace fs = std::filesystem;
using namespace wfkit;
using Clock = std::chrono::steady_clock;

namespace {

bool g_all_ok = true;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int num, const std::string& what, bool ok, double secs) {
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  " << num << ". " << what << "  (" << std::fixed
         << std::setprecision(2) << secs << "s)";
    std::cout << line.str() << std::endl;
    if (!ok) g_all_ok = false;
}

template <typename Fn>
void criterion(int num, const std::string& what, Fn&& body) {
    Clock::time_point t0 = Clock::now();
    bool ok = false;
    std::string note;
    try {
        ok = body();
    } catch (const std::exception& e) {
        note = std::string("  [exception: ") + e.what() + "]";
    }
    report(num, what + note, ok, seconds_since(t0));
}

// ---------------------------------------------------------------- helpers

Dataset closed_world_dataset() {
    SyntheticConfig sc;
    sc.n_classes = 20;
    sc.n_instances = 90;
    sc.trace_len_mean = 120;
    sc.noise_rate = 0.05;
    return generate_synthetic(sc, 42);
}

std::vector<double> random_unit_vector(int dim, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (double& v : x) v = u(rng);
    return x;
}

// ---------------------------------------------------------------- 1. BDR

bool c1_bdr() {
    Clock::time_point t0 = Clock::now();
    double lo = bdr(0.94, 0.05, 9000, 20000);
    double hi = bdr(0.95, 0.003, 9000, 20000);
    return std::fabs(lo - 0.894) <= 0.005 && std::fabs(hi - 0.993) <= 0.005 &&
           seconds_since(t0) < 1.0;
}

// ---------------------------------------------------------------- 2. ranks

bool c2_rank_transform() {
    std::vector<std::vector<double>> m{{3, 19, 10}, {7, 10, 201}, {17, 7, 25}};
    std::vector<std::vector<double>> want{{1, 3, 1}, {2, 2, 3}, {3, 1, 2}};
    return rank_transform(m) == want;
}

// ---------------------------------------------------------------- 3. paths

bool c3_tag_paths() {
    DomTree dom = parse_html("<div><a><img></a></div><img>");
    std::vector<std::vector<std::string>> paths = tag_paths(dom);
    if (paths.size() != 4) return false;
    std::size_t depth = 0;
    for (const auto& p : paths) depth = std::max(depth, p.size());
    return depth == 3;
}

// ---------------------------------------------------------------- 4. grads

bool c4_gradient_checks() {
    Clock::time_point t0 = Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng = make_rng(seed, 4);
        std::uniform_int_distribution<int> cls(0, 2);

        NeuralModel mlp = build_mlp(12, 3, {8, 7}, Activation::Tanh, 1e-4, 1.0, seed);
        std::vector<double> x = random_unit_vector(12, rng);
        std::vector<double> target(3, 0.0);
        target[static_cast<std::size_t>(cls(rng))] = 1.0;
        worst = std::max(worst, numeric_gradient_check(mlp, x, target));

        NeuralModel cnn = build_cnn(14, 3, 4, 3, 2, 10, Activation::Tanh, 1e-4, seed);
        std::vector<double> xc = random_unit_vector(14, rng);
        std::vector<double> tc(3, 0.0);
        tc[static_cast<std::size_t>(cls(rng))] = 1.0;
        worst = std::max(worst, numeric_gradient_check(cnn, xc, tc));
    }
    return worst < 1e-4 && seconds_since(t0) < 30.0;
}

// ---------------------------------------------------------------- 5. LRP

bool c5_lrp() {
    // conservation: summed input relevance equals the decomposed class score
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng = make_rng(seed, 0);
        NeuralModel m = build_mlp(10, 4, {8, 6}, Activation::Tanh, 1e-4, 1.0, seed);
        std::vector<double> x = random_unit_vector(10, rng);
        RelevanceVector rv = lrp_w2(m, x, -1);
        double sum = 0.0;
        for (double s : rv.scores) sum += s;
        double z = logits(m, x)[static_cast<std::size_t>(rv.target)];
        if (std::fabs(sum - z) > 1e-6) return false;
    }

    // squared-weight proportionality on a single [3,4]-weight output unit
    NeuralModel tiny;
    tiny.input_dim = 2;
    tiny.output_dim = 2;
    tiny.loss = LossKind::CategoricalCrossEntropy;
    tiny.layers.push_back(
        {LayerSpec{LayerKind::SoftmaxOutput, 2, 0, 0, Activation::Linear, 0.0, 1.0}});
    detail::resolve_shapes(tiny);
    tiny.layers[0].w = {3.0, 4.0, 0.0, 0.0};
    tiny.layers[0].b = {0.0, 0.0};
    RelevanceVector rv = lrp_w2(tiny, {1.0, 1.0}, 0);
    double total = rv.scores[0] + rv.scores[1];
    if (total <= 0.0) return false;
    return std::fabs(rv.scores[0] / total - 0.36) <= 1e-9 &&
           std::fabs(rv.scores[1] / total - 0.64) <= 1e-9;
}

// ---------------------------------------------------------------- 6. closed

bool c6_closed_world() {
    Clock::time_point t0 = Clock::now();
    Dataset ds = closed_world_dataset();
    SplitPlan plan = split_iterations(ds, 0.6, 20, 42);

    ExperimentConfig mlp;
    mlp.pipeline = Pipeline::CellDirection;
    mlp.dim = 128;
    mlp.model = ModelKind::Mlp;
    mlp.mlp_hidden = {64, 64};
    mlp.keep_prob = 1.0;
    mlp.train = TrainConfig{Optimizer::SGD, 0.08, 15, 32, 42};
    double mlp_acc = run_experiment(ds, plan, mlp).accuracy.mean;

    ExperimentConfig cnn = mlp;
    cnn.model = ModelKind::Cnn;
    cnn.cnn_filters = 16;
    cnn.cnn_filter_width = 3;
    cnn.cnn_pool_width = 2;
    cnn.cnn_hidden = 48;
    cnn.train = TrainConfig{Optimizer::SGD, 0.1, 8, 32, 42};
    double cnn_acc = run_experiment(ds, plan, cnn).accuracy.mean;

    std::cout << "      closed world mean accuracy: mlp " << mlp_acc << ", cnn " << cnn_acc
              << "\n";
    return mlp_acc >= 0.95 && cnn_acc >= 0.95 && seconds_since(t0) < 600.0;
}

// ---------------------------------------------------------------- 7. open

bool c7_open_world() {
    SyntheticConfig sc;
    sc.n_classes = 20;
    sc.n_instances = 90;
    sc.n_background = 2000;
    sc.trace_len_mean = 120;
    sc.noise_rate = 0.05;
    Dataset ds = generate_synthetic(sc, 42);
    SplitPlan plan = split_iterations(ds, 0.9, 3, 42);

    ExperimentConfig ec;
    ec.pipeline = Pipeline::CellDirection;
    ec.dim = 96;
    ec.model = ModelKind::Mlp;
    ec.class_mode = ClassMode::Binary;
    ec.mlp_hidden = {640, 320};
    ec.keep_prob = 1.0;
    ec.train = TrainConfig{Optimizer::Adam, 0.001, 40, 32, 7};
    ec.policy.threshold = 0.5;
    ExperimentReport report = run_experiment(ds, plan, ec);

    std::cout << "      open world mean fpr at threshold 0.5: " << report.fpr.mean << "\n";
    if (report.fpr.mean > 0.02) return false;

    long prev_tp = -1, prev_tn = -1;
    for (int k = 0; k < 10; ++k) {
        ConfusionCounts c = redecide_at_threshold(report, static_cast<double>(k) / 10.0);
        if (k > 0 && (c.tp > prev_tp || c.tn < prev_tn)) return false;
        prev_tp = c.tp;
        prev_tn = c.tn;
    }
    return true;
}

// ---------------------------------------------------------------- 8. AE

bool c8_ae_parity() {
    Dataset ds = closed_world_dataset();
    SplitPlan plan = split_iterations(ds, 0.6, 1, 42);
    const SplitIteration& it = plan.iterations[0];
    std::vector<std::vector<double>> X = feature_matrix(ds, Pipeline::CellDirection, 96);
    std::vector<int> y = ds.ordinals();

    std::vector<std::vector<double>> train_X;
    std::vector<int> train_y;
    for (int i : it.train) {
        train_X.push_back(X[static_cast<std::size_t>(i)]);
        train_y.push_back(y[static_cast<std::size_t>(i)]);
    }

    auto knn_accuracy = [&](const std::vector<std::vector<double>>& rows) {
        std::vector<std::vector<double>> tr;
        for (int i : it.train) tr.push_back(rows[static_cast<std::size_t>(i)]);
        long hits = 0;
        for (int i : it.test)
            hits += knn_classify(tr, train_y, rows[static_cast<std::size_t>(i)], 2).label ==
                    y[static_cast<std::size_t>(i)];
        return static_cast<double>(hits) / static_cast<double>(it.test.size());
    };

    auto encoded_rows = [&](int bottleneck) {
        NeuralModel ae = build_ae(96, bottleneck, 256, 42);
        train_autoencoder(ae, train_X, TrainConfig{Optimizer::Adam, 0.001, 30, 64, 7});
        std::vector<std::vector<double>> rows;
        rows.reserve(X.size());
        for (const auto& row : X) rows.push_back(encode(ae, row).values);
        return rows;
    };

    double raw = knn_accuracy(X);
    double ae80 = knn_accuracy(encoded_rows(80));
    double ae20 = knn_accuracy(encoded_rows(20));
    std::cout << "      knn accuracy: raw " << raw << ", ae-80 " << ae80 << ", ae-20 " << ae20
              << "\n";
    return std::fabs(ae20 - ae80) <= 0.03 && std::fabs(ae80 - raw) <= 0.05 &&
           std::fabs(ae20 - raw) <= 0.05;
}

// ---------------------------------------------------------------- 9. brutes

int brute_knn(const std::vector<std::vector<double>>& tx, const std::vector<int>& ty,
              const std::vector<double>& q, int k) {
    std::vector<std::pair<double, int>> d;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            double diff = tx[i][j] - q[j];
            s += diff * diff;
        }
        d.emplace_back(std::sqrt(s), static_cast<int>(i));
    }
    int n_classes = 1 + *std::max_element(ty.begin(), ty.end());
    std::vector<double> score(static_cast<std::size_t>(n_classes), 0.0);
    std::vector<char> used(d.size(), 0);
    for (int round = 0; round < k; ++round) {  // selection by repeated minimum scan
        int pick = -1;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (used[i]) continue;
            if (pick < 0 || d[i] < d[static_cast<std::size_t>(pick)]) pick = static_cast<int>(i);
        }
        used[static_cast<std::size_t>(pick)] = 1;
        int idx = d[static_cast<std::size_t>(pick)].second;
        score[static_cast<std::size_t>(ty[static_cast<std::size_t>(idx)])] +=
            1.0 / (d[static_cast<std::size_t>(pick)].first + 1e-12);
    }
    int best = 0;
    for (int c = 1; c < n_classes; ++c)
        if (score[static_cast<std::size_t>(c)] > score[static_cast<std::size_t>(best)]) best = c;
    return best;
}

int brute_kfp(const std::vector<LeafVector>& lv, const std::vector<int>& ty,
              const LeafVector& q, int k, int n_classes) {
    std::vector<std::pair<int, int>> d;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        int h = 0;
        for (std::size_t j = 0; j < q.size(); ++j) h += lv[i][j] != q[j];
        d.emplace_back(h, static_cast<int>(i));
    }
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    std::vector<long> summed(static_cast<std::size_t>(n_classes), 0);
    std::vector<char> used(d.size(), 0);
    for (int round = 0; round < k; ++round) {
        int pick = -1;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (used[i]) continue;
            if (pick < 0 || d[i] < d[static_cast<std::size_t>(pick)]) pick = static_cast<int>(i);
        }
        used[static_cast<std::size_t>(pick)] = 1;
        int label = ty[static_cast<std::size_t>(d[static_cast<std::size_t>(pick)].second)];
        ++votes[static_cast<std::size_t>(label)];
        summed[static_cast<std::size_t>(label)] += d[static_cast<std::size_t>(pick)].first;
    }
    int best = -1;
    for (int c = 0; c < n_classes; ++c) {
        if (votes[static_cast<std::size_t>(c)] == 0) continue;
        if (best < 0 || votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)] ||
            (votes[static_cast<std::size_t>(c)] == votes[static_cast<std::size_t>(best)] &&
             summed[static_cast<std::size_t>(c)] < summed[static_cast<std::size_t>(best)]))
            best = c;
    }
    return best;
}

bool c9_classic_oracles() {
    Rng rng = make_rng(123, 0);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    std::uniform_int_distribution<int> cls(0, 3);

    std::vector<std::vector<double>> tx;
    std::vector<int> ty;
    for (int i = 0; i < 80; ++i) {
        std::vector<double> row(6);
        ty.push_back(cls(rng));
        for (double& v : row) v = u(rng) + ty.back();
        tx.push_back(row);
    }
    DecisionForest forest = train_forest(tx, ty, 15, 0, 9);
    std::vector<LeafVector> lv;
    for (const auto& row : tx) lv.push_back(leaf_vector(forest, row));

    for (int q = 0; q < 100; ++q) {
        std::vector<double> query(6);
        for (double& v : query) v = u(rng) + cls(rng);
        int k = 1 + q % 7;
        if (knn_classify(tx, ty, query, k).label != brute_knn(tx, ty, query, k)) return false;
        if (kfp_classify(forest, lv, ty, query, k) !=
            brute_kfp(lv, ty, leaf_vector(forest, query), k, forest.n_classes))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------- 10. gini

bool c10_gini_importance() {
    Rng rng = make_rng(3, 0);
    std::uniform_real_distribution<double> noise(-0.2, 0.2);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 40; ++i) {
            // Feature 0 carries the class; the other four are flat, so they can
            // never support a split and all importance must land on feature 0.
            std::vector<double> row(5, 0.5);
            row[0] = c + noise(rng);
            X.push_back(row);
            y.push_back(c);
        }
    DecisionForest f = train_forest(X, y, 40, 0, 3);
    std::vector<double> imp = gini_importance(f);
    double sum = 0.0;
    for (double v : imp) sum += v;
    return imp[0] > 0.9 && std::fabs(sum - 1.0) <= 1e-9;
}

// ---------------------------------------------------------------- 11. defense

bool c11_defenses() {
    TraceRecord trace;
    trace.label = "site";
    trace.events.push_back(TraceEvent{0.0, Direction::Outgoing, 800});
    trace.events.push_back(TraceEvent{0.01, Direction::Incoming, 600});

    auto direction_ok = [](const TraceRecord& t, Direction d, double rho, int size,
                           long pad_multiple) {
        std::vector<double> times;
        for (const TraceEvent& e : t.events)
            if (e.direction == d) {
                if (e.size != size) return false;
                times.push_back(e.time);
            }
        if (pad_multiple > 0 && static_cast<long>(times.size()) % pad_multiple != 0) return false;
        for (std::size_t i = 1; i < times.size(); ++i)
            if (std::fabs(times[i] - times[i - 1] - rho) > 1e-9) return false;
        return true;
    };

    TraceRecord buflo = apply_buflo(trace, BufloParams{512, 0.02, 0.1});
    if (!direction_ok(buflo, Direction::Outgoing, 0.02, 512, 0)) return false;
    if (!direction_ok(buflo, Direction::Incoming, 0.02, 512, 0)) return false;
    if (buflo.total_payload_bytes() != trace.total_payload_bytes()) return false;

    TraceRecord tam = apply_tamaraw(trace, TamarawParams{0.04, 0.012, 4, 512});
    if (!direction_ok(tam, Direction::Outgoing, 0.04, 512, 4)) return false;
    if (!direction_ok(tam, Direction::Incoming, 0.012, 512, 4)) return false;
    if (tam.total_payload_bytes() != trace.total_payload_bytes()) return false;

    TraceRecord orig;
    orig.label = "x";
    orig.events.push_back(TraceEvent{0.0, Direction::Outgoing, 100});
    TraceRecord defended;
    defended.label = "x";
    defended.events.push_back(TraceEvent{0.0, Direction::Outgoing, 317});
    return std::fabs(bandwidth_overhead(orig, defended) - 217.0) <= 1e-9;
}

// ---------------------------------------------------------------- 12. TPE

bool c12_tpe() {
    SearchSpace space;
    space.dims.push_back(Dim::continuous("x", 0.0, 1.0));
    auto objective = [](const Params& p) {
        double x = p.at("x").number;
        return (x - 0.3) * (x - 0.3);
    };

    int close = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SearchResult r = optimize(objective, space, 60, seed, SearchStrategy::TPE);
        if (std::fabs(r.best.params.at("x").number - 0.3) < 0.05) ++close;
    }
    std::cout << "      tpe within 0.05 of the optimum in " << close << "/10 seeds\n";
    if (close < 9) return false;

    double tpe_sum = 0.0, rand_sum = 0.0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        tpe_sum += optimize(objective, space, 60, seed, SearchStrategy::TPE).best.objective;
        rand_sum += optimize(objective, space, 60, seed, SearchStrategy::Random).best.objective;
    }
    std::cout << "      mean best objective: tpe " << tpe_sum / 20.0 << ", random "
              << rand_sum / 20.0 << "\n";
    return tpe_sum < rand_sum;
}

// ---------------------------------------------------------------- 13. FP

bool c13_fp_pipeline() {
    const int n_sites = 30, n_inst = 6;
    Rng rng = make_rng(42, 0);
    std::uniform_int_distribution<int> few(1, 3), many(10, 14), links_per(1, 3), filler(2, 6);
    std::uniform_real_distribution<double> hi_acc(0.92, 0.98), lo_acc(0.02, 0.08);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> X;
    std::vector<std::string> sites;
    std::map<std::string, double> site_acc;

    for (int s = 0; s < n_sites; ++s) {
        const bool fp = s < n_sites / 2;  // well-identified sites load few third-party hosts
        std::string site = "site" + std::to_string(s) + ".example";
        site_acc[site] = fp ? hi_acc(rng) : lo_acc(rng);
        for (int j = 0; j < n_inst; ++j) {
            int k = fp ? few(rng) : many(rng);
            std::string html = "<html><head><title>Site " + std::to_string(s) +
                               "</title></head><body>";
            int nf = filler(rng);
            for (int f = 0; f < nf; ++f)
                html += "<div><p>lorem ipsum " + std::to_string(f) + "</p><span>x</span></div>";
            for (int d = 0; d < k; ++d) {
                int nl = links_per(rng);
                for (int l = 0; l < nl; ++l)
                    html += "<a href=\"https://cdn" + std::to_string(d) + ".site" +
                            std::to_string(s) + ".example/p" + std::to_string(l) +
                            "\">link</a>";
            }
            if (unit(rng) < 0.5) html += "<img src=\"/logo.png\">";
            html += "</body></html>";
            std::map<std::string, double> meta{
                {"capture_bytes", 40000.0 + 2000.0 * unit(rng)},
                {"html_bytes", static_cast<double>(html.size())},
                {"duration_seconds", 1.0 + unit(rng)}};
            X.push_back(
                extract_html_features(parse_html(html), meta, "https://" + site + "/"));
            sites.push_back(site);
        }
    }

    std::vector<std::vector<double>> XR = rank_transform(X);
    FpConfig fc;
    fc.ratio = 0.6;
    fc.n_iters = 5;
    fc.hidden = {64, 64};
    fc.keep_prob = 1.0;
    fc.train = TrainConfig{Optimizer::SGD, 0.05, 30, 16, 7};

    for (double th : {0.1, 0.2, 0.3, 0.4, 0.9}) {
        FpReport rep = run_fp_experiment(XR, sites, site_acc, th, fc);
        std::cout << "      threshold " << th << ": weighted accuracy "
                  << rep.weighted_accuracy.mean << ", weighted mse " << rep.weighted_mse.mean
                  << "\n";
        if (rep.weighted_accuracy.mean < 0.95 || rep.weighted_mse.mean > 0.05) return false;
    }
    return true;
}

// ---------------------------------------------------------------- 14. top-k

bool c14_topk() {
    Rng rng = make_rng(55, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, 5);
    const int bg = 5;

    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> p(6);
        double sum = 0.0;
        for (double& v : p) {
            v = u(rng) + 1e-6;
            sum += v;
        }
        for (double& v : p) v /= sum;
        int truth = cls(rng);

        if (topk_outcome(p, 1, truth, bg) != classify_outcome(truth, argmax_label(p), bg))
            return false;

        std::vector<int> order{0, 1, 2, 3, 4, 5};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)]; });
        for (int k = 1; k <= 6; ++k) {
            bool bg_in_top = std::find(order.begin(), order.begin() + k, bg) != order.begin() + k;
            Outcome o = topk_outcome(p, k, truth, bg);
            if (truth != bg && bg_in_top && o != Outcome::FN) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- 15. CLI

int run_cli(const std::string& args) {
    const char* b = std::getenv("WFKIT_BIN");
    if (!b) throw Error("WFKIT_BIN not set");
    std::string full = std::string(b) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(full.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool c15_determinism() {
    fs::path root = fs::temp_directory_path() / ("wfkit_acceptance_" + std::to_string(::getpid()));
    fs::path out = root / "out";
    fs::path pages = root / "pages";
    fs::create_directories(out);
    fs::create_directories(pages);

    auto put = [](const fs::path& p, const std::string& body) {
        std::ofstream f(p, std::ios::binary);
        f << body;
    };
    put(pages / "s0_0.html", "<html><body><a href=\"https://a.net/x.png\">p</a>"
                             "<img src=\"/i.jpg\"></body></html>");
    put(pages / "s0_1.html", "<html><body><a href=\"https://a.net/y.png\">q</a>"
                             "<img src=\"/j.jpg\"></body></html>");
    put(pages / "s1_0.html", "<html><body><p>tiny page</p></body></html>");
    put(pages / "s1_1.html", "<html><body><p>small page</p></body></html>");
    put(root / "meta.csv",
        "instance_id,site,capture_bytes,html_bytes,duration_seconds\n"
        "s0_0,s0,4000,900,1.2\n"
        "s0_1,s0,4100,910,1.3\n"
        "s1_0,s1,900,100,0.4\n"
        "s1_1,s1,950,110,0.5\n");
    put(root / "acc.csv", "site,accuracy\ns0,0.9\ns1,0.1\n");
    put(root / "space.json",
        "{\"space\": [{\"name\": \"learning_rate\", \"kind\": \"continuous\","
        " \"lo\": 0.02, \"hi\": 0.3, \"log\": true},"
        "{\"name\": \"epochs\", \"kind\": \"int\", \"lo\": 1, \"hi\": 3}]}\n");

    const std::string o = " --out " + out.string();
    const std::string data = " --data " + (out / "dataset.jsonl").string();
    const std::string tiny = " --dim 12 --hidden1 8 --hidden2 8 --keep-prob 1"
                             " --optimizer sgd --lr 0.1 --epochs 2 --batch 8";
    std::vector<std::string> commands = {
        "synth --classes 3 --instances 5 --background 6 --trace-len 12 --noise 0.05 --seed 11" + o,
        "train" + data + tiny + " --seed 1" + o,
        "eval" + data + tiny +
            " --class-mode binary --threshold 0.5 --ratio 0.5 --iterations 2 --jobs 1 --seed 2" + o,
        "tune" + data +
            " --dim 12 --ratio 0.6 --strategy tpe --budget 3 --hidden1 6 --hidden2 6"
            " --optimizer sgd --lr 0.05 --epochs 2 --batch 8 --seed 3 --config " +
            (root / "space.json").string() + o,
        "encode" + data + " --dim 12 --bottleneck 3 --ae-hidden 6 --epochs 2 --batch 8 --seed 4" + o,
        "lrp" + data + " --model " + (out / "model.json").string() + " --limit 5" + o,
        "defend" + data + " --defense tamaraw --pad-multiple 10" + o,
        "htmlfeat --html-dir " + pages.string() + " --meta " + (root / "meta.csv").string() + o,
        "fp --features " + (out / "html_features.csv").string() + " --accuracy " +
            (root / "acc.csv").string() +
            " --thresholds 0.5 --ratio 0.5 --iterations 2 --hidden1 6 --hidden2 6"
            " --optimizer sgd --lr 0.1 --epochs 3 --batch 2 --seed 6" + o,
    };

    for (const std::string& cmd : commands)
        if (run_cli(cmd) != 0) {
            std::cout << "      first pass failed: " << cmd.substr(0, cmd.find(' ')) << "\n";
            return false;
        }

    std::map<std::string, std::string> snapshot;
    for (const auto& e : fs::directory_iterator(out))
        if (e.is_regular_file()) snapshot[e.path().filename().string()] = slurp(e.path());

    for (const std::string& cmd : commands)
        if (run_cli(cmd) != 0) {
            std::cout << "      second pass failed: " << cmd.substr(0, cmd.find(' ')) << "\n";
            return false;
        }

    std::size_t seen = 0;
    for (const auto& e : fs::directory_iterator(out)) {
        if (!e.is_regular_file()) continue;
        ++seen;
        auto it = snapshot.find(e.path().filename().string());
        if (it == snapshot.end() || slurp(e.path()) != it->second) {
            std::cout << "      output differs: " << e.path().filename().string() << "\n";
            return false;
        }
    }
    return seen == snapshot.size() && seen >= 20;
}

}  // namespace

int main() {
    Clock::time_point t0 = Clock::now();
    criterion(1, "bayesian detection rate matches both reference points within 0.005", c1_bdr);
    criterion(2, "rank transform reproduces the worked 3x3 example exactly", c2_rank_transform);
    criterion(3, "tag-path extraction finds 4 paths with max depth 3", c3_tag_paths);
    criterion(4, "dense and conv gradients match finite differences within 1e-4 (5 seeds)",
              c4_gradient_checks);
    criterion(5, "relevance propagation conserves scores and splits [3,4] into [0.36,0.64]",
              c5_lrp);
    criterion(6, "closed world: mlp and cnn mean accuracy >= 0.95 over 20 iterations",
              c6_closed_world);
    criterion(7, "open world: binary fpr <= 0.02 at threshold 0.5, sweep monotone", c7_open_world);
    criterion(8, "autoencoder features keep knn parity (20-dim vs 80-dim vs raw)", c8_ae_parity);
    criterion(9, "knn and leaf-vector classifiers agree with brute force on 100 queries",
              c9_classic_oracles);
    criterion(10, "gini importance concentrates on the informative feature and sums to 1",
              c10_gini_importance);
    criterion(11, "padding defenses keep exact schedules, quantization, byte conservation",
              c11_defenses);
    criterion(12, "tpe beats random search and localizes the quadratic optimum", c12_tpe);
    criterion(13, "fingerprintability pipeline separates the planted corpus at all thresholds",
              c13_fp_pipeline);
    criterion(14, "top-1 equals argmax; background inside top-k always forces FN", c14_topk);
    criterion(15, "all nine commands re-run byte-identical outputs", c15_determinism);

    std::cout << (g_all_ok ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "  (total "
              << std::fixed << std::setprecision(1) << seconds_since(t0) << "s)" << std::endl;
    return g_all_ok ? 0 : 1;
}
