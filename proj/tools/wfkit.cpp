// wfkit — traffic-trace analysis toolkit command line.
//
// Every subcommand reads an optional JSON config file (--config); explicit
// flags override config fields.  Outputs are written atomically (temp file +
// rename, committed together at the end) and each output embeds the config
// hash and seed, so re-running a command with the same config and seed
// reproduces the outputs byte for byte.

#include <CLI11.hpp>

#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wfkit/classic.hpp"
#include "wfkit/common.hpp"
#include "wfkit/csvio.hpp"
#include "wfkit/dataset_io.hpp"
#include "wfkit/defense.hpp"
#include "wfkit/experiment.hpp"
#include "wfkit/features.hpp"
#include "wfkit/fingerprint.hpp"
#include "wfkit/forest.hpp"
#include "wfkit/html.hpp"
#include "wfkit/html_features.hpp"
#include "wfkit/lrp.hpp"
#include "wfkit/metrics.hpp"
#include "wfkit/model_io.hpp"
#include "wfkit/neural.hpp"
#include "wfkit/runconfig.hpp"
#include "wfkit/tpe.hpp"
#include "wfkit/trace.hpp"

namespace {

using namespace wfkit;

// Binds CLI flags to config keys: effective config = command defaults,
// overridden by the config file, overridden by explicitly passed flags.
class ConfigCli {
  public:
    ConfigCli(CLI::App* cmd, bool need_seed) : cmd_(cmd) {
        cmd_->add_option("--config", config_path_, "JSON config file; flags override its fields");
        out_opt_ = cmd_->add_option("--out", out_flag_,
                                    "output directory (default: $WFKIT_OUT or current directory)");
        seed_opt_ = cmd_->add_option("--seed", seed_flag_, "random seed");
        if (need_seed) seed_opt_->required();
    }

    CLI::Option* number(const std::string& flag, const std::string& key, double def,
                        const std::string& help) {
        dvals_.push_back(def);
        double& slot = dvals_.back();
        CLI::Option* o = cmd_->add_option(flag, slot, help);
        bound_.push_back({o, key, [&slot]() { return Json(slot); }});
        config_set(defaults_, key, def);
        return o;
    }

    CLI::Option* integer(const std::string& flag, const std::string& key, long long def,
                         const std::string& help) {
        ivals_.push_back(def);
        long long& slot = ivals_.back();
        CLI::Option* o = cmd_->add_option(flag, slot, help);
        bound_.push_back({o, key, [&slot]() { return Json(slot); }});
        config_set(defaults_, key, def);
        return o;
    }

    CLI::Option* text(const std::string& flag, const std::string& key, const std::string& def,
                      const std::string& help) {
        svals_.push_back(def);
        std::string& slot = svals_.back();
        CLI::Option* o = cmd_->add_option(flag, slot, help);
        bound_.push_back({o, key, [&slot]() { return Json(slot); }});
        config_set(defaults_, key, def);
        return o;
    }

    CLI::Option* toggle(const std::string& flag, const std::string& key, bool def,
                        const std::string& help) {
        bvals_.push_back(def);
        bool& slot = bvals_.back();
        CLI::Option* o = cmd_->add_flag(flag, slot, help);
        bound_.push_back({o, key, [&slot]() { return Json(slot); }});
        config_set(defaults_, key, def);
        return o;
    }

    // default array-valued key (e.g. a search space); file/flag content is
    // validated by the command, not by the unknown-key check
    void array_default(const std::string& key, Json def) { config_set(defaults_, key, std::move(def)); }

    void resolve() {
        eff_ = defaults_;
        if (!config_path_.empty()) eff_.merge_patch(load_config_file(config_path_));
        for (const Bound& b : bound_)
            if (b.opt->count() > 0) config_set(eff_, b.key, b.get());

        if (seed_opt_->count() > 0) {
            seed_ = seed_flag_;
        } else if (const Json* s = config_find(eff_, "seed")) {
            if (!s->is_number_integer() || s->get<long long>() < 0)
                throw Error("config field 'seed' must be a non-negative integer");
            seed_ = s->get<std::uint64_t>();
        }
        if (out_opt_->count() > 0) {
            out_dir_ = out_flag_;
        } else if (const Json* o = config_find(eff_, "out")) {
            if (!o->is_string()) throw Error("config field 'out' must be a string");
            out_dir_ = o->get<std::string>();
        } else {
            const char* env = std::getenv("WFKIT_OUT");
            out_dir_ = env && *env ? env : ".";
        }
        eff_.erase("seed");
        eff_.erase("out");
        check_unknown(eff_, defaults_, "");
    }

    Json& eff() { return eff_; }
    std::uint64_t seed() const { return seed_; }
    std::string path(const std::string& name) const { return out_dir_ + "/" + name; }

    const std::string& hash() {
        if (hash_.empty()) {
            Json h = eff_;
            // execution details, not part of the experiment identity
            h.erase("jobs");
            h.erase("resume");
            hash_ = config_hash(h);
        }
        return hash_;
    }

    Json meta(const char* command) {
        Json j;
        j["command"] = command;
        j["config_hash"] = hash();
        j["seed"] = seed_;
        return j;
    }

  private:
    struct Bound {
        CLI::Option* opt;
        std::string key;
        std::function<Json()> get;
    };

    static void check_unknown(const Json& eff, const Json& defaults, const std::string& prefix) {
        for (const auto& [key, value] : eff.items()) {
            std::string dotted = prefix.empty() ? key : prefix + "." + key;
            auto it = defaults.find(key);
            if (it == defaults.end()) throw Error("unknown config field '" + dotted + "'");
            if (it->is_object() && value.is_object()) check_unknown(value, *it, dotted);
        }
    }

    CLI::App* cmd_;
    std::string config_path_, out_flag_, out_dir_ = ".";
    CLI::Option* out_opt_ = nullptr;
    CLI::Option* seed_opt_ = nullptr;
    std::uint64_t seed_flag_ = 0, seed_ = 0;
    std::deque<double> dvals_;
    std::deque<long long> ivals_;
    std::deque<std::string> svals_;
    std::deque<bool> bvals_;
    std::vector<Bound> bound_;
    Json defaults_ = Json::object();
    Json eff_;
    std::string hash_;
};

long long require_int(const Json& eff, const std::string& key, long long lo, long long hi) {
    long long v = config_int(eff, key, 0);
    if (v < lo || v > hi)
        throw Error("config field '" + key + "' must lie in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
    return v;
}

double require_number(const Json& eff, const std::string& key, double lo, double hi) {
    double v = config_number(eff, key, 0.0);
    if (!(v >= lo && v <= hi))
        throw Error("config field '" + key + "' must lie in [" + format_double(lo) + ", " +
                    format_double(hi) + "]");
    return v;
}

std::string require_text(const Json& eff, const std::string& key) {
    std::string v = config_string(eff, key, "");
    if (v.empty()) throw Error("config field '" + key + "' is required");
    return v;
}

Json summary_json(const Summary& s) {
    Json j;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    return j;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// shared hyperparameter block for the neural commands
struct ArchKeys {
    void add(ConfigCli& cli, long long h1 = 650, long long h2 = 650, double keep = 0.8) {
        cli.integer("--hidden1", "hidden1", h1, "first hidden layer width");
        cli.integer("--hidden2", "hidden2", h2, "second hidden layer width");
        cli.number("--l2", "l2", 1e-4, "L2 weight penalty");
        cli.number("--keep-prob", "keep_prob", keep, "dropout keep probability (1 disables)");
        cli.integer("--filters", "filters", 32, "conv filters (cnn)");
        cli.integer("--filter-width", "filter_width", 3, "conv filter width (cnn)");
        cli.integer("--pool-width", "pool_width", 2, "max-pool width (cnn)");
        cli.integer("--cnn-hidden", "cnn_hidden", 256, "dense layer width after pooling (cnn)");
    }
};

struct TrainKeys {
    void add(ConfigCli& cli, const char* opt = "sgd", double lr = 0.085, long long epochs = 30,
             long long batch = 32) {
        cli.text("--optimizer", "optimizer", opt, "sgd | adam | rmsprop");
        cli.number("--lr", "learning_rate", lr, "learning rate");
        cli.integer("--epochs", "epochs", epochs, "training epochs");
        cli.integer("--batch", "batch_size", batch, "mini-batch size");
    }

    static TrainConfig read(const Json& eff, std::uint64_t seed) {
        TrainConfig tc;
        tc.optimizer = optimizer_from_name(require_text(eff, "optimizer"));
        tc.learning_rate = require_number(eff, "learning_rate", 1e-9, 10.0);
        tc.epochs = static_cast<int>(require_int(eff, "epochs", 1, 100000));
        tc.batch_size = static_cast<int>(require_int(eff, "batch_size", 1, 1000000));
        tc.seed = seed;
        return tc;
    }
};

ClassMode class_mode_from(const std::string& s) {
    if (s == "multiclass") return ClassMode::Multiclass;
    if (s == "binary") return ClassMode::Binary;
    throw Error("config field 'class_mode' must be 'multiclass' or 'binary'");
}

NeuralModel build_from_config(const Json& eff, const std::string& kind, int dim, int n_classes,
                              std::uint64_t seed) {
    double l2 = require_number(eff, "l2", 0.0, 1.0);
    if (kind == "mlp") {
        std::vector<int> hidden = {static_cast<int>(require_int(eff, "hidden1", 1, 100000)),
                                   static_cast<int>(require_int(eff, "hidden2", 1, 100000))};
        double keep = require_number(eff, "keep_prob", 1e-6, 1.0);
        return build_mlp(dim, n_classes, hidden, Activation::Tanh, l2, keep, seed);
    }
    if (kind == "cnn") {
        return build_cnn(dim, n_classes, static_cast<int>(require_int(eff, "filters", 1, 10000)),
                         static_cast<int>(require_int(eff, "filter_width", 1, 10000)),
                         static_cast<int>(require_int(eff, "pool_width", 1, 10000)),
                         static_cast<int>(require_int(eff, "cnn_hidden", 1, 100000)),
                         Activation::Tanh, l2, seed);
    }
    throw Error("config field 'model' must be 'mlp' or 'cnn'");
}

// ---------------------------------------------------------------- synth

void cmd_synth(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    SyntheticConfig sc;
    sc.n_classes = static_cast<int>(require_int(eff, "classes", 1, 100000));
    sc.n_instances = static_cast<int>(require_int(eff, "instances", 1, 1000000));
    sc.n_background = static_cast<int>(require_int(eff, "background", 0, 10000000));
    sc.trace_len_mean = static_cast<int>(require_int(eff, "trace_len", 1, 10000000));
    sc.noise_rate = require_number(eff, "noise", 0.0, 1.0);

    Dataset ds = generate_synthetic(sc, cli.seed());

    std::ostringstream body;
    write_jsonl(body, ds, cli.meta("synth"));
    OutputSet out;
    std::string path = cli.path(require_text(eff, "output"));
    out.add(path, body.str());
    out.commit();
    std::cout << "wrote " << path << " (" << ds.records.size() << " records, "
              << ds.class_index.size() << " classes)\n";
}

// ---------------------------------------------------------------- train

void cmd_train(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string kind = require_text(eff, "model");
    if (kind != "mlp" && kind != "cnn" && kind != "ae")
        throw Error("config field 'model' must be 'mlp', 'cnn' or 'ae'");
    Pipeline pipeline = pipeline_from_name(require_text(eff, "pipeline"));
    const int dim = static_cast<int>(require_int(eff, "dim", 1, 10000000));

    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;
    std::vector<std::vector<double>> X = feature_matrix(ds, pipeline, dim);

    NeuralModel model;
    TrainResult result;
    TrainConfig tc = TrainKeys::read(eff, cli.seed());
    if (static_cast<std::size_t>(tc.batch_size) > X.size())
        tc.batch_size = static_cast<int>(X.size());
    int n_classes = 0;
    if (kind == "ae") {
        const int bottleneck = static_cast<int>(require_int(eff, "bottleneck", 1, 10000000));
        const int ae_hidden = static_cast<int>(require_int(eff, "ae_hidden", 1, 100000));
        model = build_ae(dim, bottleneck, ae_hidden, cli.seed());
        result = train_autoencoder(model, X, tc);
    } else {
        ClassMode mode = class_mode_from(require_text(eff, "class_mode"));
        std::vector<int> y = evaluation_labels(ds, mode);
        n_classes = evaluation_n_classes(ds, mode);
        model = build_from_config(eff, kind, dim, n_classes, cli.seed());
        result = train_classifier(model, X, y, tc);
    }

    Json mj = model_to_json(model);
    mj["command"] = "train";
    mj["config_hash"] = cli.hash();
    mj["seed"] = cli.seed();
    mj["pipeline"] = pipeline_name(pipeline);
    mj["dim"] = dim;
    if (kind != "ae") mj["class_mode"] = require_text(eff, "class_mode");

    Json rj = cli.meta("train");
    rj["model"] = kind;
    rj["n_records"] = ds.records.size();
    rj["n_classes"] = n_classes;
    rj["input_dim"] = dim;
    rj["epoch_loss"] = result.epoch_loss;
    rj["final_loss"] = result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back();

    OutputSet out;
    std::string mpath = cli.path(require_text(eff, "model_output"));
    std::string rpath = cli.path(require_text(eff, "report_output"));
    out.add(mpath, mj.dump(2) + "\n");
    out.add(rpath, rj.dump(2) + "\n");
    out.commit();
    std::cout << "trained " << kind << " on " << ds.records.size() << " records; final loss "
              << format_double(rj["final_loss"].get<double>()) << "\n"
              << "wrote " << mpath << "\n"
              << "wrote " << rpath << "\n";
}

// ---------------------------------------------------------------- eval

void cmd_eval(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string kind = require_text(eff, "model");
    if (kind != "mlp" && kind != "cnn")
        throw Error("config field 'model' must be 'mlp' or 'cnn'");

    ExperimentConfig ec;
    ec.pipeline = pipeline_from_name(require_text(eff, "pipeline"));
    ec.dim = static_cast<int>(require_int(eff, "dim", 1, 10000000));
    ec.model = kind == "mlp" ? ModelKind::Mlp : ModelKind::Cnn;
    ec.class_mode = class_mode_from(require_text(eff, "class_mode"));
    ec.mlp_hidden = {static_cast<int>(require_int(eff, "hidden1", 1, 100000)),
                     static_cast<int>(require_int(eff, "hidden2", 1, 100000))};
    ec.l2 = require_number(eff, "l2", 0.0, 1.0);
    ec.keep_prob = require_number(eff, "keep_prob", 1e-6, 1.0);
    ec.cnn_filters = static_cast<int>(require_int(eff, "filters", 1, 10000));
    ec.cnn_filter_width = static_cast<int>(require_int(eff, "filter_width", 1, 10000));
    ec.cnn_pool_width = static_cast<int>(require_int(eff, "pool_width", 1, 10000));
    ec.cnn_hidden = static_cast<int>(require_int(eff, "cnn_hidden", 1, 100000));
    ec.train = TrainKeys::read(eff, cli.seed());
    ec.policy.threshold = require_number(eff, "threshold", 0.0, 0.999999);
    ec.policy.top_k = static_cast<int>(require_int(eff, "top_k", 0, 100000));
    ec.jobs = static_cast<int>(require_int(eff, "jobs", 1, 256));

    const double ratio = require_number(eff, "ratio", 1e-9, 1.0 - 1e-9);
    const int iterations = static_cast<int>(require_int(eff, "iterations", 1, 100000));

    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;
    SplitPlan plan = split_iterations(ds, ratio, iterations, cli.seed());
    ExperimentReport report = run_experiment(ds, plan, ec);

    ConfusionCounts pooled;
    for (const IterationResult& r : report.iterations) {
        pooled.tp += r.counts.tp;
        pooled.fp += r.counts.fp;
        pooled.tn += r.counts.tn;
        pooled.fn += r.counts.fn;
    }

    Json mjson = cli.meta("eval");
    mjson["open_world"] = report.open_world;
    mjson["n_classes"] = report.n_classes;
    mjson["background_ordinal"] = report.background_ordinal;
    mjson["iterations"] = report.iterations.size();
    mjson["accuracy"] = summary_json(report.accuracy);
    mjson["tpr"] = summary_json(report.tpr);
    mjson["fpr"] = report.open_world ? summary_json(report.fpr) : Json();
    mjson["bdr"] = report.open_world ? summary_json(report.bdr_summary) : Json();
    mjson["wmacc"] = summary_json(report.wmacc_summary);
    Json pc;
    pc["tp"] = pooled.tp;
    pc["fp"] = pooled.fp;
    pc["tn"] = pooled.tn;
    pc["fn"] = pooled.fn;
    mjson["pooled_counts"] = pc;

    const std::string stamp = csv_stamp(cli.hash(), cli.seed());

    std::ostringstream iters;
    iters << stamp << "iteration,accuracy,tp,fp,tn,fn,tpr,fpr,wmacc,bdr\n";
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
        const ConfusionCounts& c = report.iterations[i].counts;
        iters << i << ',' << format_double(report.iterations[i].accuracy) << ',' << c.tp << ','
              << c.fp << ',' << c.tn << ',' << c.fn << ',' << format_double(c.tpr()) << ','
              << format_double(c.fpr()) << ',' << format_double(wmacc(c)) << ',';
        if (report.open_world)
            iters << format_double(bdr(c.tpr(), c.fpr(), c.monitored(), c.background()));
        else
            iters << "na";
        iters << '\n';
    }

    std::ostringstream sites;
    sites << stamp << "site,accuracy\n";
    for (const auto& [site, acc] : site_accuracy_from_report(ds, report))
        sites << csv_cell(site) << ',' << format_double(acc) << '\n';

    OutputSet out;
    out.add(cli.path(require_text(eff, "metrics_output")), mjson.dump(2) + "\n");
    out.add(cli.path(require_text(eff, "iterations_output")), iters.str());
    out.add(cli.path(require_text(eff, "site_accuracy_output")), sites.str());
    if (report.open_world) {
        std::ostringstream sweep;
        sweep << stamp << "threshold,tp,fp,tn,fn,tpr,fpr,bdr\n";
        for (int k = 0; k < 10; ++k) {
            double t = static_cast<double>(k) / 10.0;
            ConfusionCounts c = redecide_at_threshold(report, t);
            sweep << format_double(t) << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn
                  << ',' << format_double(c.tpr()) << ',' << format_double(c.fpr()) << ','
                  << format_double(bdr(c.tpr(), c.fpr(), c.monitored(), c.background())) << '\n';
        }
        out.add(cli.path(require_text(eff, "sweep_output")), sweep.str());
    }
    out.commit();

    std::cout << "eval: accuracy " << format_double(report.accuracy.mean) << " +/- "
              << format_double(report.accuracy.stddev) << " over " << report.iterations.size()
              << " iterations\n";
    if (report.open_world)
        std::cout << "      tpr " << format_double(report.tpr.mean) << ", fpr "
                  << format_double(report.fpr.mean) << ", bdr "
                  << format_double(report.bdr_summary.mean) << "\n";
    std::cout << "wrote " << cli.path(require_text(eff, "metrics_output")) << "\n";
}

// ---------------------------------------------------------------- tune

SearchSpace space_from_config(const Json& eff) {
    static const std::set<std::string> numeric_names = {"learning_rate", "epochs", "batch_size",
                                                        "hidden",        "hidden1", "hidden2",
                                                        "keep_prob",     "l2"};
    static const std::set<std::string> text_names = {"optimizer", "activation"};
    const Json* arr = config_find(eff, "space");
    if (!arr || !arr->is_array() || arr->empty())
        throw Error("config field 'space' must be a non-empty array of dimensions");
    SearchSpace space;
    for (const Json& d : *arr) {
        if (!d.is_object() || !d.contains("name") || !d.contains("kind"))
            throw Error("config field 'space': each dimension needs 'name' and 'kind'");
        std::string name = d.at("name").get<std::string>();
        std::string kind = d.at("kind").get<std::string>();
        if (!numeric_names.count(name) && !text_names.count(name))
            throw Error("config field 'space': unknown parameter '" + name + "'");
        if (kind == "continuous") {
            if (text_names.count(name))
                throw Error("config field 'space': parameter '" + name + "' must be categorical");
            space.dims.push_back(Dim::continuous(name, d.value("lo", 0.0), d.value("hi", 1.0),
                                                 d.value("log", false)));
        } else if (kind == "int") {
            if (text_names.count(name))
                throw Error("config field 'space': parameter '" + name + "' must be categorical");
            space.dims.push_back(Dim::int_range(name, d.value("lo", 0LL), d.value("hi", 1LL)));
        } else if (kind == "categorical") {
            std::vector<std::string> options = d.value("options", std::vector<std::string>{});
            for (const std::string& o : options) {
                if (name == "optimizer") optimizer_from_name(o);
                if (name == "activation") activation_from_name(o);
            }
            space.dims.push_back(Dim::categorical(name, options));
        } else {
            throw Error("config field 'space': kind must be continuous, int or categorical");
        }
    }
    return space;
}

Json params_to_json(const Params& p) {
    Json j = Json::object();
    for (const auto& [name, v] : p) {
        if (v.is_text) j[name] = v.text;
        else j[name] = v.number;
    }
    return j;
}

Params params_from_json(const Json& j) {
    Params p;
    for (const auto& [name, v] : j.items()) {
        ParamValue pv;
        if (v.is_string()) {
            pv.is_text = true;
            pv.text = v.get<std::string>();
        } else if (v.is_number()) {
            pv.number = v.get<double>();
        } else {
            throw Error("trial history: parameter '" + name + "' is neither number nor string");
        }
        p[name] = pv;
    }
    return p;
}

void cmd_tune(ConfigCli& cli) {
    cli.resolve();
    Json& eff = cli.eff();
    const int budget = static_cast<int>(require_int(eff, "budget", 1, 100000));
    const double ratio = require_number(eff, "ratio", 1e-9, 1.0 - 1e-9);
    const std::string strategy_name = require_text(eff, "strategy");
    if (strategy_name != "tpe" && strategy_name != "random")
        throw Error("config field 'strategy' must be 'tpe' or 'random'");
    const SearchStrategy strategy =
        strategy_name == "tpe" ? SearchStrategy::TPE : SearchStrategy::Random;
    Pipeline pipeline = pipeline_from_name(require_text(eff, "pipeline"));
    const int dim = static_cast<int>(require_int(eff, "dim", 1, 10000000));
    SearchSpace space = space_from_config(eff);

    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;
    const std::vector<std::vector<double>> X = feature_matrix(ds, pipeline, dim);
    const std::vector<int> y = evaluation_labels(ds, ClassMode::Multiclass);
    const int n_classes = evaluation_n_classes(ds, ClassMode::Multiclass);

    // fixed split: train side, then an 80/20 fit/validation carve of it
    SplitPlan plan = split_iterations(ds, ratio, 1, cli.seed());
    const std::vector<int>& train_idx = plan.iterations[0].train;
    std::vector<int> train_labels;
    for (int i : train_idx) train_labels.push_back(y[static_cast<std::size_t>(i)]);
    StratifiedSplit carve = stratified_splits(train_labels, 0.8, 1, mix_seed(cli.seed(), 1))[0];
    std::vector<std::vector<double>> fit_X, val_X;
    std::vector<int> fit_y, val_y;
    for (int i : carve.train) {
        fit_X.push_back(X[static_cast<std::size_t>(train_idx[static_cast<std::size_t>(i)])]);
        fit_y.push_back(train_labels[static_cast<std::size_t>(i)]);
    }
    for (int i : carve.test) {
        val_X.push_back(X[static_cast<std::size_t>(train_idx[static_cast<std::size_t>(i)])]);
        val_y.push_back(train_labels[static_cast<std::size_t>(i)]);
    }

    // base hyperparameters; searched dimensions override per trial
    const TrainConfig base_tc = TrainKeys::read(eff, cli.seed());
    const long long base_h1 = require_int(eff, "hidden1", 1, 100000);
    const long long base_h2 = require_int(eff, "hidden2", 1, 100000);
    const double base_l2 = require_number(eff, "l2", 0.0, 1.0);
    const double base_keep = require_number(eff, "keep_prob", 1e-6, 1.0);

    auto objective = [&](const Params& p) {
        TrainConfig tc = base_tc;
        long long h1 = base_h1, h2 = base_h2;
        double l2 = base_l2, keep = base_keep;
        Activation act = Activation::Tanh;
        for (const auto& [name, v] : p) {
            if (name == "learning_rate") tc.learning_rate = v.number;
            else if (name == "epochs") tc.epochs = static_cast<int>(std::llround(v.number));
            else if (name == "batch_size") tc.batch_size = static_cast<int>(std::llround(v.number));
            else if (name == "hidden") h1 = h2 = std::llround(v.number);
            else if (name == "hidden1") h1 = std::llround(v.number);
            else if (name == "hidden2") h2 = std::llround(v.number);
            else if (name == "keep_prob") keep = v.number;
            else if (name == "l2") l2 = v.number;
            else if (name == "optimizer") tc.optimizer = optimizer_from_name(v.text);
            else if (name == "activation") act = activation_from_name(v.text);
        }
        if (tc.batch_size > static_cast<int>(fit_X.size()))
            tc.batch_size = static_cast<int>(fit_X.size());
        NeuralModel m = build_mlp(dim, n_classes,
                                  {static_cast<int>(h1), static_cast<int>(h2)}, act, l2, keep,
                                  cli.seed());
        tc.seed = cli.seed();
        train_classifier(m, fit_X, fit_y, tc);
        long wrong = 0;
        for (std::size_t i = 0; i < val_X.size(); ++i)
            if (predict_class(m, val_X[i]) != val_y[i]) ++wrong;
        return static_cast<double>(wrong) / static_cast<double>(val_X.size());
    };

    // resume: preloaded trials count toward the budget; random-strategy draws
    // are replayed so a resumed run matches an uninterrupted one
    std::vector<Trial> history;
    const std::string resume_path = config_string(eff, "resume", "");
    if (!resume_path.empty()) {
        std::ifstream in(resume_path);
        if (!in) throw Error("cannot open resume file: " + resume_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            Json j = Json::parse(line, nullptr, false);
            if (j.is_discarded()) throw Error("resume file: bad JSON line");
            if (j.contains("run")) continue;
            Trial t;
            t.params = params_from_json(j.at("params"));
            t.ok = j.value("ok", true);
            t.objective = t.ok ? j.at("objective").get<double>()
                               : std::numeric_limits<double>::infinity();
            history.push_back(std::move(t));
        }
    }
    Rng random_rng = make_rng(cli.seed(), 5);
    for (std::size_t t = 0; t < history.size(); ++t)
        if (strategy == SearchStrategy::Random) uniform_sample(space, random_rng);

    for (int t = static_cast<int>(history.size()); t < budget; ++t) {
        Params p = strategy == SearchStrategy::Random
                       ? uniform_sample(space, random_rng)
                       : suggest(history, space, mix_seed(cli.seed(), static_cast<std::uint64_t>(t)));
        Trial trial;
        trial.params = std::move(p);
        try {
            trial.objective = objective(trial.params);
            trial.ok = std::isfinite(trial.objective);
        } catch (const std::exception&) {
            trial.ok = false;
        }
        if (!trial.ok) trial.objective = std::numeric_limits<double>::infinity();
        std::cout << "trial " << (t + 1) << "/" << budget << ": objective "
                  << (trial.ok ? format_double(trial.objective) : std::string("failed")) << "\n";
        history.push_back(std::move(trial));
    }

    const Trial* best = nullptr;
    for (const Trial& t : history)
        if (t.ok && (!best || t.objective < best->objective)) best = &t;
    if (!best) throw Error("tune: every trial failed");

    std::ostringstream trials;
    {
        Json h;
        h["run"] = cli.meta("tune");
        trials << h.dump() << '\n';
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
        Json j;
        j["trial"] = i;
        j["ok"] = history[i].ok;
        j["objective"] = history[i].ok ? Json(history[i].objective) : Json();
        j["params"] = params_to_json(history[i].params);
        trials << j.dump() << '\n';
    }

    Json bj = cli.meta("tune");
    bj["n_trials"] = history.size();
    bj["strategy"] = strategy_name;
    Json bestj;
    bestj["params"] = params_to_json(best->params);
    bestj["objective"] = best->objective;
    bj["best"] = bestj;

    OutputSet out;
    std::string tpath = cli.path(require_text(eff, "trials_output"));
    std::string bpath = cli.path(require_text(eff, "best_output"));
    out.add(tpath, trials.str());
    out.add(bpath, bj.dump(2) + "\n");
    out.commit();
    std::cout << "best objective " << format_double(best->objective) << "\n"
              << "wrote " << tpath << "\n"
              << "wrote " << bpath << "\n";
}

// ---------------------------------------------------------------- encode

void cmd_encode(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    Pipeline pipeline = pipeline_from_name(require_text(eff, "pipeline"));
    const int dim = static_cast<int>(require_int(eff, "dim", 2, 10000000));

    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;
    std::vector<std::vector<double>> X = feature_matrix(ds, pipeline, dim);

    NeuralModel model;
    bool trained_here = false;
    const std::string model_path = config_string(eff, "model", "");
    if (!model_path.empty()) {
        model = load_model(model_path);
        if (model.input_dim != dim)
            throw Error("model input_dim " + std::to_string(model.input_dim) +
                        " does not match dim " + std::to_string(dim));
        if (model.bottleneck_layer < 0) throw Error("model file is not an autoencoder");
    } else {
        const int bottleneck = static_cast<int>(require_int(eff, "bottleneck", 1, 10000000));
        const int ae_hidden = static_cast<int>(require_int(eff, "ae_hidden", 1, 100000));
        TrainConfig tc = TrainKeys::read(eff, cli.seed());
        if (static_cast<std::size_t>(tc.batch_size) > X.size())
            tc.batch_size = static_cast<int>(X.size());
        model = build_ae(dim, bottleneck, ae_hidden, cli.seed());
        train_autoencoder(model, X, tc);
        trained_here = true;
    }

    std::vector<int> ords = ds.ordinals();
    std::ostringstream csv;
    csv << csv_stamp(cli.hash(), cli.seed());
    FeatureVector first = encode(model, X[0]);
    for (int j = 0; j < first.dim(); ++j) csv << 'e' << j << ',';
    csv << "label\n";
    for (std::size_t i = 0; i < X.size(); ++i) {
        FeatureVector fv = i == 0 ? first : encode(model, X[i]);
        for (double v : fv.values) csv << format_double(v) << ',';
        csv << ords[i] << '\n';
    }

    OutputSet out;
    std::string cpath = cli.path(require_text(eff, "output"));
    out.add(cpath, csv.str());
    if (trained_here) {
        Json mj = model_to_json(model);
        mj["command"] = "encode";
        mj["config_hash"] = cli.hash();
        mj["seed"] = cli.seed();
        mj["pipeline"] = pipeline_name(pipeline);
        mj["dim"] = dim;
        out.add(cli.path(require_text(eff, "save_model")), mj.dump(2) + "\n");
    }
    out.commit();
    std::cout << "wrote " << cpath << " (" << X.size() << " rows, bottleneck " << first.dim()
              << ")\n";
}

// ---------------------------------------------------------------- lrp

void cmd_lrp(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string model_path = require_text(eff, "model");
    Json mj;
    {
        std::ifstream in(model_path);
        if (!in) throw Error("cannot open model file: " + model_path);
        try {
            in >> mj;
        } catch (const std::exception& e) {
            throw Error("model parse error in " + model_path + ": " + e.what());
        }
    }
    NeuralModel model = model_from_json(mj);

    std::string pname = config_string(eff, "pipeline", "");
    if (pname.empty()) pname = mj.value("pipeline", "");
    if (pname.empty()) throw Error("pipeline not recorded in model file; pass --pipeline");
    Pipeline pipeline = pipeline_from_name(pname);
    long long dim = config_int(eff, "dim", 0);
    if (dim == 0) dim = mj.value("dim", 0);
    if (dim < 1) throw Error("dim not recorded in model file; pass --dim");
    if (model.input_dim != static_cast<int>(dim))
        throw Error("model input_dim " + std::to_string(model.input_dim) +
                    " does not match dim " + std::to_string(dim));

    const long long target = config_int(eff, "target", -1);
    if (target < -1 || target >= model.output_dim)
        throw Error("config field 'target' must be -1 (predicted class) or a class ordinal");
    const long long limit = require_int(eff, "limit", 0, 100000000);

    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;
    std::size_t n = ds.records.size();
    if (limit > 0 && static_cast<std::size_t>(limit) < n) n = static_cast<std::size_t>(limit);

    std::vector<RelevanceVector> runs;
    std::vector<FeatureVector> fvs;
    std::set<std::string> warned;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector fv = extract_features(ds.records[i], pipeline, static_cast<int>(dim));
        RelevanceVector rv = lrp_w2(model, fv.values, static_cast<int>(target));
        for (const std::string& w : rv.warnings) warned.insert(w);
        runs.push_back(std::move(rv));
        fvs.push_back(std::move(fv));
    }
    for (const std::string& w : warned) std::cerr << "warning: " << w << "\n";

    AggregatedRelevance agg = aggregate_relevance(runs);
    std::ostringstream csv;
    csv << csv_stamp(cli.hash(), cli.seed()) << "rank,feature,summed_relevance\n";
    for (std::size_t r = 0; r < agg.ranking.size(); ++r) {
        int f = agg.ranking[r];
        csv << (r + 1) << ',' << f << ','
            << format_double(agg.summed[static_cast<std::size_t>(f)]) << '\n';
    }

    OutputSet out;
    std::string rpath = cli.path(require_text(eff, "output"));
    out.add(rpath, csv.str());

    if (pipeline == Pipeline::CellDirection || pipeline == Pipeline::TlsDirection) {
        std::map<int, std::vector<double>> pooled;
        for (std::size_t i = 0; i < runs.size(); ++i)
            for (const DirectionGroup& g : relevance_by_direction(runs[i].scores, fvs[i]))
                pooled[g.value].insert(pooled[g.value].end(), g.scores.begin(), g.scores.end());
        std::ostringstream dcsv;
        dcsv << csv_stamp(cli.hash(), cli.seed()) << "direction,count,mean,stddev\n";
        for (const auto& [value, scores] : pooled)
            dcsv << value << ',' << scores.size() << ',' << format_double(mean_of(scores)) << ','
                 << format_double(stddev_of(scores)) << '\n';
        out.add(cli.path(require_text(eff, "direction_output")), dcsv.str());
    }
    out.commit();
    std::cout << "wrote " << rpath << " (" << runs.size() << " instances aggregated)\n";
}

// ---------------------------------------------------------------- defend

void cmd_defend(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string defense = require_text(eff, "defense");
    Dataset ds = read_jsonl(require_text(eff, "data")).dataset;

    Dataset defended;
    OverheadReport rep;
    std::vector<std::string> warnings;
    if (defense == "buflo") {
        BufloParams p;
        p.packet_size = static_cast<int>(require_int(eff, "packet_size", 1, 1000000));
        p.interval = require_number(eff, "interval", 1e-9, 3600.0);
        p.min_duration = require_number(eff, "min_duration", 1e-9, 1e9);
        std::tie(defended, rep) =
            defend_dataset(ds, [&](const TraceRecord& t) { return apply_buflo(t, p); });
    } else if (defense == "tamaraw") {
        TamarawParams p;
        p.packet_size = static_cast<int>(require_int(eff, "packet_size", 1, 1000000));
        p.rho_out = require_number(eff, "rho_out", 1e-9, 3600.0);
        p.rho_in = require_number(eff, "rho_in", 1e-9, 3600.0);
        p.pad_multiple = require_int(eff, "pad_multiple", 1, 100000000);
        std::tie(defended, rep) = defend_dataset(
            ds, [&](const TraceRecord& t) { return apply_tamaraw(t, p, &warnings); });
    } else {
        throw Error("config field 'defense' must be 'buflo' or 'tamaraw'");
    }
    std::set<std::string> unique_warnings(warnings.begin(), warnings.end());
    for (const std::string& w : unique_warnings) std::cerr << "warning: " << w << "\n";

    std::ostringstream body;
    write_jsonl(body, defended, cli.meta("defend"));

    std::ostringstream csv;
    csv << csv_stamp(cli.hash(), cli.seed()) << "instance,label,overhead_percent\n";
    for (std::size_t i = 0; i < rep.per_instance.size(); ++i)
        csv << i << ',' << csv_cell(ds.records[i].label) << ','
            << format_double(rep.per_instance[i]) << '\n';

    Json rj = cli.meta("defend");
    rj["defense"] = defense;
    rj["n_records"] = ds.records.size();
    rj["mean_overhead_percent"] = rep.mean;

    OutputSet out;
    std::string dpath = cli.path(require_text(eff, "output"));
    out.add(dpath, body.str());
    out.add(cli.path(require_text(eff, "overhead_output")), csv.str());
    out.add(cli.path(require_text(eff, "report_output")), rj.dump(2) + "\n");
    out.commit();
    std::cout << defense << ": mean overhead " << format_double(rep.mean) << "% over "
              << ds.records.size() << " records\n"
              << "wrote " << dpath << "\n";
}

// ---------------------------------------------------------------- htmlfeat

void cmd_htmlfeat(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string html_dir = require_text(eff, "html_dir");
    const std::string meta_path = require_text(eff, "meta");
    CsvTable table = read_csv(meta_path);
    for (const char* col : {"instance_id", "site", "capture_bytes", "html_bytes",
                            "duration_seconds"})
        if (table.column(col) < 0)
            throw Error(meta_path + ": missing column '" + std::string(col) + "'");
    const int file_col = table.column("file");
    const int url_col = table.column("url");
    const int id_col = table.column("instance_id");
    const int site_col = table.column("site");

    std::vector<std::string> ids, sites;
    std::vector<std::vector<double>> rows;
    for (const auto& row : table.rows) {
        const std::string id = row[static_cast<std::size_t>(id_col)];
        std::string fname = file_col >= 0 ? row[static_cast<std::size_t>(file_col)] : id + ".html";
        std::string url = url_col >= 0 ? row[static_cast<std::size_t>(url_col)] : "";
        std::map<std::string, double> meta;
        meta["capture_bytes"] = csv_number(table, row, "capture_bytes", meta_path);
        meta["html_bytes"] = csv_number(table, row, "html_bytes", meta_path);
        meta["duration_seconds"] = csv_number(table, row, "duration_seconds", meta_path);

        std::string path = html_dir + "/" + fname;
        DomTree dom;
        try {
            dom = parse_html(read_file_bytes(path));
        } catch (const Error& e) {
            throw Error(path + ": " + e.what());
        }
        std::vector<std::string> warnings;
        rows.push_back(extract_html_features(dom, meta, url, &warnings));
        for (const std::string& w : warnings) std::cerr << "warning: " << id << ": " << w << "\n";
        ids.push_back(id);
        sites.push_back(row[static_cast<std::size_t>(site_col)]);
    }
    if (rows.empty()) throw Error(meta_path + ": no instances");

    auto emit = [&](const std::vector<std::vector<double>>& matrix) {
        std::ostringstream csv;
        csv << csv_stamp(cli.hash(), cli.seed()) << "instance_id,site";
        for (const std::string& name : html_feature_names()) csv << ',' << name;
        csv << '\n';
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            csv << csv_cell(ids[i]) << ',' << csv_cell(sites[i]);
            for (double v : matrix[i]) csv << ',' << format_double(v);
            csv << '\n';
        }
        return csv.str();
    };

    OutputSet out;
    std::string fpath = cli.path(require_text(eff, "output"));
    out.add(fpath, emit(rows));
    if (config_bool(eff, "rank", true))
        out.add(cli.path(require_text(eff, "rank_output")), emit(rank_transform(rows)));
    out.commit();
    std::cout << "wrote " << fpath << " (" << rows.size() << " instances, "
              << html_feature_names().size() << " features)\n";
}

// ---------------------------------------------------------------- fp

void cmd_fp(ConfigCli& cli) {
    cli.resolve();
    const Json& eff = cli.eff();
    const std::string feat_path = require_text(eff, "features");
    CsvTable ft = read_csv(feat_path);
    const int site_col = ft.column("site");
    if (site_col < 0) throw Error(feat_path + ": missing column 'site'");
    std::vector<std::string> feature_cols;
    for (const std::string& h : ft.header)
        if (h != "site" && h != "instance_id") feature_cols.push_back(h);
    if (feature_cols.empty()) throw Error(feat_path + ": no feature columns");

    std::vector<std::vector<double>> X;
    std::vector<std::string> sites;
    for (const auto& row : ft.rows) {
        std::vector<double> x;
        for (const std::string& col : feature_cols) x.push_back(csv_number(ft, row, col, feat_path));
        X.push_back(std::move(x));
        sites.push_back(row[static_cast<std::size_t>(site_col)]);
    }
    if (X.empty()) throw Error(feat_path + ": no instances");

    const std::string acc_path = require_text(eff, "accuracy");
    CsvTable at = read_csv(acc_path);
    if (at.column("site") < 0 || at.column("accuracy") < 0)
        throw Error(acc_path + ": need columns 'site' and 'accuracy'");
    std::map<std::string, double> site_acc;
    for (const auto& row : at.rows)
        site_acc[row[static_cast<std::size_t>(at.column("site"))]] =
            csv_number(at, row, "accuracy", acc_path);

    std::vector<double> thresholds;
    {
        std::string list = require_text(eff, "thresholds");
        std::stringstream ss(list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                thresholds.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw Error("config field 'thresholds' must be a comma-separated number list");
            }
        }
        if (thresholds.empty())
            throw Error("config field 'thresholds' must name at least one threshold");
    }

    if (config_bool(eff, "rank", true)) X = rank_transform(X);

    FpConfig fc;
    fc.ratio = require_number(eff, "ratio", 1e-9, 1.0 - 1e-9);
    fc.n_iters = static_cast<int>(require_int(eff, "iterations", 1, 100000));
    fc.hidden = {static_cast<int>(require_int(eff, "hidden1", 1, 100000)),
                 static_cast<int>(require_int(eff, "hidden2", 1, 100000))};
    fc.l2 = require_number(eff, "l2", 0.0, 1.0);
    fc.keep_prob = require_number(eff, "keep_prob", 1e-6, 1.0);
    fc.train = TrainKeys::read(eff, cli.seed());

    std::ostringstream csv;
    csv << csv_stamp(cli.hash(), cli.seed())
        << "threshold,n_fingerprintable,n_rest,weight0,weight1,weighted_accuracy_mean,"
           "weighted_accuracy_stddev,weighted_mse_mean,weighted_mse_stddev\n";
    Json rows = Json::array();
    for (double th : thresholds) {
        FpReport rep = run_fp_experiment(X, sites, site_acc, th, fc);
        csv << format_double(th) << ',' << rep.n_fingerprintable << ',' << rep.n_rest << ','
            << format_double(rep.weight0) << ',' << format_double(rep.weight1) << ','
            << format_double(rep.weighted_accuracy.mean) << ','
            << format_double(rep.weighted_accuracy.stddev) << ','
            << format_double(rep.weighted_mse.mean) << ','
            << format_double(rep.weighted_mse.stddev) << '\n';
        Json r;
        r["threshold"] = th;
        r["n_fingerprintable"] = rep.n_fingerprintable;
        r["n_rest"] = rep.n_rest;
        r["weighted_accuracy"] = summary_json(rep.weighted_accuracy);
        r["weighted_mse"] = summary_json(rep.weighted_mse);
        rows.push_back(std::move(r));
        std::cout << "threshold " << format_double(th) << ": weighted accuracy "
                  << format_double(rep.weighted_accuracy.mean) << ", weighted mse "
                  << format_double(rep.weighted_mse.mean) << "\n";
    }

    Json rj = cli.meta("fp");
    rj["n_instances"] = X.size();
    rj["thresholds"] = rows;

    OutputSet out;
    std::string cpath = cli.path(require_text(eff, "report_csv"));
    out.add(cpath, csv.str());
    out.add(cli.path(require_text(eff, "report_json")), rj.dump(2) + "\n");
    out.commit();
    std::cout << "wrote " << cpath << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wfkit: traffic-trace fingerprinting analysis toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "wfkit 1.0.0");

    // synth
    ConfigCli synth(app.add_subcommand("synth", "generate a synthetic trace dataset"), false);
    synth.integer("--classes", "classes", 20, "monitored classes");
    synth.integer("--instances", "instances", 90, "instances per monitored class");
    synth.integer("--background", "background", 0, "background instances");
    synth.integer("--trace-len", "trace_len", 100, "mean prototype length in events");
    synth.number("--noise", "noise", 0.05, "per-event perturbation probability");
    synth.text("--output", "output", "dataset.jsonl", "output file name");

    // train
    ConfigCli train(app.add_subcommand("train", "train a model on a full dataset"), true);
    train.text("--data", "data", "", "dataset JSONL");
    train.text("--model", "model", "mlp", "mlp | cnn | ae");
    train.text("--pipeline", "pipeline", "cell_direction", "feature pipeline");
    train.integer("--dim", "dim", 784, "feature vector length");
    train.text("--class-mode", "class_mode", "multiclass", "multiclass | binary");
    ArchKeys{}.add(train);
    train.integer("--bottleneck", "bottleneck", 80, "autoencoder bottleneck width (ae)");
    train.integer("--ae-hidden", "ae_hidden", 256, "autoencoder hidden width (ae)");
    TrainKeys{}.add(train);
    train.text("--model-output", "model_output", "model.json", "model output file name");
    train.text("--report-output", "report_output", "train_report.json", "report file name");

    // eval
    ConfigCli eval(app.add_subcommand("eval", "split-iteration evaluation"), true);
    eval.text("--data", "data", "", "dataset JSONL");
    eval.text("--model", "model", "mlp", "mlp | cnn");
    eval.text("--pipeline", "pipeline", "cell_direction", "feature pipeline");
    eval.integer("--dim", "dim", 784, "feature vector length");
    eval.text("--class-mode", "class_mode", "multiclass", "multiclass | binary");
    eval.number("--ratio", "ratio", 0.6, "train fraction per class");
    eval.integer("--iterations", "iterations", 20, "split iterations");
    eval.number("--threshold", "threshold", 0.0, "confidence threshold (0 = argmax)");
    eval.integer("--top-k", "top_k", 0, "top-k decision rule (0 = off)");
    eval.integer("--jobs", "jobs", 1, "worker threads across split iterations");
    ArchKeys{}.add(eval);
    TrainKeys{}.add(eval);
    eval.text("--metrics-output", "metrics_output", "metrics.json", "metrics file name");
    eval.text("--iterations-output", "iterations_output", "iterations.csv",
              "per-iteration csv name");
    eval.text("--sweep-output", "sweep_output", "sweep.csv", "threshold sweep csv name");
    eval.text("--site-accuracy-output", "site_accuracy_output", "site_accuracy.csv",
              "per-site accuracy csv name");

    // tune
    ConfigCli tune(app.add_subcommand("tune", "hyperparameter search"), true);
    tune.text("--data", "data", "", "dataset JSONL");
    tune.text("--pipeline", "pipeline", "cell_direction", "feature pipeline");
    tune.integer("--dim", "dim", 784, "feature vector length");
    tune.number("--ratio", "ratio", 0.6, "train fraction per class");
    tune.integer("--budget", "budget", 30, "number of trials");
    tune.text("--strategy", "strategy", "tpe", "tpe | random");
    tune.text("--resume", "resume", "", "existing trials JSONL to continue from");
    ArchKeys{}.add(tune);
    TrainKeys{}.add(tune);
    tune.text("--trials-output", "trials_output", "trials.jsonl", "trial history file name");
    tune.text("--best-output", "best_output", "best_params.json", "best parameters file name");
    tune.array_default("space", Json::parse(R"([
        {"name": "learning_rate", "kind": "continuous", "lo": 0.001, "hi": 0.1, "log": true},
        {"name": "epochs", "kind": "int", "lo": 10, "hi": 50},
        {"name": "batch_size", "kind": "int", "lo": 10, "hi": 40},
        {"name": "hidden", "kind": "int", "lo": 600, "hi": 700},
        {"name": "keep_prob", "kind": "continuous", "lo": 0.5, "hi": 1.0}
    ])"));

    // encode
    ConfigCli encodec(app.add_subcommand("encode", "autoencoder feature compression"), false);
    encodec.text("--data", "data", "", "dataset JSONL");
    encodec.text("--pipeline", "pipeline", "cell_direction", "feature pipeline");
    encodec.integer("--dim", "dim", 784, "feature vector length");
    encodec.integer("--bottleneck", "bottleneck", 80, "bottleneck width");
    encodec.integer("--ae-hidden", "ae_hidden", 256, "hidden width");
    encodec.text("--model", "model", "", "pre-trained autoencoder file (skips training)");
    TrainKeys{}.add(encodec, "adam", 0.001, 10, 256);
    encodec.text("--output", "output", "encoded.csv", "encoded feature csv name");
    encodec.text("--save-model", "save_model", "ae_model.json",
                 "model file name when trained here");

    // lrp
    ConfigCli lrpc(app.add_subcommand("lrp", "relevance propagation explanations"), false);
    lrpc.text("--data", "data", "", "dataset JSONL");
    lrpc.text("--model", "model", "", "trained dense classifier file");
    lrpc.text("--pipeline", "pipeline", "", "feature pipeline (default: from model file)");
    lrpc.integer("--dim", "dim", 0, "feature vector length (default: from model file)");
    lrpc.integer("--target", "target", -1, "class ordinal to explain (-1 = predicted)");
    lrpc.integer("--limit", "limit", 0, "explain only the first N records (0 = all)");
    lrpc.text("--output", "output", "relevance.csv", "aggregated relevance csv name");
    lrpc.text("--direction-output", "direction_output", "direction_profile.csv",
              "per-direction relevance csv name");

    // defend
    ConfigCli defendc(app.add_subcommand("defend", "apply a padding defense"), false);
    defendc.text("--data", "data", "", "dataset JSONL");
    defendc.text("--defense", "defense", "", "buflo | tamaraw");
    defendc.integer("--packet-size", "packet_size", 512, "bytes per emitted event");
    defendc.number("--interval", "interval", 0.02, "buflo inter-event interval, seconds");
    defendc.number("--min-duration", "min_duration", 10.0, "buflo minimum duration, seconds");
    defendc.number("--rho-out", "rho_out", 0.04, "tamaraw outgoing interval, seconds");
    defendc.number("--rho-in", "rho_in", 0.012, "tamaraw incoming interval, seconds");
    defendc.integer("--pad-multiple", "pad_multiple", 100, "tamaraw pad-to multiple");
    defendc.text("--output", "output", "defended.jsonl", "defended dataset file name");
    defendc.text("--overhead-output", "overhead_output", "overhead.csv",
                 "per-instance overhead csv name");
    defendc.text("--report-output", "report_output", "defend_report.json", "report file name");

    // htmlfeat
    ConfigCli htmlc(app.add_subcommand("htmlfeat", "extract document features"), false);
    htmlc.text("--html-dir", "html_dir", "", "directory of .html files");
    htmlc.text("--meta", "meta", "",
               "metadata csv (instance_id,site,capture_bytes,html_bytes,duration_seconds)");
    htmlc.toggle("--rank,!--no-rank", "rank", true, "also write the rank-transformed matrix");
    htmlc.text("--output", "output", "html_features.csv", "feature csv name");
    htmlc.text("--rank-output", "rank_output", "html_features_rank.csv", "rank csv name");

    // fp
    ConfigCli fpc(app.add_subcommand("fp", "fingerprintability prediction"), false);
    fpc.text("--features", "features", "", "feature csv from htmlfeat");
    fpc.text("--accuracy", "accuracy", "", "per-site accuracy csv (site,accuracy)");
    fpc.text("--thresholds", "thresholds", "0.5", "comma-separated accuracy thresholds");
    fpc.number("--ratio", "ratio", 0.6, "train fraction per label class");
    fpc.integer("--iterations", "iterations", 10, "split iterations");
    fpc.toggle("--rank,!--no-rank", "rank", true, "rank-transform features before training");
    fpc.integer("--hidden1", "hidden1", 64, "first hidden layer width");
    fpc.integer("--hidden2", "hidden2", 64, "second hidden layer width");
    fpc.number("--l2", "l2", 1e-4, "L2 weight penalty");
    fpc.number("--keep-prob", "keep_prob", 1.0, "dropout keep probability");
    TrainKeys{}.add(fpc, "sgd", 0.05, 30, 16);
    fpc.text("--report-csv", "report_csv", "fp_report.csv", "report csv name");
    fpc.text("--report-json", "report_json", "fp_report.json", "report json name");

    app.get_subcommand("synth")->callback([&]() { cmd_synth(synth); });
    app.get_subcommand("train")->callback([&]() { cmd_train(train); });
    app.get_subcommand("eval")->callback([&]() { cmd_eval(eval); });
    app.get_subcommand("tune")->callback([&]() { cmd_tune(tune); });
    app.get_subcommand("encode")->callback([&]() { cmd_encode(encodec); });
    app.get_subcommand("lrp")->callback([&]() { cmd_lrp(lrpc); });
    app.get_subcommand("defend")->callback([&]() { cmd_defend(defendc); });
    app.get_subcommand("htmlfeat")->callback([&]() { cmd_htmlfeat(htmlc); });
    app.get_subcommand("fp")->callback([&]() { cmd_fp(fpc); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
