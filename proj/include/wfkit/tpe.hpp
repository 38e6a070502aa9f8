#pragma once

// Tree-of-Parzen-Estimators hyperparameter search with a random-search
// fallback. Continuous dimensions use blended Gaussian kernel densities;
// integer and categorical dimensions use smoothed frequency counts.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wfkit/common.hpp"

namespace wfkit {

struct Dim {
    enum class Kind { Continuous, IntRange, Categorical };
    Kind kind = Kind::Continuous;
    std::string name;
    double lo = 0.0, hi = 0.0;  // Continuous bounds
    bool log_scale = false;
    long ilo = 0, ihi = 0;  // IntRange bounds (inclusive)
    std::vector<std::string> options;

    static Dim continuous(std::string name, double lo, double hi, bool log_scale = false) {
        if (!(lo < hi)) throw Error("dim " + name + ": lo must be < hi");
        if (log_scale && lo <= 0.0) throw Error("dim " + name + ": log scale needs positive bounds");
        Dim d;
        d.kind = Kind::Continuous;
        d.name = std::move(name);
        d.lo = lo;
        d.hi = hi;
        d.log_scale = log_scale;
        return d;
    }
    static Dim int_range(std::string name, long lo, long hi) {
        if (!(lo < hi)) throw Error("dim " + name + ": lo must be < hi");
        Dim d;
        d.kind = Kind::IntRange;
        d.name = std::move(name);
        d.ilo = lo;
        d.ihi = hi;
        return d;
    }
    static Dim categorical(std::string name, std::vector<std::string> options) {
        if (options.empty()) throw Error("dim " + name + ": options must be non-empty");
        Dim d;
        d.kind = Kind::Categorical;
        d.name = std::move(name);
        d.options = std::move(options);
        return d;
    }
};

struct SearchSpace {
    std::vector<Dim> dims;
};

struct ParamValue {
    double number = 0.0;
    std::string text;
    bool is_text = false;

    bool operator==(const ParamValue&) const = default;
};

using Params = std::map<std::string, ParamValue>;

struct Trial {
    Params params;
    double objective = 0.0;  // lower is better
    bool ok = true;
};

enum class SearchStrategy { TPE, Random };

inline constexpr int kTpeStartupTrials = 10;
inline constexpr double kTpeGamma = 0.25;
inline constexpr int kTpeCandidates = 24;

namespace detail {

inline ParamValue uniform_draw(const Dim& d, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ParamValue v;
    switch (d.kind) {
        case Dim::Kind::Continuous: {
            if (d.log_scale) {
                double u = std::log(d.lo) + unit(rng) * (std::log(d.hi) - std::log(d.lo));
                v.number = std::exp(u);
            } else {
                v.number = d.lo + unit(rng) * (d.hi - d.lo);
            }
            v.number = std::clamp(v.number, d.lo, d.hi);
            break;
        }
        case Dim::Kind::IntRange: {
            // sampled as continuous, then rounded
            double u = static_cast<double>(d.ilo) + unit(rng) * static_cast<double>(d.ihi - d.ilo);
            v.number = static_cast<double>(std::clamp(std::llround(u), static_cast<long long>(d.ilo),
                                                      static_cast<long long>(d.ihi)));
            break;
        }
        case Dim::Kind::Categorical: {
            std::uniform_int_distribution<std::size_t> pick(0, d.options.size() - 1);
            v.is_text = true;
            v.text = d.options[pick(rng)];
            break;
        }
    }
    return v;
}

struct ContinuousDensity {
    std::vector<double> centers;     // sorted observation coordinates (log space when log_scale)
    std::vector<double> bandwidths;  // per-center, from sorted-neighbour spacing
    double lo = 0.0, hi = 1.0;       // coordinate-space bounds
    bool log_scale = false;

    static ContinuousDensity fit(const Dim& d, const std::vector<double>& raw) {
        ContinuousDensity dn;
        dn.log_scale = d.log_scale;
        dn.lo = d.log_scale ? std::log(d.lo) : d.lo;
        dn.hi = d.log_scale ? std::log(d.hi) : d.hi;
        for (double x : raw) dn.centers.push_back(d.log_scale ? std::log(x) : x);
        std::sort(dn.centers.begin(), dn.centers.end());
        // Per-center bandwidth equal to the farther sorted-neighbour gap (bounds
        // act as virtual neighbours): isolated points keep wide kernels while runs
        // of near-duplicates sharpen, in the good and bad densities alike. A
        // global bandwidth would let a tight cluster dominate the density ratio
        // indefinitely and stall exploration.
        const double span = dn.hi - dn.lo;
        const double bw_min = span / 100.0;
        const std::size_t n = dn.centers.size();
        dn.bandwidths.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double left = i > 0 ? dn.centers[i] - dn.centers[i - 1] : dn.centers[i] - dn.lo;
            double right = i + 1 < n ? dn.centers[i + 1] - dn.centers[i] : dn.hi - dn.centers[i];
            dn.bandwidths[i] = std::clamp(std::max(left, right), bw_min, span);
        }
        return dn;
    }

    // blended mixture: uniform weight 1/(n+1), kernels share the rest
    double log_pdf(double value) const {
        double x = log_scale ? std::log(value) : value;
        double span = hi - lo;
        double total = 1.0 / span;  // uniform component
        const double root_2pi = std::sqrt(2.0 * 3.14159265358979323846);
        for (std::size_t i = 0; i < centers.size(); ++i) {
            double u = (x - centers[i]) / bandwidths[i];
            total += std::exp(-0.5 * u * u) / (bandwidths[i] * root_2pi);
        }
        total /= static_cast<double>(centers.size() + 1);
        return total > 0.0 ? std::log(total) : -1e300;
    }

    double sample(Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double x;
        if (centers.empty() || unit(rng) < 1.0 / static_cast<double>(centers.size() + 1)) {
            x = lo + unit(rng) * (hi - lo);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
            std::size_t i = pick(rng);
            std::normal_distribution<double> noise(0.0, bandwidths[i]);
            x = std::clamp(centers[i] + noise(rng), lo, hi);
        }
        return log_scale ? std::exp(x) : x;
    }
};

struct CountDensity {
    std::vector<double> weights;  // Laplace-smoothed, normalized

    static CountDensity fit(std::size_t n_values, const std::vector<std::size_t>& hits) {
        CountDensity dn;
        dn.weights.assign(n_values, 1.0);  // +1 smoothing
        double total = static_cast<double>(n_values);
        for (std::size_t h : hits) {
            dn.weights[h] += 1.0;
            total += 1.0;
        }
        for (double& w : dn.weights) w /= total;
        return dn;
    }

    double log_pdf(std::size_t idx) const { return std::log(weights[idx]); }

    std::size_t sample(Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }
};

}  // namespace detail

inline Params uniform_sample(const SearchSpace& space, Rng& rng) {
    Params p;
    for (const Dim& d : space.dims) p[d.name] = detail::uniform_draw(d, rng);
    return p;
}

// One TPE suggestion given the trial history. Uniform until enough completed
// trials exist; after that, candidates drawn from the good-set density and
// ranked by the density ratio l(x)/g(x).
inline Params suggest(const std::vector<Trial>& history, const SearchSpace& space,
                      std::uint64_t seed) {
    if (space.dims.empty()) throw Error("suggest: empty search space");
    Rng rng = make_rng(seed, 6);
    std::vector<const Trial*> done;
    for (const Trial& t : history)
        if (t.ok) done.push_back(&t);
    if (static_cast<int>(done.size()) < kTpeStartupTrials) return uniform_sample(space, rng);

    std::stable_sort(done.begin(), done.end(),
                     [](const Trial* a, const Trial* b) { return a->objective < b->objective; });
    const std::size_t n = done.size();
    const std::size_t n_good = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(kTpeGamma * static_cast<double>(n))));

    struct DimDensity {
        const Dim* dim;
        detail::ContinuousDensity good_c, bad_c;
        detail::CountDensity good_k, bad_k;
    };
    std::vector<DimDensity> densities;
    for (const Dim& d : space.dims) {
        DimDensity dd;
        dd.dim = &d;
        if (d.kind == Dim::Kind::Continuous) {
            std::vector<double> good, bad;
            for (std::size_t i = 0; i < n; ++i)
                (i < n_good ? good : bad).push_back(done[i]->params.at(d.name).number);
            dd.good_c = detail::ContinuousDensity::fit(d, good);
            dd.bad_c = detail::ContinuousDensity::fit(d, bad);
        } else {
            std::size_t n_values = d.kind == Dim::Kind::IntRange
                                       ? static_cast<std::size_t>(d.ihi - d.ilo + 1)
                                       : d.options.size();
            std::vector<std::size_t> good, bad;
            for (std::size_t i = 0; i < n; ++i) {
                const ParamValue& v = done[i]->params.at(d.name);
                std::size_t idx;
                if (d.kind == Dim::Kind::IntRange) {
                    idx = static_cast<std::size_t>(std::llround(v.number) - d.ilo);
                } else {
                    idx = static_cast<std::size_t>(
                        std::find(d.options.begin(), d.options.end(), v.text) - d.options.begin());
                    if (idx >= d.options.size())
                        throw Error("suggest: trial value outside categorical options");
                }
                (i < n_good ? good : bad).push_back(idx);
            }
            dd.good_k = detail::CountDensity::fit(n_values, good);
            dd.bad_k = detail::CountDensity::fit(n_values, bad);
        }
        densities.push_back(std::move(dd));
    }

    Params best;
    double best_score = 0.0;
    bool first = true;
    for (int c = 0; c < kTpeCandidates; ++c) {
        Params cand;
        double score = 0.0;
        for (const DimDensity& dd : densities) {
            const Dim& d = *dd.dim;
            ParamValue v;
            if (d.kind == Dim::Kind::Continuous) {
                v.number = dd.good_c.sample(rng);
                score += dd.good_c.log_pdf(v.number) - dd.bad_c.log_pdf(v.number);
            } else {
                std::size_t idx = dd.good_k.sample(rng);
                if (d.kind == Dim::Kind::IntRange) {
                    v.number = static_cast<double>(d.ilo + static_cast<long>(idx));
                } else {
                    v.is_text = true;
                    v.text = d.options[idx];
                }
                score += dd.good_k.log_pdf(idx) - dd.bad_k.log_pdf(idx);
            }
            cand[d.name] = std::move(v);
        }
        if (first || score > best_score) {
            best = std::move(cand);
            best_score = score;
            first = false;
        }
    }
    return best;
}

struct SearchResult {
    Trial best;
    std::vector<Trial> history;
};

inline SearchResult optimize(const std::function<double(const Params&)>& objective,
                             const SearchSpace& space, int budget, std::uint64_t seed,
                             SearchStrategy strategy = SearchStrategy::TPE) {
    if (budget < 1) throw Error("optimize: budget must be >= 1");
    SearchResult r;
    Rng random_rng = make_rng(seed, 5);
    for (int t = 0; t < budget; ++t) {
        Params p = strategy == SearchStrategy::Random
                       ? uniform_sample(space, random_rng)
                       : suggest(r.history, space, mix_seed(seed, static_cast<std::uint64_t>(t)));
        Trial trial;
        trial.params = std::move(p);
        try {
            trial.objective = objective(trial.params);
            trial.ok = std::isfinite(trial.objective);
        } catch (const std::exception&) {
            trial.ok = false;
        }
        if (!trial.ok) trial.objective = std::numeric_limits<double>::infinity();
        r.history.push_back(std::move(trial));
    }
    bool found = false;
    for (const Trial& t : r.history) {
        if (!t.ok) continue;
        if (!found || t.objective < r.best.objective) {
            r.best = t;
            found = true;
        }
    }
    if (!found) throw Error("optimize: every trial failed");
    return r;
}

// running minimum of completed objectives, for monotone convergence reporting
inline std::vector<double> best_so_far(const std::vector<Trial>& history) {
    std::vector<double> out;
    double best = std::numeric_limits<double>::infinity();
    for (const Trial& t : history) {
        if (t.ok) best = std::min(best, t.objective);
        out.push_back(best);
    }
    return out;
}

}  // namespace wfkit
