#pragma once

// The 65 HTML document features, the per-column rank transform, and the
// fingerprintability labeling step (threshold on site accuracy + balanced
// class weights).

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wfkit/html.hpp"

namespace wfkit {

inline constexpr int kHtmlFeatureCount = 65;

inline const std::vector<std::string>& html_feature_names() {
    static const std::vector<std::string> names = {
        "links_total", "links_same_domain", "links_third_party", "links_with_domain",
        "links_unique_domains", "tag_paths_total", "tag_paths_unique", "unique_tags_per_path_sum",
        "unique_tags_per_path_median", "unique_tags_per_path_mean", "unique_tags_per_path_std",
        "path_direction_changes", "path_direction_nonchanges", "path_direction_positive",
        "path_direction_negative", "depth_sum", "depth_std", "depth_count_at_max",
        "depth_count_at_min", "depth_count_at_median", "depth_count_at_rounded_mean",
        "depth_count_at_p30", "depth_count_at_p70", "depth_max", "depth_min", "depth_median",
        "depth_rounded_mean", "depth_p30", "depth_p70", "tags_total", "tags_unique",
        "comments_total", "attrs_total", "attrs_unique", "chars_text", "chars_script",
        "chars_style_attr", "chars_attrs", "chars_data_incl_script_style", "chars_data_attrs",
        "words_data_incl_script_style", "words_data_attrs", "img_tags_total",
        "img_tags_per_path", "png_count", "png_portion", "ico_count", "ico_portion", "jpg_count",
        "jpg_portion", "gif_count", "gif_portion", "bmp_count", "bmp_portion", "html_count",
        "html_portion", "css_count", "css_portion", "js_count", "js_portion", "mp3_count",
        "avi_count", "loading_time", "html_file_size", "capture_file_size"};
    return names;
}

namespace detail {

inline std::string url_host(const std::string& url) {
    std::size_t host_start = std::string::npos;
    std::size_t scheme = url.find("://");
    if (scheme != std::string::npos) {
        host_start = scheme + 3;
    } else if (url.size() >= 2 && url[0] == '/' && url[1] == '/') {
        host_start = 2;  // protocol-relative
    }
    if (host_start == std::string::npos) return "";  // relative reference
    std::size_t end = url.find_first_of("/?#:", host_start);
    std::string host = url.substr(host_start, end == std::string::npos ? std::string::npos
                                                                       : end - host_start);
    return to_lower(host);
}

// last two dot-separated labels; a cheap stand-in for the public-suffix rules
inline std::string registrable_domain(const std::string& host) {
    std::size_t last = host.rfind('.');
    if (last == std::string::npos || last == 0) return host;
    std::size_t prev = host.rfind('.', last - 1);
    return prev == std::string::npos ? host : host.substr(prev + 1);
}

inline std::string url_extension(const std::string& url) {
    std::size_t end = url.find_first_of("?#");
    std::string path = url.substr(0, end);
    std::size_t slash = path.find_last_of('/');
    std::string seg = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = seg.find_last_of('.');
    if (dot == std::string::npos || dot + 1 == seg.size()) return "";
    return to_lower(seg.substr(dot + 1));
}

inline long count_words(const std::string& s) {
    long n = 0;
    bool in_tok = false;
    for (char c : s) {
        bool sp = is_space(c);
        if (!sp && !in_tok) ++n;
        in_tok = !sp;
    }
    return n;
}

struct DocScan {
    std::vector<std::string> links;  // href/src values in document order
    std::vector<int> depths;         // per tag path
    std::vector<long> unique_tags_per_path;
    std::set<std::string> unique_paths;
    std::set<std::string> tag_names, attr_names;
    long n_elements = 0, n_comments = 0, n_attrs = 0, n_img = 0;
    long chars_text = 0, chars_script = 0, chars_style_attr = 0, chars_attrs = 0,
         chars_data_attrs = 0;
    long words_text = 0, words_script = 0, words_style_attr = 0, words_data_attrs = 0;
};

inline void scan_node(const HtmlNode& n, std::vector<std::string>& chain, bool in_script,
                      DocScan& out) {
    switch (n.kind) {
        case HtmlNode::Kind::Comment:
            ++out.n_comments;
            return;
        case HtmlNode::Kind::Text:
            if (in_script) {
                out.chars_script += static_cast<long>(n.text.size());
                out.words_script += count_words(n.text);
            } else {
                out.chars_text += static_cast<long>(n.text.size());
                out.words_text += count_words(n.text);
            }
            return;
        case HtmlNode::Kind::Element:
            break;
    }
    ++out.n_elements;
    out.tag_names.insert(n.tag);
    if (n.tag == "img") ++out.n_img;
    chain.push_back(n.tag);
    out.depths.push_back(static_cast<int>(chain.size()));
    out.unique_tags_per_path.push_back(
        static_cast<long>(std::set<std::string>(chain.begin(), chain.end()).size()));
    out.unique_paths.insert(join_path(chain));
    for (const auto& [name, value] : n.attrs) {
        ++out.n_attrs;
        out.attr_names.insert(name);
        out.chars_attrs += static_cast<long>(value.size());
        if (name == "style") {
            out.chars_style_attr += static_cast<long>(value.size());
            out.words_style_attr += count_words(value);
        }
        if (name == "data" || name.rfind("data-", 0) == 0) {
            out.chars_data_attrs += static_cast<long>(value.size());
            out.words_data_attrs += count_words(value);
        }
        if (name == "href" || name == "src") out.links.push_back(value);
    }
    bool script = in_script || n.tag == "script";
    for (const HtmlNode& c : n.children) scan_node(c, chain, script, out);
    chain.pop_back();
}

}  // namespace detail

inline std::vector<double> extract_html_features(const DomTree& dom,
                                                 const std::map<std::string, double>& meta,
                                                 const std::string& page_url,
                                                 std::vector<std::string>* warnings = nullptr) {
    detail::DocScan scan;
    std::vector<std::string> chain;
    for (const HtmlNode& r : dom.roots) detail::scan_node(r, chain, false, scan);

    std::vector<double> f(kHtmlFeatureCount, 0.0);
    auto set = [&](int feature_1based, double v) { f[static_cast<std::size_t>(feature_1based - 1)] = v; };

    // 1-5: links and domains
    const std::string page_domain = detail::registrable_domain(detail::url_host(page_url));
    long same = 0, with_host = 0;
    std::set<std::string> hosts;
    for (const std::string& link : scan.links) {
        std::string host = detail::url_host(link);
        if (host.empty()) {
            ++same;  // relative references stay on the page's domain
            continue;
        }
        ++with_host;
        hosts.insert(host);
        if (detail::registrable_domain(host) == page_domain) ++same;
    }
    set(1, static_cast<double>(scan.links.size()));
    set(2, static_cast<double>(same));
    set(3, static_cast<double>(static_cast<long>(scan.links.size()) - same));
    set(4, static_cast<double>(with_host));
    set(5, static_cast<double>(hosts.size()));

    // 6-11: tag paths and unique tags per path
    set(6, static_cast<double>(scan.depths.size()));
    set(7, static_cast<double>(scan.unique_paths.size()));
    if (!scan.unique_tags_per_path.empty()) {
        std::vector<double> u(scan.unique_tags_per_path.begin(), scan.unique_tags_per_path.end());
        double usum = 0.0;
        for (double v : u) usum += v;
        set(8, usum);
        set(9, median_of(u));
        set(10, mean_of(u));
        set(11, stddev_of(u));
    }

    // 12-15: depth transitions in document order
    long changes = 0, nonchanges = 0, pos_dir = 0, neg_dir = 0;
    auto sign = [](int d) { return d > 0 ? 1 : d < 0 ? -1 : 0; };
    for (std::size_t i = 0; i + 1 < scan.depths.size(); ++i) {
        int delta = scan.depths[i + 1] - scan.depths[i];
        if (delta > 0) ++pos_dir;
        if (delta < 0) ++neg_dir;
        if (i + 2 < scan.depths.size()) {
            int next = scan.depths[i + 2] - scan.depths[i + 1];
            if (sign(delta) * sign(next) < 0)
                ++changes;  // only a true sign flip counts
            else
                ++nonchanges;
        }
    }
    set(12, static_cast<double>(changes));
    set(13, static_cast<double>(nonchanges));
    set(14, static_cast<double>(pos_dir));
    set(15, static_cast<double>(neg_dir));

    // 16-29: depth statistics
    if (!scan.depths.empty()) {
        std::vector<double> d(scan.depths.begin(), scan.depths.end());
        double dsum = 0.0;
        for (double v : d) dsum += v;
        double dmax = *std::max_element(d.begin(), d.end());
        double dmin = *std::min_element(d.begin(), d.end());
        double dmed = median_of(d);
        double dmean_rounded = static_cast<double>(std::llround(mean_of(d)));
        double p30 = percentile_nearest_rank(d, 30.0);
        double p70 = percentile_nearest_rank(d, 70.0);
        auto count_eq = [&](double v) {
            long n = 0;
            for (double x : d)
                if (x == v) ++n;
            return static_cast<double>(n);
        };
        set(16, dsum);
        set(17, stddev_of(d));
        set(18, count_eq(dmax));
        set(19, count_eq(dmin));
        set(20, count_eq(dmed));
        set(21, count_eq(dmean_rounded));
        set(22, count_eq(p30));
        set(23, count_eq(p70));
        set(24, dmax);
        set(25, dmin);
        set(26, dmed);
        set(27, dmean_rounded);
        set(28, p30);
        set(29, p70);
    }

    // 30-42: tags, attributes, characters, words
    set(30, static_cast<double>(scan.n_elements));
    set(31, static_cast<double>(scan.tag_names.size()));
    set(32, static_cast<double>(scan.n_comments));
    set(33, static_cast<double>(scan.n_attrs));
    set(34, static_cast<double>(scan.attr_names.size()));
    set(35, static_cast<double>(scan.chars_text));
    set(36, static_cast<double>(scan.chars_script));
    set(37, static_cast<double>(scan.chars_style_attr));
    set(38, static_cast<double>(scan.chars_attrs));
    set(39, static_cast<double>(scan.chars_text + scan.chars_script + scan.chars_style_attr));
    set(40, static_cast<double>(scan.chars_data_attrs));
    set(41, static_cast<double>(scan.words_text + scan.words_script + scan.words_style_attr));
    set(42, static_cast<double>(scan.words_data_attrs));

    // 43-62: images and embedded file extensions
    set(43, static_cast<double>(scan.n_img));
    set(44, scan.depths.empty() ? 0.0
                                : static_cast<double>(scan.n_img) /
                                      static_cast<double>(scan.depths.size()));
    static const std::vector<std::string> kTracked = {"png", "ico", "jpg", "gif", "bmp",
                                                      "html", "css", "js", "mp3", "avi"};
    std::map<std::string, long> ext_counts;
    long ext_total = 0;
    for (const std::string& link : scan.links) {
        std::string ext = detail::url_extension(link);
        if (std::find(kTracked.begin(), kTracked.end(), ext) != kTracked.end()) {
            ++ext_counts[ext];
            ++ext_total;
        }
    }
    int slot = 45;
    for (const std::string& ext : kTracked) {
        long c = ext_counts.count(ext) ? ext_counts[ext] : 0;
        set(slot++, static_cast<double>(c));
        if (ext != "mp3" && ext != "avi")  // the last two track counts only
            set(slot++, ext_total > 0 ? static_cast<double>(c) / static_cast<double>(ext_total)
                                      : 0.0);
    }

    // 63-65: capture metadata
    auto meta_or_zero = [&](const char* key, int feature) {
        auto it = meta.find(key);
        if (it == meta.end()) {
            if (warnings)
                warnings->push_back(std::string("missing meta field '") + key + "'; feature " +
                                    std::to_string(feature) + " set to 0");
            return 0.0;
        }
        return it->second;
    };
    set(63, meta_or_zero("duration_seconds", 63));
    set(64, meta_or_zero("html_bytes", 64));
    set(65, meta_or_zero("capture_bytes", 65));
    return f;
}

// Per column, ascending ranks starting at 1; ties share the minimum rank.
inline std::vector<std::vector<double>> rank_transform(
    const std::vector<std::vector<double>>& matrix) {
    if (matrix.empty()) throw Error("rank_transform: empty matrix");
    const std::size_t cols = matrix.front().size();
    for (const auto& row : matrix)
        if (row.size() != cols) throw Error("rank_transform: ragged matrix");
    std::vector<std::vector<double>> out(matrix.size(), std::vector<double>(cols, 0.0));
    std::vector<double> col(matrix.size());
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < matrix.size(); ++i) col[i] = matrix[i][j];
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            std::size_t lo =
                static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), col[i]) -
                                         sorted.begin());
            out[i][j] = static_cast<double>(lo + 1);
        }
    }
    return out;
}

struct FpLabeling {
    double threshold = 0.5;      // site-accuracy cutoff
    std::vector<int> labels;     // per instance: 1 = fingerprintable
    double weight0 = 1.0, weight1 = 1.0;
};

// Each instance inherits its site's label: 1 iff accuracy > threshold. Class
// weights are balanced over the classes present: w_c = N / (K * n_c).
inline FpLabeling fp_labels(const std::map<std::string, double>& site_accuracy,
                            const std::vector<std::string>& instance_sites, double threshold) {
    if (threshold < 0.10 - 1e-12 || threshold > 0.90 + 1e-12)
        throw Error("fp_labels: threshold outside [0.10, 0.90]");
    for (const auto& [site, acc] : site_accuracy)
        if (acc < 0.0 || acc > 1.0) throw Error("fp_labels: accuracy for '" + site + "' outside [0,1]");
    FpLabeling out;
    out.threshold = threshold;
    long n1 = 0;
    for (const std::string& site : instance_sites) {
        auto it = site_accuracy.find(site);
        if (it == site_accuracy.end()) throw Error("fp_labels: no accuracy for site '" + site + "'");
        int label = it->second > threshold ? 1 : 0;
        n1 += label;
        out.labels.push_back(label);
    }
    const long n = static_cast<long>(out.labels.size());
    const long n0 = n - n1;
    const int k = (n0 > 0 ? 1 : 0) + (n1 > 0 ? 1 : 0);
    if (n0 > 0) out.weight0 = static_cast<double>(n) / (k * static_cast<double>(n0));
    if (n1 > 0) out.weight1 = static_cast<double>(n) / (k * static_cast<double>(n1));
    return out;
}

}  // namespace wfkit
