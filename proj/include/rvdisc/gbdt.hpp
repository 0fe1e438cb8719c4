#pragma once

// Gradient-boosted regression trees for binary classification with
// logistic loss. Exact greedy split search on raw feature values; among
// equal-gain candidates the lowest feature index, then the lowest threshold,
// wins. A sample goes left when x[feature] < threshold.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvdisc/common.hpp"

namespace rvdisc::gbdt {

struct Config {
    int n_trees = 200;
    int max_depth = 6;
    double learning_rate = 0.05;
    double subsample = 0.8;
    double colsample_bytree = 0.8;
    double reg_lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    double base_score = 0.5;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_trees < 0) throw std::invalid_argument("gbdt: n_trees must be >= 0");
        if (max_depth < 1) throw std::invalid_argument("gbdt: max_depth must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw std::invalid_argument("gbdt: learning_rate must lie in (0, 1]");
        if (!(subsample > 0.0 && subsample <= 1.0)) throw std::invalid_argument("gbdt: subsample must lie in (0, 1]");
        if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0))
            throw std::invalid_argument("gbdt: colsample_bytree must lie in (0, 1]");
        if (!(reg_lambda >= 0.0) || !(gamma >= 0.0) || !(min_child_weight >= 0.0))
            throw std::invalid_argument("gbdt: regularisers must be >= 0");
        if (!(base_score > 0.0 && base_score < 1.0)) throw std::invalid_argument("gbdt: base_score must lie in (0, 1)");
    }
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;

    std::size_t size() const { return rows.size(); }
    std::size_t arity() const { return feature_names.size(); }
};

struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output, learning rate applied
    double gain = 0.0;   // structure-score improvement of the split
    double cover = 0.0;  // hessian sum reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<Node> nodes;

    double predict(std::span<const double> x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    int depth() const { return depth_of(0); }

private:
    int depth_of(int i) const {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) return 0;
        return 1 + std::max(depth_of(n.left), depth_of(n.right));
    }
};

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct Model {
    Config config;
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;

    double base_margin() const { return logit(config.base_score); }

    double predict_margin(std::span<const double> x) const {
        if (x.size() != feature_names.size())
            throw std::invalid_argument("gbdt: expected " + std::to_string(feature_names.size()) +
                                        " features, got " + std::to_string(x.size()));
        double m = base_margin();
        for (const auto& t : trees) m += t.predict(x);
        return m;
    }

    double predict_proba(std::span<const double> x) const { return sigmoid(predict_margin(x)); }

    int predict_label(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }

    bool operator==(const Model& o) const;
};

/// Training logloss after each round, for diagnostics.
struct TrainingTrace {
    std::vector<double> logloss;
};

namespace detail {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

class Builder {
public:
    Builder(const Dataset& data, const Config& cfg, const std::vector<double>& grad,
            const std::vector<double>& hess, std::vector<int> features)
        : data_(data), cfg_(cfg), grad_(grad), hess_(hess), features_(std::move(features)) {}

    Tree build(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    double score(double g, double h) const { return g * g / (h + cfg_.reg_lambda); }

    int grow(std::vector<std::size_t> rows, int depth) {
        double g = 0.0, h = 0.0;
        for (auto r : rows) {
            g += grad_[r];
            h += hess_[r];
        }
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes.back().cover = h;

        SplitCandidate best;
        if (depth < cfg_.max_depth && rows.size() >= 2) best = find_split(rows, g, h);
        if (best.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(id)].value = -g / (h + cfg_.reg_lambda) * cfg_.learning_rate;
            return id;
        }

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (data_.rows[r][static_cast<std::size_t>(best.feature)] < best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        const int rgt = grow(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = rgt;
        node.gain = best.gain;
        return id;
    }

    SplitCandidate find_split(const std::vector<std::size_t>& rows, double g_total, double h_total) const {
        SplitCandidate best;
        double best_loss_change = 0.0;
        const double parent = score(g_total, h_total);
        std::vector<std::size_t> order;
        for (int f : features_) {
            const auto fu = static_cast<std::size_t>(f);
            order = rows;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return data_.rows[a][fu] < data_.rows[b][fu];
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                gl += grad_[order[i]];
                hl += hess_[order[i]];
                const double x0 = data_.rows[order[i]][fu];
                const double x1 = data_.rows[order[i + 1]][fu];
                if (!(x0 < x1)) continue;
                const double gr = g_total - gl;
                const double hr = h_total - hl;
                if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) continue;
                const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent);
                const double loss_change = gain - cfg_.gamma;
                if (loss_change > best_loss_change) {
                    double thr = x0 + (x1 - x0) / 2.0;
                    if (!(thr > x0)) thr = x1;
                    best_loss_change = loss_change;
                    best = {gain, f, thr};
                }
            }
        }
        return best;
    }

    const Dataset& data_;
    const Config& cfg_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    std::vector<int> features_;
    Tree tree_;
};

inline double logloss_of(const std::vector<double>& margins, const std::vector<int>& labels) {
    double acc = 0.0;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double p = std::clamp(sigmoid(margins[i]), 1e-15, 1.0 - 1e-15);
        acc -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return acc / static_cast<double>(margins.size());
}

}  // namespace detail

inline void validate_dataset(const Dataset& data) {
    if (data.rows.size() != data.labels.size()) throw std::invalid_argument("gbdt: rows/labels length mismatch");
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        if (data.rows[i].size() != data.arity())
            throw std::invalid_argument("gbdt: row " + std::to_string(i) + " has wrong arity");
        for (std::size_t f = 0; f < data.arity(); ++f)
            if (!std::isfinite(data.rows[i][f]))
                throw std::invalid_argument("gbdt: non-finite value in column '" + data.feature_names[f] + "' (row " +
                                            std::to_string(i) + ")");
        if (data.labels[i] != 0 && data.labels[i] != 1)
            throw std::invalid_argument("gbdt: labels must be 0 or 1");
    }
}

namespace detail {
/// The boosting loop without the class-balance check; train() is the public entry.
inline Model boost(const Dataset& data, const Config& cfg, TrainingTrace* trace = nullptr) {
    cfg.validate();
    validate_dataset(data);
    if (data.size() < 2) throw std::invalid_argument("gbdt: need at least 2 samples");
    if (data.arity() == 0) throw std::invalid_argument("gbdt: need at least one feature");

    Model model{cfg, data.feature_names, {}};
    const std::size_t n = data.size();
    std::vector<double> margin(n, model.base_margin());
    std::vector<double> grad(n), hess(n);
    Rng rng = make_rng({cfg.seed});
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto n_features = static_cast<int>(data.arity());
    const int n_cols = std::max(1, static_cast<int>(std::floor(cfg.colsample_bytree * n_features + 1e-9)));

    for (int round = 0; round < cfg.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - data.labels[i];
            hess[i] = p * (1.0 - p);
        }
        std::vector<std::size_t> rows;
        if (cfg.subsample >= 1.0) {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        } else {
            for (std::size_t i = 0; i < n; ++i)
                if (unit(rng) < cfg.subsample) rows.push_back(i);
            if (rows.empty()) {
                rows.resize(n);
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
        }
        std::vector<int> cols(static_cast<std::size_t>(n_features));
        std::iota(cols.begin(), cols.end(), 0);
        if (n_cols < n_features) {
            for (int i = 0; i < n_cols; ++i) {
                std::uniform_int_distribution<int> pick(i, n_features - 1);
                std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(pick(rng))]);
            }
            cols.resize(static_cast<std::size_t>(n_cols));
            std::sort(cols.begin(), cols.end());
        }

        detail::Builder builder(data, cfg, grad, hess, std::move(cols));
        Tree tree = builder.build(std::move(rows));
        for (std::size_t i = 0; i < n; ++i) margin[i] += tree.predict(data.rows[i]);
        model.trees.push_back(std::move(tree));
        if (trace) trace->logloss.push_back(detail::logloss_of(margin, data.labels));
    }
    return model;
}
}  // namespace detail

inline Model train(const Dataset& data, const Config& cfg, TrainingTrace* trace = nullptr) {
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    if (!data.labels.empty() && (positives == 0 || positives == static_cast<long>(data.labels.size())))
        throw std::invalid_argument("gbdt: training data contains a single class");
    return detail::boost(data, cfg, trace);
}

struct Metrics {
    double accuracy = 0.0;
    double logloss = 0.0;
    std::size_t true_positive = 0;   // ship called ship
    std::size_t true_negative = 0;   // array called array
    std::size_t false_positive = 0;  // array called ship
    std::size_t false_negative = 0;  // ship called array

    std::size_t count() const { return true_positive + true_negative + false_positive + false_negative; }
};

/// Metrics from probabilities of class 1; threshold 0.5, logloss clamped at 1e-15.
inline Metrics evaluate_probabilities(std::span<const double> probs, std::span<const int> labels) {
    if (probs.empty()) throw std::invalid_argument("evaluate: empty set");
    if (probs.size() != labels.size()) throw std::invalid_argument("evaluate: size mismatch");
    Metrics m;
    double ll = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        const int pred = probs[i] >= 0.5 ? 1 : 0;
        ll -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
        if (pred == 1 && labels[i] == 1) ++m.true_positive;
        if (pred == 0 && labels[i] == 0) ++m.true_negative;
        if (pred == 1 && labels[i] == 0) ++m.false_positive;
        if (pred == 0 && labels[i] == 1) ++m.false_negative;
    }
    m.logloss = ll / static_cast<double>(probs.size());
    m.accuracy = static_cast<double>(m.true_positive + m.true_negative) / static_cast<double>(probs.size());
    return m;
}

inline Metrics evaluate(const Model& model, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty set");
    std::vector<double> probs;
    probs.reserve(data.size());
    for (const auto& row : data.rows) probs.push_back(model.predict_proba(row));
    return evaluate_probabilities(probs, data.labels);
}

// Serialised form (JSON):
// {
//   "format": "rvdisc-gbdt", "version": 1,
//   "config": {n_trees, max_depth, learning_rate, subsample, colsample_bytree,
//              reg_lambda, gamma, min_child_weight, base_score, seed},
//   "feature_names": [...],
//   "trees": [ [ node, ... ], ... ]
// }
// node = {"leaf": value, "cover": h} or
//        {"feature": i, "threshold": t, "left": l, "right": r, "gain": g, "cover": h}
// Doubles are written in shortest round-trip form, so a load reproduces the
// model bit for bit.

inline nlohmann::json config_to_json(const Config& c) {
    return {{"n_trees", c.n_trees},           {"max_depth", c.max_depth},
            {"learning_rate", c.learning_rate}, {"subsample", c.subsample},
            {"colsample_bytree", c.colsample_bytree}, {"reg_lambda", c.reg_lambda},
            {"gamma", c.gamma},               {"min_child_weight", c.min_child_weight},
            {"base_score", c.base_score},     {"seed", c.seed}};
}

inline Config config_from_json(const nlohmann::json& j, Config c = {}) {
    c.n_trees = j.value("n_trees", c.n_trees);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.subsample = j.value("subsample", c.subsample);
    c.colsample_bytree = j.value("colsample_bytree", c.colsample_bytree);
    c.reg_lambda = j.value("reg_lambda", c.reg_lambda);
    c.gamma = j.value("gamma", c.gamma);
    c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
    c.base_score = j.value("base_score", c.base_score);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const Model& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) {
            if (n.is_leaf())
                nodes.push_back({{"leaf", n.value}, {"cover", n.cover}});
            else
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"gain", n.gain},
                                 {"cover", n.cover}});
        }
        trees.push_back(std::move(nodes));
    }
    return {{"format", "rvdisc-gbdt"},
            {"version", 1},
            {"config", config_to_json(m.config)},
            {"feature_names", m.feature_names},
            {"trees", std::move(trees)}};
}

inline Model from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "rvdisc-gbdt") throw std::runtime_error("gbdt: not a serialised model");
    if (j.value("version", 0) != 1) throw std::runtime_error("gbdt: unsupported model version");
    Model m;
    m.config = config_from_json(j.at("config"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt) {
            Node n;
            n.cover = jn.at("cover").get<double>();
            if (jn.contains("leaf")) {
                n.value = jn.at("leaf").get<double>();
            } else {
                n.feature = jn.at("feature").get<int>();
                n.threshold = jn.at("threshold").get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
                n.gain = jn.at("gain").get<double>();
                if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= m.feature_names.size())
                    throw std::runtime_error("gbdt: split feature out of range");
            }
            t.nodes.push_back(n);
        }
        const auto count = static_cast<int>(t.nodes.size());
        for (const auto& n : t.nodes)
            if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count))
                throw std::runtime_error("gbdt: child index out of range");
        if (t.nodes.empty()) throw std::runtime_error("gbdt: empty tree");
        m.trees.push_back(std::move(t));
    }
    return m;
}

inline void save(const Model& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("gbdt: cannot write " + path);
    os << to_json(m).dump(1) << '\n';
}

inline Model load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("gbdt: cannot read " + path);
    return from_json(nlohmann::json::parse(is));
}

inline bool Model::operator==(const Model& o) const {
    if (feature_names != o.feature_names || trees.size() != o.trees.size()) return false;
    if (to_json(*this)["config"] != to_json(o)["config"]) return false;
    for (std::size_t t = 0; t < trees.size(); ++t) {
        const auto& a = trees[t].nodes;
        const auto& b = o.trees[t].nodes;
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].feature != b[i].feature || a[i].threshold != b[i].threshold || a[i].left != b[i].left ||
                a[i].right != b[i].right || a[i].value != b[i].value || a[i].gain != b[i].gain ||
                a[i].cover != b[i].cover)
                return false;
    }
    return true;
}

}  // namespace rvdisc::gbdt
