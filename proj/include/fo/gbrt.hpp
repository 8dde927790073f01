#pragma once

// Depth-limited regression trees and squared-loss gradient boosting.
//
// Split search is exact and greedy. Every feature is presorted once per fit
// with a canonical tie order (value, then the whole row, then the target), and
// all sums run in that order, so shuffling the training rows reproduces the
// model bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fo/error.hpp"
#include "fo/json_util.hpp"

namespace fo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GbrtHyperParams {
    int max_depth = 2;
    int n_estimators = 50;
    double learning_rate = 0.1;
    int min_samples_leaf = 1;

    void validate() const {
        require(max_depth >= 1, ErrorKind::parameter, "max_depth must be positive");
        require(n_estimators >= 1, ErrorKind::parameter, "n_estimators must be positive");
        require(learning_rate > 0.0 && learning_rate <= 1.0, ErrorKind::parameter, "learning_rate must lie in (0, 1]");
        require(min_samples_leaf >= 1, ErrorKind::parameter, "min_samples_leaf must be positive");
    }
};

inline json to_json(const GbrtHyperParams& h) {
    return json{{"max_depth", h.max_depth},
                {"n_estimators", h.n_estimators},
                {"learning_rate", h.learning_rate},
                {"min_samples_leaf", h.min_samples_leaf}};
}

inline GbrtHyperParams gbrt_hyper_from_json(const json& j) {
    check_keys(j, {"max_depth", "n_estimators", "learning_rate", "min_samples_leaf"}, "GbrtHyperParams");
    GbrtHyperParams h;
    read_optional(j, "max_depth", h.max_depth, "GbrtHyperParams");
    read_optional(j, "n_estimators", h.n_estimators, "GbrtHyperParams");
    read_optional(j, "learning_rate", h.learning_rate, "GbrtHyperParams");
    read_optional(j, "min_samples_leaf", h.min_samples_leaf, "GbrtHyperParams");
    h.validate();
    return h;
}

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< mean target of the rows routed here
    int n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    template <class Row>
    double predict_row(const Row& x) const {
        int k = 0;
        while (!nodes[static_cast<std::size_t>(k)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(k)];
            k = x(n.feature) < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(k)].value;
    }

    int depth() const {
        std::vector<int> d(nodes.size(), 0);
        int out = 0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            out = std::max(out, d[k]);
            if (!nodes[k].is_leaf()) {
                d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
                d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
            }
        }
        return out;
    }

    Vector predict(const Matrix& X) const {
        Vector out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
        return out;
    }
};

namespace detail {

inline void check_training_input(const Matrix& X, const Vector& y) {
    require(X.rows() >= 1 && y.size() >= 1, ErrorKind::fit, "cannot fit on an empty sample");
    require(X.rows() == y.size(), ErrorKind::shape, "feature rows and targets differ in length");
    require(X.cols() >= 1, ErrorKind::shape, "no feature columns");
    require(X.allFinite(), ErrorKind::data, "non-finite feature value");
    require(y.allFinite(), ErrorKind::data, "non-finite target value");
}

/// Per-feature row orders shared by every tree of one boosting run.
struct SortedFeatures {
    std::vector<std::vector<int>> order;     ///< order[j] lists rows by (X(:, j), row, target)
    std::vector<std::vector<double>> value;  ///< value[j][k] = X(order[j][k], j)
    const std::vector<int>& canonical() const { return order[0]; }
};

inline SortedFeatures presort(const Matrix& X, const Vector& y) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    SortedFeatures s;
    s.order.resize(static_cast<std::size_t>(p));
    s.value.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) {
        auto& ord = s.order[static_cast<std::size_t>(j)];
        ord.resize(static_cast<std::size_t>(n));
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
            for (int c = 0; c < p; ++c)
                if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
            return y(a) < y(b);
        });
        auto& val = s.value[static_cast<std::size_t>(j)];
        val.reserve(static_cast<std::size_t>(n));
        for (int row : ord) val.push_back(X(row, j));
    }
    return s;
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
};

/// Midpoint threshold between consecutive distinct values lo < hi, nudged so lo < t <= hi.
inline double midpoint(double lo, double hi) {
    const double mid = lo + 0.5 * (hi - lo);
    return lo < mid ? mid : hi;
}

/// Grows one tree on targets r using the presorted orders. When `leaf_of` is
/// given it receives the leaf each training row is routed to.
inline RegressionTree grow_tree(const Matrix& X, const Vector& r, const SortedFeatures& sorted, int max_depth,
                                int min_leaf, std::vector<int>* leaf_of = nullptr) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    RegressionTree tree;
    tree.nodes.push_back({});
    std::vector<int> node_of(static_cast<std::size_t>(n), 0);
    std::vector<int> frontier{0};

    struct Stats {
        int count = 0;
        double sum = 0.0, sumsq = 0.0, lo = 0.0, hi = 0.0;
    };

    for (int depth = 0;; ++depth) {
        const std::size_t F = frontier.size();
        std::vector<int> slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < F; ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

        std::vector<Stats> stats(F);
        for (int row : sorted.canonical()) {
            const int s = slot[static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)])];
            if (s < 0) continue;
            auto& st = stats[static_cast<std::size_t>(s)];
            const double v = r(row);
            if (st.count == 0) st.lo = st.hi = v;
            st.lo = std::min(st.lo, v);
            st.hi = std::max(st.hi, v);
            ++st.count;
            st.sum += v;
            st.sumsq += v * v;
        }
        for (std::size_t s = 0; s < F; ++s) {
            auto& node = tree.nodes[static_cast<std::size_t>(frontier[s])];
            node.n_samples = stats[s].count;
            node.value = stats[s].sum / stats[s].count;
        }
        if (depth == max_depth) break;

        std::vector<char> active(F, 0);
        bool any = false;
        for (std::size_t s = 0; s < F; ++s) {
            active[s] = stats[s].count >= 2 * min_leaf && stats[s].lo != stats[s].hi;
            any = any || active[s];
        }
        if (!any) break;

        std::vector<SplitCandidate> best(F);
        std::vector<double> tol(F);
        for (std::size_t s = 0; s < F; ++s) {
            const double sse = std::max(0.0, stats[s].sumsq - stats[s].sum * stats[s].sum / stats[s].count);
            tol[s] = 1e-12 * (sse + std::numeric_limits<double>::min());
        }
        struct Scan {
            int count = 0;
            double sum = 0.0, last = 0.0;
        };
        for (int j = 0; j < p; ++j) {
            std::vector<Scan> scan(F);
            const auto& ord = sorted.order[static_cast<std::size_t>(j)];
            const auto& vals = sorted.value[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < ord.size(); ++k) {
                const int row = ord[k];
                const int si = slot[static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)])];
                if (si < 0 || !active[static_cast<std::size_t>(si)]) continue;
                const auto s = static_cast<std::size_t>(si);
                auto& sc = scan[s];
                const double v = vals[k];
                if (sc.count > 0 && v != sc.last) {
                    const int nl = sc.count;
                    const int nr = stats[s].count - nl;
                    if (nl >= min_leaf && nr >= min_leaf) {
                        const double sr = stats[s].sum - sc.sum;
                        const double gain =
                            sc.sum * sc.sum / nl + sr * sr / nr - stats[s].sum * stats[s].sum / stats[s].count;
                        if (gain > best[s].gain + tol[s]) best[s] = {j, midpoint(sc.last, v), gain};
                    }
                }
                ++sc.count;
                sc.sum += r(row);
                sc.last = v;
            }
        }

        std::vector<int> next;
        for (std::size_t s = 0; s < F; ++s) {
            if (best[s].feature < 0) continue;
            const int id = frontier[s];
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            auto& node = tree.nodes[static_cast<std::size_t>(id)];
            node.feature = best[s].feature;
            node.threshold = best[s].threshold;
            node.left = left;
            node.right = left + 1;
            next.push_back(left);
            next.push_back(left + 1);
        }
        if (next.empty()) break;
        for (int row = 0; row < n; ++row) {
            const auto& node = tree.nodes[static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)])];
            if (node.is_leaf()) continue;
            node_of[static_cast<std::size_t>(row)] = X(row, node.feature) < node.threshold ? node.left : node.right;
        }
        frontier = std::move(next);
    }
    if (leaf_of) *leaf_of = std::move(node_of);
    return tree;
}

}  // namespace detail

/// Fits one regression tree by exact greedy search.
inline RegressionTree fit_tree(const Matrix& X, const Vector& y, int max_depth, int min_samples_leaf = 1) {
    detail::check_training_input(X, y);
    require(max_depth >= 0, ErrorKind::parameter, "max_depth must be non-negative");
    require(min_samples_leaf >= 1, ErrorKind::parameter, "min_samples_leaf must be positive");
    return detail::grow_tree(X, y, detail::presort(X, y), max_depth, min_samples_leaf);
}

struct GbrtModel {
    double base_value = 0.0;
    std::vector<RegressionTree> trees;
    GbrtHyperParams hyper;
    std::vector<std::string> feature_names;
    std::vector<double> train_loss;  ///< training MSE after 0..M stages

    double learning_rate() const { return hyper.learning_rate; }
    std::size_t n_features() const { return feature_names.size(); }
};

/// Boosts trees on squared loss: F_0 = mean(y), F_m = F_{m-1} + lr * h_m.
inline GbrtModel fit_gbrt(const Matrix& X, const Vector& y, const GbrtHyperParams& hyper,
                          std::vector<std::string> feature_names = {}) {
    hyper.validate();
    detail::check_training_input(X, y);
    if (feature_names.empty())
        for (Eigen::Index j = 0; j < X.cols(); ++j) feature_names.push_back("x" + std::to_string(j));
    require(static_cast<Eigen::Index>(feature_names.size()) == X.cols(), ErrorKind::shape,
            "feature_names length differs from feature columns");

    const auto sorted = detail::presort(X, y);
    const auto& canon = sorted.canonical();
    const double n = static_cast<double>(X.rows());

    GbrtModel model;
    model.hyper = hyper;
    model.feature_names = std::move(feature_names);
    double total = 0.0;
    for (int i : canon) total += y(i);
    model.base_value = total / n;

    Vector F = Vector::Constant(X.rows(), model.base_value);
    auto loss = [&] {
        double s = 0.0;
        for (int i : canon) s += (y(i) - F(i)) * (y(i) - F(i));
        return s / n;
    };
    model.train_loss.push_back(loss());
    model.trees.reserve(static_cast<std::size_t>(hyper.n_estimators));
    std::vector<int> leaf_of;
    for (int m = 0; m < hyper.n_estimators; ++m) {
        const Vector residual = y - F;
        auto tree = detail::grow_tree(X, residual, sorted, hyper.max_depth, hyper.min_samples_leaf, &leaf_of);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            F(i) += hyper.learning_rate * tree.nodes[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].value;
        model.trees.push_back(std::move(tree));
        model.train_loss.push_back(loss());
    }
    return model;
}

/// Prediction using only the first upto_m trees.
inline Vector staged_predict(const GbrtModel& model, const Matrix& X, std::size_t upto_m) {
    require(upto_m <= model.trees.size(), ErrorKind::range, "upto_m exceeds the number of trees");
    require(static_cast<std::size_t>(X.cols()) == model.n_features(), ErrorKind::shape,
            "feature count differs from training");
    Vector out = Vector::Constant(X.rows(), model.base_value);
    for (std::size_t m = 0; m < upto_m; ++m)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out(i) += model.learning_rate() * model.trees[m].predict_row(X.row(i));
    return out;
}

inline Vector predict(const GbrtModel& model, const Matrix& X) { return staged_predict(model, X, model.trees.size()); }

// --- serialization -------------------------------------------------------------

inline constexpr int kGbrtFormatVersion = 1;

inline json to_json(const RegressionTree& t) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array(), count = json::array();
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
        count.push_back(n.n_samples);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
                {"right", right},     {"value", value},         {"n_samples", count}};
}

inline json to_json(const GbrtModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return json{{"format", "gbrt"},
                {"version", kGbrtFormatVersion},
                {"base_value", m.base_value},
                {"hyper", to_json(m.hyper)},
                {"feature_names", m.feature_names},
                {"train_loss", m.train_loss},
                {"trees", trees}};
}

inline GbrtModel gbrt_from_json(const json& j) {
    try {
        require(j.value("format", std::string()) == "gbrt", ErrorKind::data, "not a gbrt model document");
        require(j.at("version").get<int>() == kGbrtFormatVersion, ErrorKind::data, "unsupported gbrt model version");
        GbrtModel m;
        m.base_value = j.at("base_value").get<double>();
        m.hyper = gbrt_hyper_from_json(j.at("hyper"));
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.train_loss = j.at("train_loss").get<std::vector<double>>();
        for (const auto& jt : j.at("trees")) {
            const auto feature = jt.at("feature").get<std::vector<int>>();
            const auto threshold = jt.at("threshold").get<std::vector<double>>();
            const auto left = jt.at("left").get<std::vector<int>>();
            const auto right = jt.at("right").get<std::vector<int>>();
            const auto value = jt.at("value").get<std::vector<double>>();
            const auto count = jt.at("n_samples").get<std::vector<int>>();
            const std::size_t k = feature.size();
            require(threshold.size() == k && left.size() == k && right.size() == k && value.size() == k &&
                        count.size() == k && k > 0,
                    ErrorKind::data, "ragged tree arrays");
            RegressionTree t;
            for (std::size_t i = 0; i < k; ++i) {
                const bool leaf = feature[i] < 0;
                require(leaf || (feature[i] < static_cast<int>(m.feature_names.size()) && left[i] > 0 &&
                                 right[i] > 0 && left[i] < static_cast<int>(k) && right[i] < static_cast<int>(k)),
                        ErrorKind::data, "invalid tree node");
                t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], count[i]});
            }
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::data, std::string("malformed gbrt model: ") + e.what());
    }
}

}  // namespace fo
