#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "macrocast/errors.hpp"
#include "macrocast/rng.hpp"
#include "macrocast/supervised.hpp"

namespace macrocast {

struct ForestConfig {
    std::size_t n_trees = 500;
    int mtry = 2;  // ceil(6 / 3), the regression default
    std::size_t min_node_size = 5;
    std::size_t max_depth = 0;  // 0 means unlimited
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// Binary CART regression tree stored as a flat node array.
class RegressionTree {
  public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    static RegressionTree leaf(double value) {
        Node n;
        n.value = value;
        return RegressionTree({n});
    }

    double predict(const std::array<double, 6>& x) const {
        int idx = 0;
        while (nodes_[static_cast<std::size_t>(idx)].feature >= 0) {
            const Node& node = nodes_[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
        }
        return nodes_[static_cast<std::size_t>(idx)].value;
    }

    const std::vector<Node>& nodes() const { return nodes_; }

  private:
    std::vector<Node> nodes_;
};

class Forest {
  public:
    explicit Forest(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

    double predict(const std::array<double, 6>& x) const {
        double sum = 0.0;
        for (const RegressionTree& t : trees_) sum += t.predict(x);
        return sum / static_cast<double>(trees_.size());
    }

    std::size_t size() const { return trees_.size(); }
    const std::vector<RegressionTree>& trees() const { return trees_; }

  private:
    std::vector<RegressionTree> trees_;
};

namespace detail {

struct TreeBuilder {
    std::span<const SupervisedRow> rows;
    const ForestConfig& config;
    Rng& rng;
    std::vector<RegressionTree::Node> nodes;
    std::vector<std::size_t> scratch_features;

    int build(std::vector<std::size_t>& indices, std::size_t depth) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i : indices) {
            sum += rows[i].y;
            sum_sq += rows[i].y * rows[i].y;
        }
        const auto n = static_cast<double>(indices.size());
        const double mean = sum / n;
        const double sse = sum_sq - sum * sum / n;

        const bool at_depth_cap = config.max_depth > 0 && depth >= config.max_depth;
        if (indices.size() < config.min_node_size || !(sse > 0.0) || at_depth_cap) {
            return make_leaf(mean);
        }

        // candidate features: mtry drawn without replacement, then scanned in
        // ascending index order so gain ties resolve deterministically
        scratch_features.resize(6);
        std::iota(scratch_features.begin(), scratch_features.end(), 0);
        const auto mtry = static_cast<std::size_t>(std::clamp(config.mtry, 1, 6));
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + rng.below(6 - i);
            std::swap(scratch_features[i], scratch_features[j]);
        }
        std::vector<std::size_t> candidates(scratch_features.begin(),
                                            scratch_features.begin() + static_cast<std::ptrdiff_t>(mtry));
        std::sort(candidates.begin(), candidates.end());

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_children_sse = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, double>> pairs;  // (x_feature, y)
        for (std::size_t f : candidates) {
            pairs.clear();
            pairs.reserve(indices.size());
            for (std::size_t i : indices) pairs.emplace_back(rows[i].x[f], rows[i].y);
            std::sort(pairs.begin(), pairs.end());

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
                left_sum += pairs[i].second;
                left_sq += pairs[i].second * pairs[i].second;
                if (pairs[i].first == pairs[i + 1].first) continue;  // no boundary here
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(pairs.size() - i - 1);
                double right_sum = sum - left_sum;
                double right_sq = sum_sq - left_sq;
                const double children_sse = (left_sq - left_sum * left_sum / nl) +
                                            (right_sq - right_sum * right_sum / nr);
                if (children_sse < best_children_sse) {
                    best_children_sse = children_sse;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (pairs[i].first + pairs[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf(mean);  // all candidates constant

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : indices) {
            if (rows[i].x[static_cast<std::size_t>(best_feature)] <= best_threshold) {
                left_idx.push_back(i);
            } else {
                right_idx.push_back(i);
            }
        }
        if (left_idx.empty() || right_idx.empty()) return make_leaf(mean);

        const int self = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(self)].feature = best_feature;
        nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
        indices.clear();
        indices.shrink_to_fit();
        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        nodes[static_cast<std::size_t>(self)].left = left;
        nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    int make_leaf(double value) {
        RegressionTree::Node n;
        n.value = value;
        nodes.push_back(n);
        return static_cast<int>(nodes.size() - 1);
    }
};

inline RegressionTree fit_tree(std::span<const SupervisedRow> rows, const ForestConfig& config,
                               std::uint64_t tree_seed) {
    Rng rng(tree_seed);
    std::vector<std::size_t> indices(rows.size());
    if (config.bootstrap) {
        for (std::size_t& i : indices) i = rng.below(rows.size());
    } else {
        std::iota(indices.begin(), indices.end(), 0);
    }
    TreeBuilder builder{rows, config, rng, {}, {}};
    const int root = builder.build(indices, 0);
    // the recursive builder emits the root first
    (void)root;
    return RegressionTree(std::move(builder.nodes));
}

}  // namespace detail

/// Bagged CART regression forest. Tree b draws its own generator from
/// mix_seed(seed, b), so results are independent of fitting order.
inline Forest fit_forest(std::span<const SupervisedRow> rows, const ForestConfig& config) {
    if (rows.size() < 2) {
        throw TooFewRows("forest training needs at least 2 rows, got " + std::to_string(rows.size()));
    }
    if (config.n_trees < 1 || config.mtry < 1 || config.mtry > 6) {
        throw ConfigInvalid("forest config: need n_trees >= 1 and mtry in 1..6");
    }
    std::vector<RegressionTree> trees;
    trees.reserve(config.n_trees);
    for (std::size_t b = 0; b < config.n_trees; ++b) {
        trees.push_back(detail::fit_tree(rows, config, mix_seed(config.seed, b)));
    }
    return Forest(std::move(trees));
}

inline std::vector<double> predict_forest(const Forest& forest, std::span<const SupervisedRow> rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const SupervisedRow& r : rows) out.push_back(forest.predict(r.x));
    return out;
}

}  // namespace macrocast
