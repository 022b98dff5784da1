#include "mirspec/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlohmann/json.hpp"

#include "mirspec/parallel.hpp"
#include "mirspec/rng.hpp"

namespace mirspec {

namespace {

struct TreeBuilder {
    const float* x;
    const std::uint8_t* y;
    std::size_t dim;
    int mtry;
    int max_depth;
    std::mt19937_64 engine;
    std::vector<ForestClassifier::Node> nodes;
    std::vector<std::size_t> indices;       // bootstrap sample, partitioned in place
    std::vector<std::uint32_t> feature_pool;
    std::vector<std::pair<float, std::uint8_t>> sorted;

    struct Work {
        std::int32_t node;
        std::size_t begin, end;
        int depth;
    };

    // best Gini split over a random feature subset; returns false when no
    // candidate feature separates the node
    bool find_split(std::size_t begin, std::size_t end, std::int32_t& feature,
                    double& threshold) {
        const std::size_t m = end - begin;
        std::size_t pos = 0;
        for (std::size_t i = begin; i < end; ++i) pos += (y[indices[i]] != 0);
        if (pos == 0 || pos == m) return false;

        const double parent =
            static_cast<double>(pos) * static_cast<double>(m - pos);

        // draw mtry distinct features
        for (int f = 0; f < mtry; ++f) {
            std::uniform_int_distribution<std::size_t> d(f, dim - 1);
            std::swap(feature_pool[f], feature_pool[d(engine)]);
        }

        double best_gain = 0.0;
        bool found = false;
        for (int f = 0; f < mtry; ++f) {
            const std::uint32_t feat = feature_pool[f];
            sorted.resize(m);
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t idx = indices[begin + i];
                sorted[i] = {x[idx * dim + feat], y[idx]};
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left_pos = 0;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                left_pos += (sorted[i].second != 0);
                if (sorted[i].first == sorted[i + 1].first) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(m - i - 1);
                const double lp = static_cast<double>(left_pos);
                const double rp = static_cast<double>(pos - left_pos);
                // Gini gain up to the constant 1/m factor:
                // parent/m - [nl*gini_l + nr*gini_r], gini = 2 p (1-p)
                const double child =
                    lp * (nl - lp) / nl + rp * (nr - rp) / nr;
                const double gain = parent / static_cast<double>(m) - child;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    feature = static_cast<std::int32_t>(feat);
                    threshold = (static_cast<double>(sorted[i].first) +
                                 static_cast<double>(sorted[i + 1].first)) /
                                2.0;
                    found = true;
                }
            }
        }
        return found;
    }

    void build(std::size_t n_samples) {
        std::vector<Work> stack;
        nodes.clear();
        nodes.reserve(64);
        nodes.push_back({});
        stack.push_back({0, 0, n_samples, 0});

        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();

            bool leaf = (w.end - w.begin) < 2 ||
                        (max_depth > 0 && w.depth >= max_depth);
            std::int32_t feature = -1;
            double threshold = 0.0;
            if (!leaf) leaf = !find_split(w.begin, w.end, feature, threshold);
            if (leaf) {
                std::size_t pos = 0;
                for (std::size_t i = w.begin; i < w.end; ++i)
                    pos += (y[indices[i]] != 0);
                nodes[w.node].feature = -1;
                nodes[w.node].vote = (pos * 2 > w.end - w.begin) ? 1 : 0;
                continue;
            }

            const auto mid = static_cast<std::size_t>(
                std::partition(indices.begin() + static_cast<std::ptrdiff_t>(w.begin),
                               indices.begin() + static_cast<std::ptrdiff_t>(w.end),
                               [&](std::size_t idx) {
                                   return x[idx * dim + static_cast<std::size_t>(
                                                            feature)] < threshold;
                               }) -
                indices.begin());

            nodes[w.node].feature = feature;
            nodes[w.node].threshold = threshold;
            nodes.push_back({});
            const auto left = static_cast<std::int32_t>(nodes.size() - 1);
            nodes.push_back({});
            const auto right = static_cast<std::int32_t>(nodes.size() - 1);
            nodes[w.node].left = left;
            nodes[w.node].right = right;
            stack.push_back({left, w.begin, mid, w.depth + 1});
            stack.push_back({right, mid, w.end, w.depth + 1});
        }
    }
};

}  // namespace

std::uint8_t ForestClassifier::Tree::predict(const float* x) const {
    std::int32_t node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        node = (x[n.feature] < n.threshold) ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].vote;
}

std::unique_ptr<ForestClassifier> ForestClassifier::train(
    const ForestParams& params, std::span<const float> x,
    std::span<const std::uint8_t> y, std::size_t dim, std::uint64_t seed,
    unsigned threads) {
    const std::size_t n = y.size();
    if (dim < 1 || x.size() != n * dim)
        throw Error("bad-input", "feature matrix does not match labels");
    if (n < 2) throw Error("bad-input", "forest needs at least 2 samples");
    if (params.n_trees < 1) throw Error("bad-input", "need at least one tree");
    std::size_t pos = 0;
    for (auto v : y) pos += (v != 0);
    if (pos == 0 || pos == n)
        throw Error("single-class", "forest needs samples of both classes");
    for (float v : x)
        if (!std::isfinite(v)) throw Error("bad-input", "non-finite feature value");

    const int mtry = params.mtry > 0
                         ? std::min<int>(params.mtry, static_cast<int>(dim))
                         : std::max(1, static_cast<int>(std::floor(
                                           std::sqrt(static_cast<double>(dim)))));

    auto model = std::make_unique<ForestClassifier>();
    model->dim_ = dim;
    model->params_ = params;
    model->params_.mtry = mtry;
    model->trees_.resize(static_cast<std::size_t>(params.n_trees));

    parallel_for(model->trees_.size(), threads, [&](std::size_t t) {
        TreeBuilder builder;
        builder.x = x.data();
        builder.y = y.data();
        builder.dim = dim;
        builder.mtry = mtry;
        builder.max_depth = params.max_depth;
        builder.engine = make_engine(derive_seed(seed, t));
        builder.feature_pool.resize(dim);
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0u);

        builder.indices.resize(n);
        std::uniform_int_distribution<std::size_t> boot(0, n - 1);
        for (std::size_t i = 0; i < n; ++i)
            builder.indices[i] = boot(builder.engine);

        builder.build(n);
        model->trees_[t].nodes = std::move(builder.nodes);
    });
    return model;
}

std::vector<std::uint8_t> ForestClassifier::tree_votes(const float* x) const {
    std::vector<std::uint8_t> votes(trees_.size());
    for (std::size_t t = 0; t < trees_.size(); ++t)
        votes[t] = trees_[t].predict(x);
    return votes;
}

void ForestClassifier::predict_into(const float* x, std::size_t n,
                                    std::size_t dim, double* out) const {
    if (dim != dim_)
        throw Error("length-mismatch",
                    "feature dimension does not match the forest");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t votes = 0;
        for (const auto& tree : trees_) votes += tree.predict(x + i * dim);
        out[i] = static_cast<double>(votes) / static_cast<double>(trees_.size());
    }
}

nlohmann::ordered_json ForestClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "mirspec-model";
    j["version"] = 1;
    j["kind"] = "forest";
    j["hyperparameters"]["n_trees"] = params_.n_trees;
    j["hyperparameters"]["max_depth"] = params_.max_depth;
    j["hyperparameters"]["mtry"] = params_.mtry;
    j["parameters"]["dim"] = dim_;
    auto trees = nlohmann::ordered_json::array();
    for (const auto& tree : trees_) {
        nlohmann::ordered_json t;
        std::vector<std::int32_t> feature, left, right;
        std::vector<double> threshold;
        std::vector<int> vote;
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            vote.push_back(node.vote);
        }
        t["feature"] = feature;
        t["threshold"] = threshold;
        t["left"] = left;
        t["right"] = right;
        t["vote"] = vote;
        trees.push_back(std::move(t));
    }
    j["parameters"]["trees"] = std::move(trees);
    return j;
}

std::unique_ptr<ForestClassifier> ForestClassifier::from_json(
    const nlohmann::json& j) {
    auto model = std::make_unique<ForestClassifier>();
    const auto& h = j.at("hyperparameters");
    model->params_.n_trees = h.at("n_trees").get<int>();
    model->params_.max_depth = h.at("max_depth").get<int>();
    model->params_.mtry = h.at("mtry").get<int>();
    const auto& p = j.at("parameters");
    model->dim_ = p.at("dim").get<std::size_t>();
    for (const auto& t : p.at("trees")) {
        Tree tree;
        const auto feature = t.at("feature").get<std::vector<std::int32_t>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<std::int32_t>>();
        const auto right = t.at("right").get<std::vector<std::int32_t>>();
        const auto vote = t.at("vote").get<std::vector<int>>();
        tree.nodes.resize(feature.size());
        for (std::size_t i = 0; i < feature.size(); ++i) {
            tree.nodes[i] = {feature[i], threshold[i], left[i], right[i],
                             static_cast<std::uint8_t>(vote[i])};
        }
        model->trees_.push_back(std::move(tree));
    }
    return model;
}

}  // namespace mirspec
