#pragma once

#include "mirspec/classifier.hpp"

namespace mirspec {

// Bagged Gini decision trees on bootstrap samples with per-node random
// feature subsets. The forest score is the exact fraction of trees voting
// CRC. Per-tree RNG streams are derived from the seed, so results do not
// depend on how many threads grew the trees.
class ForestClassifier final : public Classifier {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t vote = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
        std::uint8_t predict(const float* x) const;
    };

    static std::unique_ptr<ForestClassifier> train(
        const ForestParams& params, std::span<const float> x,
        std::span<const std::uint8_t> y, std::size_t dim, std::uint64_t seed,
        unsigned threads = 1);
    static std::unique_ptr<ForestClassifier> from_json(const nlohmann::json& j);

    ClassifierKind kind() const override { return ClassifierKind::RandomForest; }
    std::size_t input_dim() const override { return dim_; }
    void predict_into(const float* x, std::size_t n, std::size_t dim,
                      double* out) const override;
    nlohmann::ordered_json to_json() const override;

    std::size_t n_trees() const { return trees_.size(); }
    std::vector<std::uint8_t> tree_votes(const float* x) const;

private:
    std::size_t dim_ = 0;
    ForestParams params_;
    std::vector<Tree> trees_;
};

}  // namespace mirspec
