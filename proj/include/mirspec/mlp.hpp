#pragma once

#include "mirspec/classifier.hpp"

namespace mirspec {

// Dense feedforward network: ReLU hidden layers, one sigmoid output unit,
// trained with mini-batch Adam on mean binary cross-entropy. Parameters
// live in one flat vector (per layer: row-major weight matrix, then bias)
// so gradients can be checked against finite differences.
class MlpModel {
public:
    // layer_sizes = {input, hidden..., 1}; parameters start at zero
    explicit MlpModel(std::vector<int> layer_sizes);
    static MlpModel glorot_init(std::vector<int> layer_sizes,
                                std::uint64_t seed);

    const std::vector<int>& layer_sizes() const { return layers_; }
    std::size_t n_params() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    // x is n x input row-major; returns sigmoid scores
    std::vector<double> forward(std::span<const double> x, std::size_t n) const;
    double mean_bce(std::span<const double> x, std::span<const std::uint8_t> y,
                    std::size_t n) const;
    // analytic gradient of the mean BCE at the current parameters
    std::vector<double> gradient(std::span<const double> x,
                                 std::span<const std::uint8_t> y,
                                 std::size_t n) const;

    struct TrainOptions {
        int epochs = 20;
        int batch_size = 128;
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
        std::uint64_t seed = 0;
    };
    // returns the full-set mean BCE after each epoch
    std::vector<double> train(std::span<const double> x,
                              std::span<const std::uint8_t> y, std::size_t n,
                              const TrainOptions& options);

private:
    std::vector<int> layers_;
    std::vector<double> params_;
};

class MlpClassifier final : public Classifier {
public:
    static std::unique_ptr<MlpClassifier> train(const MlpParams& params,
                                                std::span<const float> x,
                                                std::span<const std::uint8_t> y,
                                                std::size_t dim,
                                                std::uint64_t seed);
    static std::unique_ptr<MlpClassifier> from_json(const nlohmann::json& j);
    explicit MlpClassifier(MlpModel model) : model_(std::move(model)) {}

    ClassifierKind kind() const override { return ClassifierKind::Mlp3; }
    std::size_t input_dim() const override {
        return static_cast<std::size_t>(model_.layer_sizes().front());
    }
    void predict_into(const float* x, std::size_t n, std::size_t dim,
                      double* out) const override;
    nlohmann::ordered_json to_json() const override;

    const MlpModel& model() const { return model_; }
    const std::vector<double>& loss_history() const { return loss_history_; }

private:
    MlpModel model_;
    std::vector<double> loss_history_;
    MlpParams params_;
};

}  // namespace mirspec
