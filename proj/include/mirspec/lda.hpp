#pragma once

#include "mirspec/classifier.hpp"

namespace mirspec {

// Two-class linear discriminant: per-class Gaussians with a shared pooled
// covariance (ridge-regularized), empirical priors; the two-class softmax
// of the discriminants collapses to sigmoid(w.x + b).
class LdaClassifier final : public Classifier {
public:
    static std::unique_ptr<LdaClassifier> train(const LdaParams& params,
                                                std::span<const float> x,
                                                std::span<const std::uint8_t> y,
                                                std::size_t dim);
    static std::unique_ptr<LdaClassifier> from_json(const nlohmann::json& j);

    ClassifierKind kind() const override { return ClassifierKind::Lda; }
    std::size_t input_dim() const override { return weights_.size(); }
    void predict_into(const float* x, std::size_t n, std::size_t dim,
                      double* out) const override;
    nlohmann::ordered_json to_json() const override;

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    double ridge() const { return ridge_; }
    const std::vector<double>& mean_nc() const { return mean_nc_; }
    const std::vector<double>& mean_crc() const { return mean_crc_; }

private:
    std::vector<double> weights_;
    double bias_ = 0.0;
    double ridge_ = 0.0;
    std::vector<double> mean_nc_, mean_crc_;
    double prior_crc_ = 0.5;
};

}  // namespace mirspec
