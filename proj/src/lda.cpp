#include "mirspec/lda.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nlohmann/json.hpp"

namespace mirspec {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

std::unique_ptr<LdaClassifier> LdaClassifier::train(
    const LdaParams& params, std::span<const float> x,
    std::span<const std::uint8_t> y, std::size_t dim) {
    const std::size_t n = y.size();
    if (dim < 1 || x.size() != n * dim)
        throw Error("bad-input", "feature matrix does not match labels");
    if (n < 3)
        throw Error("bad-input", "LDA needs at least 3 samples");

    std::size_t n1 = 0;
    for (auto v : y) n1 += (v != 0);
    const std::size_t n0 = n - n1;
    if (n0 == 0 || n1 == 0)
        throw Error("single-class", "LDA needs samples of both classes");

    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = x.data() + i * dim;
        auto& mu = y[i] ? mu1 : mu0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!std::isfinite(row[j]))
                throw Error("bad-input", "non-finite feature value");
            mu(j) += row[j];
        }
    }
    mu0 /= static_cast<double>(n0);
    mu1 /= static_cast<double>(n1);

    // pooled within-class scatter, streamed in centered chunks
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    constexpr std::size_t kChunk = 2048;
    Eigen::MatrixXd buf(kChunk, d);
    std::size_t filled = 0;
    auto flush = [&]() {
        if (filled == 0) return;
        scatter.selfadjointView<Eigen::Lower>().rankUpdate(
            buf.topRows(static_cast<Eigen::Index>(filled)).transpose(), 1.0);
        filled = 0;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = x.data() + i * dim;
        const Eigen::VectorXd& mu = y[i] ? mu1 : mu0;
        for (Eigen::Index j = 0; j < d; ++j)
            buf(static_cast<Eigen::Index>(filled), j) = row[j] - mu(j);
        if (++filled == kChunk) flush();
    }
    flush();
    scatter = scatter.selfadjointView<Eigen::Lower>();

    Eigen::MatrixXd cov = scatter / static_cast<double>(n - 2);
    const double ridge = params.ridge_scale * cov.trace() / static_cast<double>(dim);
    cov.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw Error("singular-covariance",
                    "pooled covariance is singular even after ridge " +
                        std::to_string(ridge));
    const Eigen::VectorXd w = ldlt.solve(mu1 - mu0);
    if (!w.allFinite())
        throw Error("singular-covariance",
                    "covariance solve produced non-finite weights (ridge " +
                        std::to_string(ridge) + ")");

    auto model = std::make_unique<LdaClassifier>();
    model->weights_.assign(w.data(), w.data() + dim);
    model->mean_nc_.assign(mu0.data(), mu0.data() + dim);
    model->mean_crc_.assign(mu1.data(), mu1.data() + dim);
    model->ridge_ = ridge;
    model->prior_crc_ = static_cast<double>(n1) / static_cast<double>(n);
    const Eigen::VectorXd mid = (mu0 + mu1) / 2.0;
    model->bias_ = -w.dot(mid) +
                   std::log(model->prior_crc_ / (1.0 - model->prior_crc_));
    return model;
}

void LdaClassifier::predict_into(const float* x, std::size_t n,
                                 std::size_t dim, double* out) const {
    if (dim != weights_.size())
        throw Error("length-mismatch", "feature dimension does not match LDA");
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = x + i * dim;
        double z = bias_;
        for (std::size_t j = 0; j < dim; ++j) z += weights_[j] * row[j];
        out[i] = sigmoid(z);
    }
}

nlohmann::ordered_json LdaClassifier::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "mirspec-model";
    j["version"] = 1;
    j["kind"] = "lda";
    j["hyperparameters"]["ridge"] = ridge_;
    j["parameters"]["weights"] = weights_;
    j["parameters"]["bias"] = bias_;
    j["parameters"]["mean_nc"] = mean_nc_;
    j["parameters"]["mean_crc"] = mean_crc_;
    j["parameters"]["prior_crc"] = prior_crc_;
    return j;
}

std::unique_ptr<LdaClassifier> LdaClassifier::from_json(
    const nlohmann::json& j) {
    auto model = std::make_unique<LdaClassifier>();
    const auto& p = j.at("parameters");
    model->weights_ = p.at("weights").get<std::vector<double>>();
    model->bias_ = p.at("bias").get<double>();
    model->mean_nc_ = p.at("mean_nc").get<std::vector<double>>();
    model->mean_crc_ = p.at("mean_crc").get<std::vector<double>>();
    model->prior_crc_ = p.at("prior_crc").get<double>();
    model->ridge_ = j.at("hyperparameters").at("ridge").get<double>();
    return model;
}

}  // namespace mirspec
