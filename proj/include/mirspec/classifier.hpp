#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json_fwd.hpp"

#include "mirspec/types.hpp"

namespace mirspec {

enum class ClassifierKind : std::uint8_t { Lda = 0, RandomForest = 1, Mlp3 = 2 };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& s);

struct LdaParams {
    // ridge added to the pooled covariance: ridge_scale * trace(S) / K
    double ridge_scale = 1e-6;
};

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unbounded
    int mtry = 0;       // features tried per node; 0 = floor(sqrt(K))
};

struct MlpParams {
    std::vector<int> hidden = {64, 32};
    int epochs = 20;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Lda;
    LdaParams lda;
    ForestParams forest;
    MlpParams mlp;
    std::uint64_t seed = 0;
};

// Binary classifier over spectra with CRC as the positive class. Scores
// are probabilities in [0, 1]; the hard decision is score >= 0.5. Trained
// models are immutable and safe to share across threads.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual ClassifierKind kind() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual void predict_into(const float* x, std::size_t n, std::size_t dim,
                              double* out) const = 0;
    virtual nlohmann::ordered_json to_json() const = 0;

    std::vector<double> predict_score(std::span<const float> data,
                                      std::size_t n, std::size_t dim) const;
    std::vector<double> predict_score(const SpectraTable& table) const;
};

// 0/1 labels from the table rows (CRC = 1). Throws Error("unlabeled-row")
// on UNLABELED rows and Error("single-class") if only one class appears.
std::vector<std::uint8_t> binary_labels(const SpectraTable& table);

std::unique_ptr<Classifier> fit(const ClassifierSpec& spec,
                                std::span<const float> x,
                                std::span<const std::uint8_t> y,
                                std::size_t dim, unsigned threads = 1);
std::unique_ptr<Classifier> fit(const ClassifierSpec& spec,
                                const SpectraTable& train,
                                unsigned threads = 1);

// Versioned JSON round-trip for trained models.
std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

}  // namespace mirspec
