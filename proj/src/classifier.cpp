#include "mirspec/classifier.hpp"

#include "nlohmann/json.hpp"

#include "mirspec/forest.hpp"
#include "mirspec/lda.hpp"
#include "mirspec/mlp.hpp"

namespace mirspec {

const char* to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Lda: return "lda";
        case ClassifierKind::RandomForest: return "forest";
        case ClassifierKind::Mlp3: return "mlp3";
    }
    throw Error("bad-classifier", "unknown classifier kind");
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "lda") return ClassifierKind::Lda;
    if (s == "forest") return ClassifierKind::RandomForest;
    if (s == "mlp3") return ClassifierKind::Mlp3;
    throw Error("bad-classifier", "unknown classifier kind: '" + s + "'");
}

std::vector<double> Classifier::predict_score(std::span<const float> data,
                                              std::size_t n,
                                              std::size_t dim) const {
    if (data.size() != n * dim)
        throw Error("bad-input", "data length does not match n*dim");
    std::vector<double> out(n);
    predict_into(data.data(), n, dim, out.data());
    return out;
}

std::vector<double> Classifier::predict_score(const SpectraTable& table) const {
    table.validate();
    return predict_score(table.values, table.row_count(), table.channels());
}

std::vector<std::uint8_t> binary_labels(const SpectraTable& table) {
    std::vector<std::uint8_t> labels(table.row_count());
    bool any_pos = false, any_neg = false;
    for (std::size_t i = 0; i < table.row_count(); ++i) {
        const auto label = table.rows[i].label;
        if (label == TissueClass::Unlabeled)
            throw Error("unlabeled-row",
                        "row " + std::to_string(i) + " carries no class label");
        labels[i] = (label == TissueClass::CRC) ? 1 : 0;
        (labels[i] ? any_pos : any_neg) = true;
    }
    if (!any_pos || !any_neg)
        throw Error("single-class", "table contains only one tissue class");
    return labels;
}

std::unique_ptr<Classifier> fit(const ClassifierSpec& spec,
                                std::span<const float> x,
                                std::span<const std::uint8_t> y,
                                std::size_t dim, unsigned threads) {
    switch (spec.kind) {
        case ClassifierKind::Lda:
            return LdaClassifier::train(spec.lda, x, y, dim);
        case ClassifierKind::RandomForest:
            return ForestClassifier::train(spec.forest, x, y, dim, spec.seed,
                                           threads);
        case ClassifierKind::Mlp3:
            return MlpClassifier::train(spec.mlp, x, y, dim, spec.seed);
    }
    throw Error("bad-classifier", "unknown classifier kind");
}

std::unique_ptr<Classifier> fit(const ClassifierSpec& spec,
                                const SpectraTable& train, unsigned threads) {
    train.validate();
    const auto labels = binary_labels(train);
    return fit(spec, train.values, labels, train.channels(), threads);
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "mirspec-model")
        throw Error("bad-model", "not a mirspec model document");
    if (j.value("version", 0) != 1)
        throw Error("bad-model", "unsupported model version");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "lda") return LdaClassifier::from_json(j);
    if (kind == "forest") return ForestClassifier::from_json(j);
    if (kind == "mlp3") return MlpClassifier::from_json(j);
    throw Error("bad-model", "unknown model kind: '" + kind + "'");
}

}  // namespace mirspec
