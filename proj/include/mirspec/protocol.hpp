#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json_fwd.hpp"

#include "mirspec/classifier.hpp"
#include "mirspec/dataset.hpp"
#include "mirspec/metrics.hpp"
#include "mirspec/srd.hpp"

namespace mirspec {

// Pluggable method entry so test doubles (e.g. a constant-score dummy) can
// run through the same protocol as the real classifiers.
struct MethodSpec {
    std::string name;
    std::function<std::unique_ptr<Classifier>(const SpectraTable& train,
                                              std::uint64_t seed)>
        make;
};

MethodSpec method_from_spec(const std::string& name, ClassifierSpec spec);

struct RepeatOutcome {
    std::optional<double> accuracy, auc, sensitivity, specificity;
    ConfusionMatrix cm;
    std::string failure;  // empty on success
};

struct MethodReport {
    std::string name;
    std::vector<RepeatOutcome> per_repeat;
    // scores/labels of the first repeat, kept for ROC plots
    std::vector<double> first_scores;
    std::vector<std::uint8_t> first_labels;
};

struct Summary {
    std::optional<double> mean, stddev;  // sample (N-1) std over repeats
};

struct EvalReport {
    int repeats = 0;
    std::vector<MethodReport> methods;

    Summary summary(std::size_t method,
                    std::optional<double> RepeatOutcome::*metric) const;
};

struct ProtocolResult {
    EvalReport report;
    ScoreMatrix acc_matrix;  // rows = repeats, columns = methods
};

// For each repeat and method: fit on the train rows, score the test rows,
// threshold at 0.5 and aggregate. A fit failure is recorded on that
// method's repeat, never silently scored; methods with any failure are
// excluded from the ACC matrix.
ProtocolResult run_protocol(const SpectraTable& table, const SplitResult& splits,
                            const std::vector<MethodSpec>& methods,
                            std::uint64_t seed, unsigned threads = 1);

nlohmann::ordered_json report_to_json(const EvalReport& report);
// CSV mirroring the evaluation-table layout:
// Methods, ACC, AUC, Sensitivity, Specificity as "mean +- std"
std::string report_to_csv(const EvalReport& report);

}  // namespace mirspec
