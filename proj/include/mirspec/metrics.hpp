#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

// labels: 1 = positive (CRC), 0 = negative (NC). predict = score >= threshold.
ConfusionMatrix confusion(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          double threshold = 0.5);

struct BasicMetrics {
    std::optional<double> accuracy;
    std::optional<double> sensitivity;  // TP / (TP + FN)
    std::optional<double> specificity;  // TN / (TN + FP)
};

// Metrics with zero denominators come back unset, never as 0.
BasicMetrics metrics(const ConfusionMatrix& cm);

// Mann-Whitney statistic: the fraction of (positive, negative) pairs with
// score_pos > score_neg, ties counting 1/2. Equals the trapezoidal area
// under the ROC curve. Requires both classes present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// (FPR, TPR) points at thresholds descending through the distinct scores;
// starts at (0,0) and ends at (1,1).
std::vector<std::pair<double, double>> roc_curve(
    std::span<const double> scores, std::span<const std::uint8_t> labels);

double trapezoid_area(std::span<const std::pair<double, double>> curve);

// Ascending ranks with average ranks on ties (shared by SRD, Wilcoxon
// and the rank-sum AUC).
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace mirspec
