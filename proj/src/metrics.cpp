#include "mirspec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mirspec {

ConfusionMatrix confusion(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          double threshold) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i]) {
            predicted ? ++cm.tp : ++cm.fn;
        } else {
            predicted ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

BasicMetrics metrics(const ConfusionMatrix& cm) {
    BasicMetrics m;
    if (cm.total() > 0)
        m.accuracy = static_cast<double>(cm.tp + cm.tn) /
                     static_cast<double>(cm.total());
    if (cm.tp + cm.fn > 0)
        m.sensitivity =
            static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tn + cm.fp > 0)
        m.specificity =
            static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    return m;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // block [i, j) ties: average of ranks i+1 .. j
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t b = i; b < j; ++b) ranks[order[b]] = avg;
        i = j;
    }
    return ranks;
}

namespace {

std::pair<std::size_t, std::size_t> class_counts(
    std::span<const std::uint8_t> labels) {
    std::size_t pos = 0;
    for (auto l : labels) pos += (l != 0);
    return {pos, labels.size() - pos};
}

}  // namespace

double auc(std::span<const double> scores,
           std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels differ in length");
    const auto [pos, neg] = class_counts(labels);
    if (pos == 0 || neg == 0)
        throw Error("single-class", "AUC needs both classes present");

    const auto ranks = average_ranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) rank_sum_pos += ranks[i];
    const double u = rank_sum_pos -
                     static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0;
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<std::pair<double, double>> roc_curve(
    std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw Error("length-mismatch", "scores and labels differ in length");
    const auto [pos, neg] = class_counts(labels);
    if (pos == 0 || neg == 0)
        throw Error("single-class", "ROC needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    std::vector<std::pair<double, double>> curve;
    curve.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        // one vertex per distinct threshold; ties advance together
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            labels[order[j]] ? ++tp : ++fp;
            ++j;
        }
        curve.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                           static_cast<double>(tp) / static_cast<double>(pos));
        i = j;
    }
    return curve;
}

double trapezoid_area(std::span<const std::pair<double, double>> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto& [x0, y0] = curve[i - 1];
        const auto& [x1, y1] = curve[i];
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    return area;
}

}  // namespace mirspec
