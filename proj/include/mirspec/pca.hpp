#pragma once

#include <span>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

struct PcaModel {
    std::vector<double> mean;                     // input dimension K'
    std::vector<std::vector<double>> components;  // d rows, each length K'
    std::vector<double> explained_variance;       // descending, length d
    double total_variance = 0.0;

    std::size_t input_dim() const { return mean.size(); }
    std::size_t n_components() const { return components.size(); }
};

// Top-d principal directions via SVD of the centered data (sample
// covariance, N-1 denominator). Deterministic: each component's sign is
// fixed so its largest-magnitude coordinate is positive (lowest index on
// magnitude ties). Requires N >= 2 and 1 <= d <= K'.
PcaModel pca_fit(std::span<const float> data, std::size_t n, std::size_t dim,
                 int d);
PcaModel pca_fit(const SpectraTable& table, int d);

// score = components * (x - mean)
std::vector<double> pca_transform_one(const PcaModel& model,
                                      std::span<const float> spectrum);
// N x d scores, row-major.
std::vector<double> pca_transform(const PcaModel& model,
                                  std::span<const float> data, std::size_t n,
                                  std::size_t dim);
std::vector<double> pca_transform(const PcaModel& model,
                                  const SpectraTable& table);

}  // namespace mirspec
