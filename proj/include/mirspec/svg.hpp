#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mirspec/srd.hpp"

namespace mirspec {

// Minimal deterministic SVG emitters for the report figures. Fixed-format
// floats keep repeated runs byte-identical.

// 2-D scatter, red = kept, blue = discarded.
void write_scatter_svg(const std::string& path,
                       std::span<const double> xs, std::span<const double> ys,
                       std::span<const std::uint8_t> kept,
                       const std::string& title);

void write_roc_svg(const std::string& path,
                   std::span<const std::pair<double, double>> curve,
                   double auc_value, const std::string& title);

// Method SRD% values as labeled points against the random-ranking curve.
void write_srd_svg(const std::string& path, const SrdResult& srd,
                   const CrrnDistribution& dist);

// One box per method from the k-fold SRD samples; outliers as markers.
void write_boxplot_svg(const std::string& path, const SrdCrossval& cv);

}  // namespace mirspec
