#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

// rows = evaluation cases, columns = methods.
struct ScoreMatrix {
    std::vector<std::string> methods;
    std::size_t n_rows = 0;
    std::vector<double> values;  // row-major

    std::size_t n_methods() const { return methods.size(); }
    double at(std::size_t row, std::size_t col) const {
        return values[row * methods.size() + col];
    }
    std::vector<double> column(std::size_t col) const;
    void validate() const;

    // CSV with the method names as header.
    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
    static ScoreMatrix read_csv(std::istream& in);
    static ScoreMatrix read_csv(const std::string& path);
};

// Largest possible sum of rank differences between two permutations of n
// ranks: n^2/2 for even n, (n^2-1)/2 for odd n.
double max_srd(std::size_t n_rows);

struct SrdResult {
    std::vector<std::string> methods;
    std::vector<double> srd_raw;
    std::vector<double> srd_normalized;  // percent of max_srd
    std::vector<double> reference_ranks;
    // methods sharing an SRD value are indistinguishable; groups of >= 2
    std::vector<std::vector<std::size_t>> degeneracy_groups;
    std::size_t n_rows = 0;
};

// Reference column = per-row maximum (higher is better). Columns and the
// reference are rank-transformed down the rows with average ranks on ties;
// SRD_j = sum |rank_j - rank_ref|.
SrdResult srd_compute(const ScoreMatrix& m);

struct CrrnDistribution {
    enum class Mode : std::uint8_t { Exact = 0, MonteCarlo = 1 };
    std::vector<double> support;      // SRD values, ascending
    std::vector<double> probability;  // sums to 1
    Mode mode = Mode::Exact;
    std::size_t samples = 0;  // Monte Carlo only

    double mean() const;
};

// Null distribution of SRD between a random ranking and the identity
// reference. Exact enumerates all n! permutations (n <= 9); Monte Carlo
// samples uniformly random permutations.
CrrnDistribution crrn(std::size_t n_rows, CrrnDistribution::Mode mode,
                      std::size_t mc_samples = 100000, std::uint64_t seed = 0);

struct BoxStats {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    std::vector<double> outliers;  // beyond 1.5 * IQR
};

struct SrdCrossval {
    std::vector<std::string> methods;
    std::size_t folds = 0;
    // [method][fold] normalized SRD with that fold's rows removed
    std::vector<std::vector<double>> fold_srd;
    std::vector<BoxStats> box;
    // wins[i][j] = folds where method i ranked strictly better than j
    std::vector<std::vector<std::size_t>> wins;
};

SrdCrossval srd_crossval(const ScoreMatrix& m, std::size_t folds,
                         std::uint64_t seed);

BoxStats box_stats(std::span<const double> samples);

struct WilcoxonResult {
    enum class Mode : std::uint8_t { Exact = 0, NormalApprox = 1 };
    double statistic = 0.0;  // min(W+, W-)
    std::size_t n_effective = 0;
    double p_two_sided = 1.0;
    Mode mode = Mode::Exact;
};

// Paired signed-rank test: zero differences dropped, |d| ranked with
// average ranks. Exact p enumerates the 2^n sign assignments for
// n_effective <= 20; above that a tie-corrected normal approximation
// (no continuity correction) is used.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                    std::span<const double> y);

}  // namespace mirspec
