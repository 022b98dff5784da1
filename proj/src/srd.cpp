#include "mirspec/srd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "mirspec/metrics.hpp"
#include "mirspec/rng.hpp"

namespace mirspec {

std::vector<double> ScoreMatrix::column(std::size_t col) const {
    std::vector<double> v(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) v[r] = at(r, col);
    return v;
}

void ScoreMatrix::validate() const {
    if (methods.size() < 2)
        throw Error("bad-matrix", "need at least 2 method columns");
    if (n_rows < 2) throw Error("bad-matrix", "need at least 2 case rows");
    if (values.size() != n_rows * methods.size())
        throw Error("bad-matrix", "value count does not match rows*methods");
    for (double v : values)
        if (!std::isfinite(v))
            throw Error("bad-matrix", "score matrix contains non-finite values");
}

void ScoreMatrix::write_csv(std::ostream& out) const {
    validate();
    for (std::size_t c = 0; c < methods.size(); ++c) {
        if (c) out << ',';
        out << methods[c];
    }
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::string line;
        for (std::size_t c = 0; c < methods.size(); ++c) {
            if (c) line += ',';
            const int n = std::snprintf(buf, sizeof buf, "%.12g", at(r, c));
            line.append(buf, static_cast<std::size_t>(n));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw Error("io", "failed to write score matrix");
}

void ScoreMatrix::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    write_csv(out);
}

ScoreMatrix ScoreMatrix::read_csv(std::istream& in) {
    ScoreMatrix m;
    std::string line;
    if (!std::getline(in, line))
        throw Error("bad-matrix", "empty score matrix stream");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) m.methods.push_back(field);

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t start = 0, count = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            const std::string cell =
                line.substr(start, pos == std::string::npos ? pos : pos - start);
            double v = 0.0;
            const auto res =
                std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                throw Error("bad-number",
                            "unparsable score '" + cell + "' in row " +
                                std::to_string(m.n_rows + 1));
            m.values.push_back(v);
            ++count;
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (count != m.methods.size())
            throw Error("ragged-row", "score row " + std::to_string(m.n_rows + 1) +
                                          " has " + std::to_string(count) +
                                          " cells, expected " +
                                          std::to_string(m.methods.size()));
        ++m.n_rows;
    }
    m.validate();
    return m;
}

ScoreMatrix ScoreMatrix::read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    return read_csv(in);
}

double max_srd(std::size_t n_rows) {
    const double n = static_cast<double>(n_rows);
    return (n_rows % 2 == 0) ? n * n / 2.0 : (n * n - 1.0) / 2.0;
}

SrdResult srd_compute(const ScoreMatrix& m) {
    m.validate();

    std::vector<double> reference(m.n_rows);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double best = m.at(r, 0);
        for (std::size_t c = 1; c < m.n_methods(); ++c)
            best = std::max(best, m.at(r, c));
        reference[r] = best;
    }

    SrdResult result;
    result.methods = m.methods;
    result.n_rows = m.n_rows;
    result.reference_ranks = average_ranks(reference);

    const double denom = max_srd(m.n_rows);
    result.srd_raw.resize(m.n_methods());
    result.srd_normalized.resize(m.n_methods());
    for (std::size_t c = 0; c < m.n_methods(); ++c) {
        const auto ranks = average_ranks(m.column(c));
        double srd = 0.0;
        for (std::size_t r = 0; r < m.n_rows; ++r)
            srd += std::abs(ranks[r] - result.reference_ranks[r]);
        result.srd_raw[c] = srd;
        result.srd_normalized[c] = 100.0 * srd / denom;
    }

    // degeneracy: methods with exactly equal SRD (rank sums are multiples
    // of 1/2, so equality is exact)
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t c = 0; c < m.n_methods(); ++c)
        groups[result.srd_raw[c]].push_back(c);
    for (auto& [srd, cols] : groups)
        if (cols.size() >= 2) result.degeneracy_groups.push_back(cols);
    return result;
}

double CrrnDistribution::mean() const {
    double mu = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i)
        mu += support[i] * probability[i];
    return mu;
}

CrrnDistribution crrn(std::size_t n_rows, CrrnDistribution::Mode mode,
                      std::size_t mc_samples, std::uint64_t seed) {
    if (n_rows < 2) throw Error("bad-crrn", "need at least 2 rows");

    // SRD against the identity is always even, bounded by max_srd
    const auto max_value = static_cast<std::size_t>(max_srd(n_rows));
    std::vector<double> counts(max_value + 1, 0.0);

    CrrnDistribution dist;
    dist.mode = mode;

    if (mode == CrrnDistribution::Mode::Exact) {
        if (n_rows > 9)
            throw Error("bad-crrn",
                        "exact CRRN enumerates n! permutations; use Monte "
                        "Carlo above n = 9");
        std::vector<int> perm(n_rows);
        std::iota(perm.begin(), perm.end(), 1);
        double total = 0.0;
        do {
            std::size_t srd = 0;
            for (std::size_t i = 0; i < n_rows; ++i)
                srd += static_cast<std::size_t>(
                    std::abs(perm[i] - static_cast<int>(i + 1)));
            counts[srd] += 1.0;
            total += 1.0;
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (double& c : counts) c /= total;
    } else {
        if (mc_samples == 0) throw Error("bad-crrn", "need at least 1 sample");
        std::vector<int> perm(n_rows);
        std::iota(perm.begin(), perm.end(), 1);
        auto engine = make_engine(derive_seed(seed, 0xc88));
        for (std::size_t s = 0; s < mc_samples; ++s) {
            std::shuffle(perm.begin(), perm.end(), engine);
            std::size_t srd = 0;
            for (std::size_t i = 0; i < n_rows; ++i)
                srd += static_cast<std::size_t>(
                    std::abs(perm[i] - static_cast<int>(i + 1)));
            counts[srd] += 1.0;
        }
        for (double& c : counts) c /= static_cast<double>(mc_samples);
        dist.samples = mc_samples;
    }

    for (std::size_t v = 0; v <= max_value; ++v) {
        if (counts[v] > 0.0) {
            dist.support.push_back(static_cast<double>(v));
            dist.probability.push_back(counts[v]);
        }
    }
    return dist;
}

BoxStats box_stats(std::span<const double> samples) {
    if (samples.empty()) throw Error("bad-input", "no samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());

    // linear interpolation between order statistics
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(s.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return s[lo] * (1.0 - frac) + s[hi] * frac;
    };

    BoxStats box;
    box.min = s.front();
    box.max = s.back();
    box.q1 = quantile(0.25);
    box.median = quantile(0.5);
    box.q3 = quantile(0.75);
    const double iqr = box.q3 - box.q1;
    const double lo_fence = box.q1 - 1.5 * iqr;
    const double hi_fence = box.q3 + 1.5 * iqr;
    for (double v : s)
        if (v < lo_fence || v > hi_fence) box.outliers.push_back(v);
    return box;
}

SrdCrossval srd_crossval(const ScoreMatrix& m, std::size_t folds,
                         std::uint64_t seed) {
    m.validate();
    if (folds < 2) throw Error("bad-folds", "need at least 2 folds");
    if (m.n_rows < folds)
        throw Error("bad-folds", "fewer rows than folds");
    if (m.n_rows - (m.n_rows + folds - 1) / folds < 2)
        throw Error("bad-folds", "a fold removal would leave fewer than 2 rows");

    std::vector<std::size_t> order(m.n_rows);
    std::iota(order.begin(), order.end(), 0);
    auto engine = make_engine(derive_seed(seed, 0xf01d5));
    std::shuffle(order.begin(), order.end(), engine);

    SrdCrossval cv;
    cv.methods = m.methods;
    cv.folds = folds;
    cv.fold_srd.assign(m.n_methods(), std::vector<double>(folds, 0.0));

    std::size_t start = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = m.n_rows / folds + (f < m.n_rows % folds ? 1 : 0);
        std::vector<bool> removed(m.n_rows, false);
        for (std::size_t i = start; i < start + size; ++i)
            removed[order[i]] = true;
        start += size;

        ScoreMatrix sub;
        sub.methods = m.methods;
        for (std::size_t r = 0; r < m.n_rows; ++r) {
            if (removed[r]) continue;
            for (std::size_t c = 0; c < m.n_methods(); ++c)
                sub.values.push_back(m.at(r, c));
            ++sub.n_rows;
        }
        const auto srd = srd_compute(sub);
        for (std::size_t c = 0; c < m.n_methods(); ++c)
            cv.fold_srd[c][f] = srd.srd_normalized[c];
    }

    cv.box.reserve(m.n_methods());
    for (std::size_t c = 0; c < m.n_methods(); ++c)
        cv.box.push_back(box_stats(cv.fold_srd[c]));

    cv.wins.assign(m.n_methods(),
                   std::vector<std::size_t>(m.n_methods(), 0));
    for (std::size_t i = 0; i < m.n_methods(); ++i)
        for (std::size_t j = 0; j < m.n_methods(); ++j)
            for (std::size_t f = 0; f < folds; ++f)
                if (i != j && cv.fold_srd[i][f] < cv.fold_srd[j][f])
                    ++cv.wins[i][j];
    return cv;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                    std::span<const double> y) {
    if (x.size() != y.size())
        throw Error("length-mismatch", "paired samples differ in length");
    if (x.size() < 2) throw Error("bad-input", "need at least 2 pairs");

    std::vector<double> abs_diff;
    std::vector<int> sign;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d == 0.0) continue;  // zeros dropped
        abs_diff.push_back(std::abs(d));
        sign.push_back(d > 0.0 ? 1 : -1);
    }
    const std::size_t n = abs_diff.size();
    if (n == 0)
        throw Error("all-zero", "every paired difference is zero");

    const auto ranks = average_ranks(abs_diff);
    double w_pos = 0.0, w_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        (sign[i] > 0 ? w_pos : w_neg) += ranks[i];

    WilcoxonResult result;
    result.n_effective = n;
    result.statistic = std::min(w_pos, w_neg);

    if (n <= 20) {
        result.mode = WilcoxonResult::Mode::Exact;
        // doubled ranks are exact integers even with ties
        std::vector<std::size_t> r2(n);
        std::size_t total2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r2[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            total2 += r2[i];
        }
        // count the sign assignments by rank-sum (equivalent to walking
        // all 2^n sign vectors)
        std::vector<double> count(total2 + 1, 0.0);
        count[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t s = total2 - r2[i] + 1; s-- > 0;)
                count[s + r2[i]] += count[s];

        const auto w2 = static_cast<std::size_t>(
            std::llround(2.0 * result.statistic));
        double below = 0.0, total = 0.0;
        for (std::size_t s = 0; s <= total2; ++s) {
            if (s <= w2) below += count[s];
            total += count[s];
        }
        result.p_two_sided = std::min(1.0, 2.0 * below / total);
    } else {
        result.mode = WilcoxonResult::Mode::NormalApprox;
        const double dn = static_cast<double>(n);
        const double mean = dn * (dn + 1.0) / 4.0;
        // tie correction: sum over tie groups of (t^3 - t)
        std::vector<double> sorted(abs_diff.begin(), abs_diff.end());
        std::sort(sorted.begin(), sorted.end());
        double tie_sum = 0.0;
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i + 1;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_sum += t * t * t - t;
            i = j;
        }
        const double var =
            dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_sum / 48.0;
        if (!(var > 0.0))
            throw Error("degenerate", "zero variance in the normal approximation");
        const double z = (result.statistic - mean) / std::sqrt(var);
        result.p_two_sided = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
    }
    return result;
}

}  // namespace mirspec
