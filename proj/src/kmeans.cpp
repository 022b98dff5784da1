#include "mirspec/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>

#include "mirspec/rng.hpp"

namespace mirspec {

namespace {

double sq_dist(const float* x, const std::vector<double>& c, std::size_t dim) {
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double diff = x[i] - c[i];
        d += diff * diff;
    }
    return d;
}

// k-means++: first centroid uniform over points, each further centroid
// drawn with probability proportional to the squared distance to the
// nearest centroid chosen so far.
std::vector<std::vector<double>> kmeanspp_init(std::span<const float> data,
                                               std::size_t n, std::size_t dim,
                                               int k, std::mt19937_64& engine) {
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
    const std::size_t first = uniform(engine);
    centroids.emplace_back(data.begin() + first * dim,
                           data.begin() + (first + 1) * dim);

    std::vector<double> d2(n);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids)
                best = std::min(best, sq_dist(data.data() + i * dim, c, dim));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(engine);
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            // all remaining points coincide with a centroid
            pick = uniform(engine);
        }
        centroids.emplace_back(data.begin() + pick * dim,
                               data.begin() + (pick + 1) * dim);
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans_fit(std::span<const float> data, std::size_t n,
                        std::size_t dim, int k, std::uint64_t seed,
                        int max_iter, double tol) {
    if (k < 1) throw Error("bad-kmeans", "k must be >= 1");
    if (dim < 1) throw Error("bad-kmeans", "dimension must be >= 1");
    if (n < static_cast<std::size_t>(k))
        throw Error("bad-kmeans", "need at least k points, got " +
                                      std::to_string(n));
    if (data.size() != n * dim)
        throw Error("bad-kmeans", "data length does not match n*dim");

    auto engine = make_engine(seed);
    auto centroids = kmeanspp_init(data, n, dim, k, engine);

    KMeansResult result;
    result.model.k = k;
    result.model.seed = seed;
    result.assignment.assign(n, 0);

    std::vector<double> min_d2(n);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim));
    std::vector<std::size_t> counts(k);

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // assignment pass (ties to the lowest cluster index)
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(data.data() + i * dim, centroids[0], dim);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(data.data() + i * dim, centroids[c], dim);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            result.assignment[i] = best;
            min_d2[i] = best_d;
            inertia += best_d;
        }
        result.model.inertia_history.push_back(inertia);
        result.model.inertia = inertia;

        // update pass
        for (int c = 0; c < k; ++c) {
            std::fill(sums[c].begin(), sums[c].end(), 0.0);
            counts[c] = 0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const int c = result.assignment[i];
            ++counts[c];
            const float* x = data.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) sums[c][j] += x[j];
        }

        double max_move2 = 0.0;
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed at the point farthest from its nearest centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (min_d2[i] > far_d) {
                        far_d = min_d2[i];
                        far = i;
                    }
                }
                if (far_d <= 0.0) continue;  // all points coincide; keep as-is
                const float* x = data.data() + far * dim;
                double move2 = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    const double diff = x[j] - centroids[c][j];
                    move2 += diff * diff;
                    centroids[c][j] = x[j];
                }
                max_move2 = std::max(max_move2, move2);
                min_d2[far] = 0.0;  // avoid re-picking the same point
                continue;
            }
            double move2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double next = sums[c][j] / static_cast<double>(counts[c]);
                const double diff = next - centroids[c][j];
                move2 += diff * diff;
                centroids[c][j] = next;
            }
            max_move2 = std::max(max_move2, move2);
        }

        if (std::sqrt(max_move2) < tol) {
            ++iter;
            break;
        }
    }

    // final assignment against the converged centroids
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = sq_dist(data.data() + i * dim, centroids[0], dim);
        for (int c = 1; c < k; ++c) {
            const double d = sq_dist(data.data() + i * dim, centroids[c], dim);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        result.assignment[i] = best;
        inertia += best_d;
    }
    result.model.inertia_history.push_back(inertia);
    result.model.inertia = inertia;
    result.model.iterations = iter;
    result.model.centroids = std::move(centroids);
    return result;
}

PixelMask segment_tissue(const SpectralCube& cube, std::uint64_t seed) {
    cube.validate();
    if (cube.mode != SpectrumMode::Absorbance)
        throw Error("bad-mode", "segment_tissue expects an absorbance cube");

    const std::size_t n = cube.pixel_count();
    const std::size_t k = cube.channels();

    // degenerate cube: every spectrum equal
    bool all_equal = true;
    for (std::size_t i = 1; i < n && all_equal; ++i) {
        if (std::memcmp(cube.data.data(), cube.data.data() + i * k,
                        k * sizeof(float)) != 0)
            all_equal = false;
    }
    if (all_equal)
        throw Error("degenerate-cube", "all spectra are identical");

    auto result = kmeans_fit(cube.data, n, k, 2, seed);

    // tissue = the centroid with the larger mean absorbance
    double mean0 = 0.0, mean1 = 0.0;
    for (double v : result.model.centroids[0]) mean0 += v;
    for (double v : result.model.centroids[1]) mean1 += v;
    const int tissue = (mean0 / k >= mean1 / k) ? 0 : 1;

    PixelMask mask;
    mask.source = PixelMask::Source::KMeans;
    mask.keep.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        mask.keep[i] = (result.assignment[i] == tissue) ? 1 : 0;

    const std::size_t kept = mask.kept_count();
    if (kept < n / 100 || kept > n - n / 100) {
        std::cerr << "[mirspec] warning: tissue mask for core '"
                  << cube.meta.core_id << "' keeps " << kept << " of " << n
                  << " pixels\n";
    }
    return mask;
}

void write_pgm(const PixelMask& mask, std::uint32_t width, std::uint32_t height,
               const std::string& path) {
    if (mask.keep.size() != static_cast<std::size_t>(width) * height)
        throw Error("length-mismatch", "mask does not match width*height");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> bytes(mask.keep.size());
    for (std::size_t i = 0; i < mask.keep.size(); ++i)
        bytes[i] = mask.keep[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "failed to write PGM: " + path);
}

PixelMask read_pgm(const std::string& path, std::uint32_t& width,
                   std::uint32_t& height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw Error("bad-magic", "not a binary PGM: " + path);
    long w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw Error("bad-pgm", "unsupported PGM header in " + path);
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!in) throw Error("length-mismatch", "truncated PGM: " + path);
    width = static_cast<std::uint32_t>(w);
    height = static_cast<std::uint32_t>(h);
    PixelMask mask;
    mask.keep.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        mask.keep[i] = bytes[i] >= 128 ? 1 : 0;
    return mask;
}

}  // namespace mirspec
