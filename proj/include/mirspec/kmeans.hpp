#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

struct KMeansModel {
    int k = 0;
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    // Inertia after each assignment pass; Lloyd's algorithm makes this
    // non-increasing.
    std::vector<double> inertia_history;
};

struct KMeansResult {
    KMeansModel model;
    std::vector<int> assignment;
};

// Lloyd's algorithm with k-means++ seeding. Stops when the largest
// centroid movement drops below tol (Euclidean) or after max_iter passes.
// An emptied cluster is re-seeded at the point farthest from its nearest
// centroid. Deterministic for a fixed seed.
KMeansResult kmeans_fit(std::span<const float> data, std::size_t n,
                        std::size_t dim, int k, std::uint64_t seed,
                        int max_iter = 300, double tol = 1e-6);

// Two-cluster K-means over all pixel spectra of one absorbance cube; the
// cluster with the larger mean absorbance is tissue. Warns on stderr when
// the mask comes out near-empty or near-full.
PixelMask segment_tissue(const SpectralCube& cube, std::uint64_t seed);

// P5 binary PGM, 255 = keep.
void write_pgm(const PixelMask& mask, std::uint32_t width, std::uint32_t height,
               const std::string& path);
PixelMask read_pgm(const std::string& path, std::uint32_t& width,
                   std::uint32_t& height);

}  // namespace mirspec
