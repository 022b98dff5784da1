#pragma once

#include <cstdint>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

struct GaussianPeak {
    double center_cm = 0.0;
    double width_cm = 1.0;
    double amplitude = 0.0;
};

// Deterministic generator of synthetic cores with known tissue/background
// ground truth. Tissue pixels carry the class peak model plus Gaussian
// noise in absorbance; background pixels sit near 100% transmittance.
// Cubes are emitted in transmittance mode (t = 100 * 10^-a).
struct SynthSpec {
    std::uint32_t width = 88;
    std::uint32_t height = 88;
    double pixel_size_um = 25.0;
    WavenumberAxis axis = WavenumberAxis::canonical();
    std::vector<GaussianPeak> nc_peaks = {{1650.0, 40.0, 0.8},
                                          {1080.0, 60.0, 0.5}};
    std::vector<GaussianPeak> crc_peaks = {{1650.0, 40.0, 0.8},
                                           {1080.0, 60.0, 0.9},
                                           {1550.0, 30.0, 0.4}};
    double disk_radius_um = 1000.0;
    struct Hole {
        double x_um = 0.0;
        double y_um = 0.0;
        double radius_um = 0.0;
    };
    std::vector<Hole> holes;
    double noise_std = 0.02;
    std::uint64_t seed = 0;

    void validate() const;

    // Canonical-scale default with one off-center background hole.
    static SynthSpec defaults();
    // Smaller grid / coarser axis for fast end-to-end runs; keeps the
    // slicing rectangle and tissue disk geometry nontrivial.
    static SynthSpec desk_scale();
};

struct SynthCube {
    SpectralCube cube;
    PixelMask ground_truth;  // keep = tissue
};

struct CohortEntry {
    std::string core_id;
    std::string patient_id;
    TissueClass tissue_class = TissueClass::Unlabeled;
    std::uint64_t stream = 0;  // per-core RNG stream index
};

SynthCube generate_cube(const SynthSpec& spec, TissueClass cls,
                        const CoreMetadata& meta);
SynthCube generate_entry(const SynthSpec& spec, const CohortEntry& entry);

// cores_per_patient == 0 reproduces the 62-core / 17-patient layout:
// 11 patients with 2 NC + 2 CRC cores, 4 with 2 NC + 1 CRC, 2 with
// 1 NC + 2 CRC (32 NC / 30 CRC overall). Any other value lays out
// n_patients x cores_per_patient with classes alternating NC first.
std::vector<CohortEntry> cohort_layout(int n_patients = 17,
                                       int cores_per_patient = 0);
std::vector<SynthCube> generate_cohort(const SynthSpec& spec,
                                       int n_patients = 17,
                                       int cores_per_patient = 0);

}  // namespace mirspec
