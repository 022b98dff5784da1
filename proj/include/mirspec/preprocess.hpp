#pragma once

#include <span>
#include <vector>

#include "mirspec/types.hpp"

namespace mirspec {

// Closed wavenumber intervals [low, high] cm^-1 to remove from the axis.
struct BlankingSpec {
    std::vector<std::pair<double, double>> intervals;

    // CO2 band [2280, 2390] plus the two H2O bands [3500, 4000] and
    // [1300, 1900].
    static BlankingSpec defaults();
    void validate() const;
};

// A = 2 - log10(T%). Requires every value > 0; the error names the
// offending pixel/row and channel.
double absorbance_from_transmittance(double t_percent);
double transmittance_from_absorbance(double a);
SpectralCube to_absorbance(const SpectralCube& cube);
SpectraTable to_absorbance(const SpectraTable& table);

// Standard normal variate: subtract the mean, divide by the sample
// (N-1) standard deviation. Throws Error("degenerate-spectrum") when the
// deviation is <= 1e-12; callers drop such pixels.
std::vector<double> snv_normalize(std::span<const double> spectrum);
void snv_normalize_inplace(std::span<double> spectrum);

// Channel nu is removed iff low <= nu <= high for some interval (closed
// convention, union over intervals). Errors when nothing remains.
ChannelMask build_blanking_mask(const WavenumberAxis& axis,
                                const BlankingSpec& spec);

SpectraTable apply_channel_mask(const SpectraTable& table,
                                const ChannelMask& mask);

// Keeps exactly the pixels with |x| < half_width_um and |y| < half_height_um
// (strict), coordinates on the grid-center lattice.
PixelMask slice_rectangle(const SpectralCube& cube, double half_width_um,
                          double half_height_um);

}  // namespace mirspec
