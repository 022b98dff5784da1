#include "mirspec/preprocess.hpp"

#include <cmath>

namespace mirspec {

BlankingSpec BlankingSpec::defaults() {
    return BlankingSpec{{{2280.0, 2390.0}, {3500.0, 4000.0}, {1300.0, 1900.0}}};
}

void BlankingSpec::validate() const {
    for (const auto& [low, high] : intervals) {
        if (!(low < high))
            throw Error("bad-blanking",
                        "interval low must be below high: [" +
                            std::to_string(low) + ", " + std::to_string(high) +
                            "]");
    }
}

double absorbance_from_transmittance(double t_percent) {
    if (!(t_percent > 0.0))
        throw Error("domain", "transmittance must be > 0");
    return 2.0 - std::log10(t_percent);
}

double transmittance_from_absorbance(double a) {
    return 100.0 * std::pow(10.0, -a);
}

SpectralCube to_absorbance(const SpectralCube& cube) {
    cube.axis.validate();
    cube.meta.validate();
    if (cube.data.size() != cube.pixel_count() * cube.channels())
        throw Error("bad-cube", "data length does not match width*height*K");
    if (cube.mode != SpectrumMode::TransmittancePercent)
        throw Error("bad-mode", "cube is not in transmittance mode");
    SpectralCube out = cube;
    const std::size_t k = cube.channels();
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double t = out.data[i];
        if (!(t > 0.0)) {
            const std::size_t pix = i / k;
            throw Error("domain",
                        "transmittance <= 0 at pixel (" +
                            std::to_string(pix / cube.width) + "," +
                            std::to_string(pix % cube.width) + ") channel " +
                            std::to_string(i % k));
        }
        out.data[i] = static_cast<float>(2.0 - std::log10(t));
    }
    out.mode = SpectrumMode::Absorbance;
    return out;
}

SpectraTable to_absorbance(const SpectraTable& table) {
    table.validate();
    if (table.mode != SpectrumMode::TransmittancePercent)
        throw Error("bad-mode", "table is not in transmittance mode");
    SpectraTable out = table;
    const std::size_t k = table.channels();
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double t = out.values[i];
        if (!(t > 0.0))
            throw Error("domain", "transmittance <= 0 at row " +
                                      std::to_string(i / k) + " channel " +
                                      std::to_string(i % k));
        out.values[i] = static_cast<float>(2.0 - std::log10(t));
    }
    out.mode = SpectrumMode::Absorbance;
    return out;
}

void snv_normalize_inplace(std::span<double> spectrum) {
    const std::size_t n = spectrum.size();
    if (n < 2)
        throw Error("degenerate-spectrum", "SNV needs at least 2 channels");
    double mean = 0.0;
    for (double v : spectrum) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : spectrum) {
        const double d = v - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 1e-12))
        throw Error("degenerate-spectrum",
                    "spectrum is constant (sample std <= 1e-12)");
    for (double& v : spectrum) v = (v - mean) / sd;
}

std::vector<double> snv_normalize(std::span<const double> spectrum) {
    std::vector<double> out(spectrum.begin(), spectrum.end());
    snv_normalize_inplace(out);
    return out;
}

ChannelMask build_blanking_mask(const WavenumberAxis& axis,
                                const BlankingSpec& spec) {
    axis.validate();
    spec.validate();
    ChannelMask mask;
    mask.keep.assign(axis.size(), 1);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double nu = axis.values[i];
        for (const auto& [low, high] : spec.intervals) {
            if (nu >= low && nu <= high) {
                mask.keep[i] = 0;
                break;
            }
        }
    }
    mask.removed_intervals = spec.intervals;
    if (mask.kept_count() == 0)
        throw Error("empty-mask", "blanking removed every channel");
    return mask;
}

SpectraTable apply_channel_mask(const SpectraTable& table,
                                const ChannelMask& mask) {
    table.validate();
    if (mask.keep.size() != table.channels())
        throw Error("length-mismatch",
                    "channel mask length " + std::to_string(mask.keep.size()) +
                        " does not match table axis " +
                        std::to_string(table.channels()));
    const std::size_t kept = mask.kept_count();
    if (kept == 0) throw Error("empty-mask", "channel mask keeps nothing");

    SpectraTable out;
    out.mode = table.mode;
    out.rows = table.rows;
    out.axis.values.reserve(kept);
    std::vector<std::size_t> idx;
    idx.reserve(kept);
    for (std::size_t c = 0; c < mask.keep.size(); ++c) {
        if (mask.keep[c]) {
            idx.push_back(c);
            out.axis.values.push_back(table.axis.values[c]);
        }
    }
    out.values.resize(out.rows.size() * kept);
    const std::size_t k = table.channels();
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const float* src = table.values.data() + r * k;
        float* dst = out.values.data() + r * kept;
        for (std::size_t c = 0; c < kept; ++c) dst[c] = src[idx[c]];
    }
    return out;
}

PixelMask slice_rectangle(const SpectralCube& cube, double half_width_um,
                          double half_height_um) {
    cube.validate();
    if (!(half_width_um > 0.0) || !(half_height_um > 0.0))
        throw Error("bad-extent", "half-extents must be positive");
    PixelMask mask;
    mask.source = PixelMask::Source::Slice;
    mask.keep.assign(cube.pixel_count(), 0);
    for (std::uint32_t r = 0; r < cube.height; ++r) {
        const double y = cube.pixel_y_um(r);
        for (std::uint32_t c = 0; c < cube.width; ++c) {
            const double x = cube.pixel_x_um(c);
            if (std::abs(x) < half_width_um && std::abs(y) < half_height_um)
                mask.keep[static_cast<std::size_t>(r) * cube.width + c] = 1;
        }
    }
    return mask;
}

}  // namespace mirspec
