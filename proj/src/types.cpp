#include "mirspec/types.hpp"

#include <cmath>

namespace mirspec {

const char* to_string(TissueClass c) {
    switch (c) {
        case TissueClass::NC: return "NC";
        case TissueClass::CRC: return "CRC";
        case TissueClass::Unlabeled: return "UNLABELED";
    }
    throw Error("bad-class", "unknown tissue class value");
}

TissueClass tissue_class_from_string(const std::string& s) {
    if (s == "NC") return TissueClass::NC;
    if (s == "CRC") return TissueClass::CRC;
    if (s == "UNLABELED") return TissueClass::Unlabeled;
    throw Error("bad-class", "unknown tissue class label: '" + s + "'");
}

WavenumberAxis WavenumberAxis::canonical() {
    WavenumberAxis axis;
    axis.values.reserve(814);
    for (int i = 0; i < 814; ++i) axis.values.push_back(4000.0 - 4.0 * i);
    return axis;
}

WavenumberAxis WavenumberAxis::with_step(double step_cm) {
    if (!(step_cm > 0.0))
        throw Error("bad-axis", "axis step must be positive");
    WavenumberAxis axis;
    for (double v = 4000.0; v >= 748.0; v -= step_cm) axis.values.push_back(v);
    return axis;
}

void WavenumberAxis::validate() const {
    if (values.empty()) throw Error("bad-axis", "axis has no channels");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw Error("bad-axis", "axis values must be finite and positive");
        if (i > 0 && !(values[i] < values[i - 1]))
            throw Error("bad-axis", "axis must be strictly decreasing");
    }
}

void CoreMetadata::validate() const {
    if (core_id.empty()) throw Error("bad-meta", "core_id must be nonempty");
    if (!(pixel_size_um > 0.0))
        throw Error("bad-meta", "pixel_size must be positive");
}

std::span<const float> SpectralCube::spectrum(std::uint32_t row,
                                              std::uint32_t col) const {
    const std::size_t k = channels();
    return {data.data() + (static_cast<std::size_t>(row) * width + col) * k, k};
}

std::span<float> SpectralCube::spectrum(std::uint32_t row, std::uint32_t col) {
    const std::size_t k = channels();
    return {data.data() + (static_cast<std::size_t>(row) * width + col) * k, k};
}

double SpectralCube::pixel_x_um(std::uint32_t col) const {
    return (col - (width - 1) / 2.0) * meta.pixel_size_um;
}

double SpectralCube::pixel_y_um(std::uint32_t row) const {
    return (row - (height - 1) / 2.0) * meta.pixel_size_um;
}

void SpectralCube::validate() const {
    axis.validate();
    meta.validate();
    if (width == 0 || height == 0)
        throw Error("bad-cube", "cube dimensions must be positive");
    const std::size_t expected = pixel_count() * channels();
    if (data.size() != expected)
        throw Error("bad-cube", "data length " + std::to_string(data.size()) +
                                    " does not match width*height*K = " +
                                    std::to_string(expected));
    if (mode == SpectrumMode::TransmittancePercent) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!(data[i] > 0.0f)) {
                const std::size_t k = channels();
                const std::size_t pix = i / k;
                throw Error("bad-cube",
                            "transmittance must be > 0; offending pixel (" +
                                std::to_string(pix / width) + "," +
                                std::to_string(pix % width) + ") channel " +
                                std::to_string(i % k));
            }
        }
    }
}

std::size_t PixelMask::kept_count() const {
    std::size_t n = 0;
    for (auto v : keep) n += (v != 0);
    return n;
}

std::size_t ChannelMask::kept_count() const {
    std::size_t n = 0;
    for (auto v : keep) n += (v != 0);
    return n;
}

std::span<const float> SpectraTable::spectrum(std::size_t row) const {
    const std::size_t k = channels();
    return {values.data() + row * k, k};
}

std::span<float> SpectraTable::spectrum(std::size_t row) {
    const std::size_t k = channels();
    return {values.data() + row * k, k};
}

void SpectraTable::append_row(Row meta, std::span<const float> spectrum) {
    if (spectrum.size() != channels())
        throw Error("bad-table", "row spectrum length does not match axis");
    rows.push_back(std::move(meta));
    values.insert(values.end(), spectrum.begin(), spectrum.end());
}

void SpectraTable::validate() const {
    axis.validate();
    if (values.size() != rows.size() * channels())
        throw Error("bad-table", "value matrix does not match rows*channels");
}

}  // namespace mirspec
