#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mirspec {

// Error with a short machine-readable code; the CLI maps these onto its
// JSON error envelope.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

enum class TissueClass : std::uint8_t { NC = 0, CRC = 1, Unlabeled = 255 };

const char* to_string(TissueClass c);
TissueClass tissue_class_from_string(const std::string& s);

enum class SpectrumMode : std::uint8_t { TransmittancePercent = 0, Absorbance = 1 };

// Wavenumber axis in cm^-1, stored exactly as acquired: strictly decreasing.
struct WavenumberAxis {
    std::vector<double> values;

    // 4000, 3996, ..., 748 cm^-1: step 4, 814 channels.
    static WavenumberAxis canonical();
    // 4000 down in `step_cm` decrements while >= 748. step must be positive.
    static WavenumberAxis with_step(double step_cm);

    std::size_t size() const noexcept { return values.size(); }
    void validate() const;
    bool operator==(const WavenumberAxis&) const = default;
};

struct CoreMetadata {
    std::string core_id;
    std::string patient_id;
    TissueClass tissue_class = TissueClass::Unlabeled;
    double pixel_size_um = 25.0;

    void validate() const;
    bool operator==(const CoreMetadata&) const = default;
};

// One measured core: a width x height grid of spectra on a shared axis.
// Data is row-major [row][col][channel]; values are float32, the axis float64.
struct SpectralCube {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    WavenumberAxis axis;
    SpectrumMode mode = SpectrumMode::TransmittancePercent;
    CoreMetadata meta;
    std::vector<float> data;

    std::size_t channels() const noexcept { return axis.size(); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * height;
    }
    std::span<const float> spectrum(std::uint32_t row, std::uint32_t col) const;
    std::span<float> spectrum(std::uint32_t row, std::uint32_t col);

    // Pixel-center coordinates with the origin at the grid center.
    double pixel_x_um(std::uint32_t col) const;
    double pixel_y_um(std::uint32_t row) const;

    void validate() const;
    bool operator==(const SpectralCube&) const = default;
};

// Boolean selection over the pixels of one cube.
struct PixelMask {
    enum class Source : std::uint8_t { Slice = 0, KMeans = 1 };
    std::vector<std::uint8_t> keep;
    Source source = Source::Slice;

    std::size_t kept_count() const;
};

// Boolean selection over the channels of an axis, with the removed
// wavenumber intervals kept as provenance.
struct ChannelMask {
    std::vector<std::uint8_t> keep;
    std::vector<std::pair<double, double>> removed_intervals;

    std::size_t kept_count() const;
};

// Flat labeled table of spectra: the input to everything downstream of
// segmentation. Values are float32 row-major [row][channel]; `mode` is
// in-memory bookkeeping only and is not serialized by the CSV path.
struct SpectraTable {
    struct Row {
        double x_um = 0.0;
        double y_um = 0.0;
        std::string core_id;
        std::string patient_id;
        TissueClass label = TissueClass::Unlabeled;
        bool operator==(const Row&) const = default;
    };

    WavenumberAxis axis;
    SpectrumMode mode = SpectrumMode::Absorbance;
    std::vector<Row> rows;
    std::vector<float> values;

    std::size_t row_count() const noexcept { return rows.size(); }
    std::size_t channels() const noexcept { return axis.size(); }
    std::span<const float> spectrum(std::size_t row) const;
    std::span<float> spectrum(std::size_t row);
    void append_row(Row meta, std::span<const float> spectrum);

    void validate() const;
};

}  // namespace mirspec
