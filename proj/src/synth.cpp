#include "mirspec/synth.hpp"

#include <cmath>
#include <random>

#include "mirspec/preprocess.hpp"
#include "mirspec/rng.hpp"

namespace mirspec {

void SynthSpec::validate() const {
    axis.validate();
    if (width == 0 || height == 0)
        throw Error("bad-synth", "grid dimensions must be positive");
    if (!(pixel_size_um > 0.0))
        throw Error("bad-synth", "pixel size must be positive");
    if (!(disk_radius_um > 0.0))
        throw Error("bad-synth", "disk radius must be positive");
    if (noise_std < 0.0)
        throw Error("bad-synth", "noise std must be >= 0");
    const double lo = axis.values.back();
    const double hi = axis.values.front();
    for (const auto* peaks : {&nc_peaks, &crc_peaks}) {
        for (const auto& p : *peaks) {
            if (p.center_cm < lo || p.center_cm > hi)
                throw Error("bad-synth",
                            "peak center " + std::to_string(p.center_cm) +
                                " outside axis range");
            if (!(p.width_cm > 0.0))
                throw Error("bad-synth", "peak width must be positive");
        }
    }
    for (const auto& h : holes)
        if (!(h.radius_um > 0.0))
            throw Error("bad-synth", "hole radius must be positive");
}

SynthSpec SynthSpec::defaults() {
    SynthSpec spec;
    spec.holes = {{300.0, -200.0, 150.0}};
    return spec;
}

SynthSpec SynthSpec::desk_scale() {
    SynthSpec spec;
    spec.width = 22;
    spec.height = 22;
    spec.pixel_size_um = 100.0;
    spec.axis = WavenumberAxis::with_step(12.0);
    spec.holes = {{300.0, -200.0, 200.0}};
    return spec;
}

namespace {

std::vector<double> peak_template(const WavenumberAxis& axis,
                                  const std::vector<GaussianPeak>& peaks) {
    std::vector<double> a(axis.size(), 0.0);
    for (const auto& p : peaks) {
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const double z = (axis.values[i] - p.center_cm) / p.width_cm;
            a[i] += p.amplitude * std::exp(-0.5 * z * z);
        }
    }
    return a;
}

}  // namespace

SynthCube generate_cube(const SynthSpec& spec, TissueClass cls,
                        const CoreMetadata& meta) {
    spec.validate();
    if (cls == TissueClass::Unlabeled)
        throw Error("bad-synth", "synthetic cores must carry a class label");

    const auto& peaks =
        (cls == TissueClass::NC) ? spec.nc_peaks : spec.crc_peaks;
    const std::vector<double> tissue = peak_template(spec.axis, peaks);
    const std::size_t k = spec.axis.size();

    SynthCube out;
    out.cube.width = spec.width;
    out.cube.height = spec.height;
    out.cube.axis = spec.axis;
    out.cube.mode = SpectrumMode::TransmittancePercent;
    out.cube.meta = meta;
    out.cube.meta.tissue_class = cls;
    out.cube.meta.pixel_size_um = spec.pixel_size_um;
    out.cube.data.resize(out.cube.pixel_count() * k);
    out.ground_truth.source = PixelMask::Source::KMeans;
    out.ground_truth.keep.assign(out.cube.pixel_count(), 0);

    auto engine = make_engine(derive_seed(spec.seed, splitmix64(cls == TissueClass::NC ? 1 : 2)));
    std::normal_distribution<double> noise(0.0, 1.0);
    const double r2 = spec.disk_radius_um * spec.disk_radius_um;

    for (std::uint32_t r = 0; r < spec.height; ++r) {
        const double y = out.cube.pixel_y_um(r);
        for (std::uint32_t c = 0; c < spec.width; ++c) {
            const double x = out.cube.pixel_x_um(c);
            bool is_tissue = (x * x + y * y <= r2);
            if (is_tissue) {
                for (const auto& h : spec.holes) {
                    const double dx = x - h.x_um;
                    const double dy = y - h.y_um;
                    if (dx * dx + dy * dy <= h.radius_um * h.radius_um) {
                        is_tissue = false;
                        break;
                    }
                }
            }
            const std::size_t pix = static_cast<std::size_t>(r) * spec.width + c;
            out.ground_truth.keep[pix] = is_tissue ? 1 : 0;
            float* dst = out.cube.data.data() + pix * k;
            for (std::size_t i = 0; i < k; ++i) {
                const double base = is_tissue ? tissue[i] : 0.0;
                const double a =
                    base + (spec.noise_std > 0.0 ? spec.noise_std * noise(engine)
                                                 : 0.0);
                dst[i] = static_cast<float>(transmittance_from_absorbance(a));
            }
        }
    }
    out.cube.validate();
    return out;
}

SynthCube generate_entry(const SynthSpec& spec, const CohortEntry& entry) {
    SynthSpec per_core = spec;
    per_core.seed = derive_seed(spec.seed, entry.stream);
    CoreMetadata meta;
    meta.core_id = entry.core_id;
    meta.patient_id = entry.patient_id;
    meta.pixel_size_um = spec.pixel_size_um;
    return generate_cube(per_core, entry.tissue_class, meta);
}

std::vector<CohortEntry> cohort_layout(int n_patients, int cores_per_patient) {
    if (n_patients < 1)
        throw Error("bad-synth", "need at least one patient");
    std::vector<CohortEntry> entries;
    auto add_patient = [&entries](int patient, const std::vector<TissueClass>& classes) {
        char pid[16];
        std::snprintf(pid, sizeof pid, "P%02d", patient);
        int core = 0;
        for (TissueClass cls : classes) {
            ++core;
            char cid[24];
            std::snprintf(cid, sizeof cid, "%sC%d", pid, core);
            entries.push_back({cid, pid, cls, entries.size()});
        }
    };

    using TC = TissueClass;
    if (cores_per_patient == 0) {
        if (n_patients != 17)
            throw Error("bad-synth",
                        "the default cohort layout is defined for 17 patients");
        int patient = 0;
        for (int i = 0; i < 11; ++i)
            add_patient(++patient, {TC::NC, TC::NC, TC::CRC, TC::CRC});
        for (int i = 0; i < 4; ++i)
            add_patient(++patient, {TC::NC, TC::NC, TC::CRC});
        for (int i = 0; i < 2; ++i)
            add_patient(++patient, {TC::NC, TC::CRC, TC::CRC});
        return entries;
    }

    if (cores_per_patient < 1)
        throw Error("bad-synth", "cores_per_patient must be >= 1 (or 0 for the default layout)");
    for (int p = 1; p <= n_patients; ++p) {
        std::vector<TissueClass> classes;
        for (int c = 0; c < cores_per_patient; ++c)
            classes.push_back(c % 2 == 0 ? TC::NC : TC::CRC);
        add_patient(p, classes);
    }
    return entries;
}

std::vector<SynthCube> generate_cohort(const SynthSpec& spec, int n_patients,
                                       int cores_per_patient) {
    const auto layout = cohort_layout(n_patients, cores_per_patient);
    std::vector<SynthCube> cubes;
    cubes.reserve(layout.size());
    for (const auto& entry : layout) cubes.push_back(generate_entry(spec, entry));
    return cubes;
}

}  // namespace mirspec
