#include "mirspec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "nlohmann/json.hpp"

#include "mirspec/preprocess.hpp"
#include "mirspec/rng.hpp"

namespace mirspec {

SpectraTable assemble(std::span<const SpectralCube> cubes,
                      std::span<const PixelMask> masks,
                      const PreprocessChain& chain, AssembleStats* stats) {
    if (cubes.size() != masks.size())
        throw Error("length-mismatch", "need exactly one mask per cube");
    if (cubes.empty()) throw Error("bad-input", "no cubes to assemble");
    if (chain.blanking) {
        if (chain.blanking->keep.size() != cubes[0].axis.size())
            throw Error("length-mismatch",
                        "blanking mask does not match the cube axis");
        if (chain.blanking->kept_count() == 0)
            throw Error("empty-mask", "blanking mask keeps nothing");
    }

    const WavenumberAxis& axis = cubes[0].axis;
    SpectraTable out;
    out.mode = SpectrumMode::Absorbance;
    if (chain.blanking) {
        for (std::size_t c = 0; c < axis.size(); ++c)
            if (chain.blanking->keep[c])
                out.axis.values.push_back(axis.values[c]);
    } else {
        out.axis = axis;
    }

    std::size_t dropped = 0;
    const std::size_t k = axis.size();
    std::vector<double> work(k);
    std::vector<float> row_values(out.axis.size());

    for (std::size_t ci = 0; ci < cubes.size(); ++ci) {
        const SpectralCube& cube = cubes[ci];
        cube.validate();
        if (!(cube.axis == axis))
            throw Error("length-mismatch",
                        "all cubes must share one wavenumber axis");
        const PixelMask& mask = masks[ci];
        if (mask.keep.size() != cube.pixel_count())
            throw Error("length-mismatch",
                        "mask size does not match cube " + cube.meta.core_id);

        for (std::uint32_t r = 0; r < cube.height; ++r) {
            for (std::uint32_t c = 0; c < cube.width; ++c) {
                const std::size_t pix =
                    static_cast<std::size_t>(r) * cube.width + c;
                if (!mask.keep[pix]) continue;
                const auto spec = cube.spectrum(r, c);
                if (cube.mode == SpectrumMode::TransmittancePercent) {
                    for (std::size_t i = 0; i < k; ++i)
                        work[i] = 2.0 - std::log10(static_cast<double>(spec[i]));
                } else {
                    for (std::size_t i = 0; i < k; ++i) work[i] = spec[i];
                }
                if (chain.snv) {
                    try {
                        snv_normalize_inplace(work);
                    } catch (const Error& e) {
                        if (std::string("degenerate-spectrum") == e.code()) {
                            ++dropped;
                            continue;
                        }
                        throw;
                    }
                }
                if (chain.blanking) {
                    std::size_t w = 0;
                    for (std::size_t i = 0; i < k; ++i)
                        if (chain.blanking->keep[i])
                            row_values[w++] = static_cast<float>(work[i]);
                } else {
                    for (std::size_t i = 0; i < k; ++i)
                        row_values[i] = static_cast<float>(work[i]);
                }
                SpectraTable::Row row;
                row.x_um = cube.pixel_x_um(c);
                row.y_um = cube.pixel_y_um(r);
                row.core_id = cube.meta.core_id;
                row.patient_id = cube.meta.patient_id;
                row.label = cube.meta.tissue_class;
                out.append_row(std::move(row), row_values);
            }
        }
    }

    if (stats) stats->dropped_degenerate = dropped;
    if (out.row_count() == 0)
        throw Error("empty-table", "every row was masked out or dropped");
    return out;
}

namespace {

struct CoreInfo {
    std::string patient_id;
    TissueClass label = TissueClass::Unlabeled;
    std::vector<std::size_t> rows;
};

// C(n, k) saturating well above any realistic repeat count.
double choose(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double v = 1.0;
    for (std::size_t i = 0; i < k; ++i)
        v *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    return v;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k,
                                                    std::mt19937_64& engine) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> d(i, n - 1);
        std::swap(idx[i], idx[d(engine)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

SplitResult make_splits(const SpectraTable& table, const SplitPlan& plan) {
    table.validate();
    if (plan.repeats < 1) throw Error("bad-plan", "repeats must be >= 1");
    if (plan.test_cores_per_class < 1)
        throw Error("bad-plan", "test_cores_per_class must be >= 1");

    // cores in deterministic (sorted) order
    std::map<std::string, CoreInfo> cores;
    for (std::size_t i = 0; i < table.row_count(); ++i) {
        const auto& row = table.rows[i];
        auto& info = cores[row.core_id];
        if (info.rows.empty()) {
            info.patient_id = row.patient_id;
            info.label = row.label;
        } else if (info.label != row.label) {
            throw Error("bad-table",
                        "core " + row.core_id + " carries mixed labels");
        }
        info.rows.push_back(i);
    }

    std::vector<std::string> ids;
    std::vector<std::size_t> nc_idx, crc_idx;
    for (const auto& [id, info] : cores) {
        if (info.label == TissueClass::NC) nc_idx.push_back(ids.size());
        else if (info.label == TissueClass::CRC) crc_idx.push_back(ids.size());
        ids.push_back(id);
    }
    const auto t = static_cast<std::size_t>(plan.test_cores_per_class);
    if (nc_idx.empty() || crc_idx.empty())
        throw Error("single-class",
                    "both NC and CRC cores are required for splitting");
    if (nc_idx.size() < t || crc_idx.size() < t)
        throw Error("insufficient-cores",
                    "fewer cores than test_cores_per_class in one class");
    if (nc_idx.size() == t && crc_idx.size() == t)
        throw Error("insufficient-cores", "no cores would remain for training");

    const double distinct_pairs =
        choose(nc_idx.size(), t) * choose(crc_idx.size(), t);
    if (static_cast<double>(plan.repeats) > distinct_pairs)
        throw Error("insufficient-core-pairs",
                    "more distinct test-core pairs requested than exist");

    auto engine = make_engine(derive_seed(plan.seed, 0xc03e5));
    std::set<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> seen;

    SplitResult result;
    result.plan = plan;
    result.repeats.reserve(plan.repeats);

    for (int rep = 0; rep < plan.repeats; ++rep) {
        std::vector<std::size_t> nc_pick, crc_pick;
        do {
            std::vector<std::size_t> a =
                sample_without_replacement(nc_idx.size(), t, engine);
            std::vector<std::size_t> b =
                sample_without_replacement(crc_idx.size(), t, engine);
            if (seen.insert({a, b}).second) {
                nc_pick = std::move(a);
                crc_pick = std::move(b);
            }
        } while (nc_pick.empty() && crc_pick.empty());

        SplitRepeat sr;
        std::set<std::string> test_ids;
        for (auto i : nc_pick) test_ids.insert(ids[nc_idx[i]]);
        for (auto i : crc_pick) test_ids.insert(ids[crc_idx[i]]);

        std::set<std::string> test_patients;
        if (plan.level == SplitPlan::Level::Patient)
            for (const auto& id : test_ids)
                test_patients.insert(cores.at(id).patient_id);

        for (const auto& id : ids) {
            const auto& info = cores.at(id);
            if (test_ids.count(id)) {
                sr.test_cores.push_back(id);
                sr.test_rows.insert(sr.test_rows.end(), info.rows.begin(),
                                    info.rows.end());
            } else if (plan.level == SplitPlan::Level::Patient &&
                       test_patients.count(info.patient_id)) {
                continue;  // same patient as a test core: excluded entirely
            } else {
                sr.train_cores.push_back(id);
                sr.train_rows.insert(sr.train_rows.end(), info.rows.begin(),
                                     info.rows.end());
            }
        }
        if (sr.train_rows.empty())
            throw Error("insufficient-cores",
                        "patient-level exclusion removed every training core");

        auto shuffle_engine =
            make_engine(derive_seed(plan.seed, 0xa11ce + static_cast<std::uint64_t>(rep)));
        std::shuffle(sr.train_rows.begin(), sr.train_rows.end(), shuffle_engine);
        std::shuffle(sr.test_rows.begin(), sr.test_rows.end(), shuffle_engine);
        result.repeats.push_back(std::move(sr));
    }
    return result;
}

nlohmann::ordered_json split_to_json(const SplitResult& split) {
    nlohmann::ordered_json j;
    j["repeats"] = split.plan.repeats;
    j["test_cores_per_class"] = split.plan.test_cores_per_class;
    j["level"] =
        split.plan.level == SplitPlan::Level::Core ? "core" : "patient";
    j["seed"] = split.plan.seed;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rep : split.repeats) {
        nlohmann::ordered_json r;
        r["train_cores"] = rep.train_cores;
        r["test_cores"] = rep.test_cores;
        r["train_rows"] = rep.train_rows.size();
        r["test_rows"] = rep.test_rows.size();
        arr.push_back(std::move(r));
    }
    j["splits"] = std::move(arr);
    return j;
}

}  // namespace mirspec
