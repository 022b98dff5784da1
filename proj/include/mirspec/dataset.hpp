#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlohmann/json_fwd.hpp"

#include "mirspec/types.hpp"

namespace mirspec {

// Fixed processing order: absorbance conversion, pixel mask, SNV,
// channel blanking. Degenerate (constant) spectra are dropped and counted,
// never zero-filled.
struct PreprocessChain {
    bool snv = true;
    std::optional<ChannelMask> blanking;
};

struct AssembleStats {
    std::size_t dropped_degenerate = 0;
};

SpectraTable assemble(std::span<const SpectralCube> cubes,
                      std::span<const PixelMask> masks,
                      const PreprocessChain& chain,
                      AssembleStats* stats = nullptr);

struct SplitPlan {
    enum class Level : std::uint8_t { Core = 0, Patient = 1 };
    int repeats = 12;
    int test_cores_per_class = 2;
    Level level = Level::Core;
    std::uint64_t seed = 0;
};

struct SplitRepeat {
    std::vector<std::string> train_cores;
    std::vector<std::string> test_cores;
    std::vector<std::size_t> train_rows;  // shuffled
    std::vector<std::size_t> test_rows;   // shuffled
};

struct SplitResult {
    SplitPlan plan;
    std::vector<SplitRepeat> repeats;
};

// Draws test cores uniformly without replacement per class; the chosen
// (NC-set, CRC-set) pair is distinct across repeats. Rows are shuffled
// within train and within test after splitting. PATIENT level additionally
// removes same-patient cores from the training side.
SplitResult make_splits(const SpectraTable& table, const SplitPlan& plan);

nlohmann::ordered_json split_to_json(const SplitResult& split);

}  // namespace mirspec
