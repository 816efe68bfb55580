#pragma once

#include "hifnet/waveform.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hifnet::wave {

inline constexpr std::uint32_t kGeneratorVersion = 1;
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// Closed interval [lo, hi] for uniform parameter draws.
struct Range {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Range&) const = default;
};

/// Sampling ranges for per-window parameters.
/// v_p / v_n are fractions of the scenario peak voltage (v_n negative).
struct GenRanges {
    Range v_p{0.1, 0.5};
    Range v_n{-0.5, -0.1};
    Range r_p{100.0, 600.0};
    Range r_n{100.0, 600.0};
    Range loading{0.5, 1.5};
    Range jitter{0.1, 0.1};
    Range step_magnitude{0.1, 0.8};
    Range cap_magnitude{0.2, 1.0};
    Range cap_time_constant{0.002, 0.01};
    Range cap_frequency{300.0, 1200.0};
    Range dropout_magnitude{0.3, 1.0};
    Range onset{-0.5, 0.5}; // event start, in cycles after the first sample
    Range power_factor_angle{0.2, 0.6}; // load current lag behind voltage, radians

    bool operator==(const GenRanges&) const = default;
};

/// Relative weights of the normal-transient categories.
struct TransientMix {
    double load_step = 1.0;
    double capacitor_switch = 2.0;
    double feeder_switch = 1.0;

    bool operator==(const TransientMix&) const = default;
};

struct GenConfig {
    SystemId scenario = SystemId::SourceSystem;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    GenRanges ranges;
    TransientMix transient_mix;

    bool operator==(const GenConfig&) const = default;
};

/// Built-in generation profiles: "case1" (5000 source-system windows) and
/// "case2" (300 target-system windows).
GenConfig gen_profile(std::string_view name);

void validate(const GenConfig& config);

struct Dataset {
    std::vector<Window> windows;
    std::uint64_t master_seed = 0;
    std::uint32_t generator_version = kGeneratorVersion;
    SystemId scenario = SystemId::SourceSystem;

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }
    std::size_t count(Label label) const;

    bool operator==(const Dataset&) const = default;
};

/// Per-window draw used by build_dataset; exposed for inspection and tests.
struct WindowPlan {
    Label label = Label::Normal;
    FeederScenario scenario;
    HifParams hif;
    TransientParams transient;
    std::uint64_t seed = 0;
};

WindowPlan plan_window(const GenConfig& config, std::uint64_t master_seed, std::size_t index);

/// Balanced dataset: even indices are HIF windows, odd indices normal transients.
Dataset build_dataset(const GenConfig& config, std::uint64_t master_seed);

/// Stratified split. Each class is shuffled independently and round(n_class * train_fraction)
/// members go to the first side. Windows keep their original relative order.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed);

std::vector<std::uint8_t> encode_dataset(const Dataset& d);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

} // namespace hifnet::wave
