#include "hifnet/dataset.hpp"

#include "hifnet/binary_io.hpp"
#include "hifnet/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace hifnet::wave {

namespace {

constexpr std::array<std::uint8_t, 4> kDatasetMagic{'H', 'I', 'F', 'D'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4 + 8 + 4 + 1;
constexpr std::size_t kRecordOverhead = 1 + 1 + 8;

void check_range(const Range& r, const char* name, double lo_bound, double hi_bound) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
        throw ConfigError(std::string("range '") + name + "' is empty or non-finite");
    }
    if (r.lo < lo_bound || r.hi > hi_bound) {
        throw ConfigError(std::string("range '") + name + "' must lie within [" + std::to_string(lo_bound) +
                          ", " + std::to_string(hi_bound) + "]");
    }
}

double draw(const Range& r, Rng& rng) {
    if (r.lo == r.hi) {
        return r.lo;
    }
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

} // namespace

GenConfig gen_profile(std::string_view name) {
    GenConfig c;
    if (name == "case1") {
        c.scenario = SystemId::SourceSystem;
        c.count = 5000;
        c.seed = 20190101;
        return c;
    }
    if (name == "case2") {
        c.scenario = SystemId::TargetSystem;
        c.count = 300;
        c.seed = 20190202;
        c.ranges.v_p = {0.2, 0.5};
        c.ranges.v_n = {-0.5, -0.2};
        c.ranges.r_p = {100.0, 300.0};
        c.ranges.r_n = {100.0, 300.0};
        c.ranges.loading = {0.4, 1.2};
        c.ranges.jitter = {0.05, 0.2};
        c.ranges.step_magnitude = {0.1, 0.6};
        c.ranges.cap_magnitude = {0.2, 0.8};
        c.ranges.cap_time_constant = {0.001, 0.006};
        c.ranges.cap_frequency = {500.0, 2000.0};
        c.ranges.dropout_magnitude = {0.3, 0.9};
        c.ranges.power_factor_angle = {0.3, 0.7};
        return c;
    }
    throw ConfigError("unknown profile '" + std::string(name) + "' (expected case1 or case2)");
}

void validate(const GenConfig& c) {
    if (c.count < 2) {
        throw ConfigError("dataset count must be at least 2");
    }
    const auto& r = c.ranges;
    check_range(r.v_p, "v_p", 1e-6, 0.999);
    check_range(r.v_n, "v_n", -0.999, -1e-6);
    check_range(r.r_p, "r_p", 100.0, 600.0);
    check_range(r.r_n, "r_n", 100.0, 600.0);
    check_range(r.loading, "loading", 1e-6, 1e6);
    check_range(r.jitter, "jitter", 0.0, 0.5);
    check_range(r.step_magnitude, "step_magnitude", 0.0, 1e6);
    check_range(r.cap_magnitude, "cap_magnitude", 1e-9, 1e6);
    check_range(r.cap_time_constant, "cap_time_constant", 1e-9, 1e6);
    check_range(r.cap_frequency, "cap_frequency", 60.0 + 1e-9, 1e9);
    check_range(r.dropout_magnitude, "dropout_magnitude", 1e-9, 1e6);
    check_range(r.onset, "onset", -4.0, 0.999);
    check_range(r.power_factor_angle, "power_factor_angle", -1.5, 1.5);
    const auto& m = c.transient_mix;
    if (!(m.load_step >= 0.0 && m.capacitor_switch >= 0.0 && m.feeder_switch >= 0.0) ||
        !(m.load_step + m.capacitor_switch + m.feeder_switch > 0.0)) {
        throw ConfigError("transient_mix weights must be non-negative with a positive sum");
    }
}

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(windows.begin(), windows.end(), [label](const Window& w) { return w.label == label; }));
}

WindowPlan plan_window(const GenConfig& config, std::uint64_t master_seed, std::size_t index) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    WindowPlan plan;
    plan.seed = derive_seed(master_seed, index);
    plan.label = index % 2 == 0 ? Label::Hif : Label::Normal;

    Rng rng(derive_seed(plan.seed, 0x5eed));
    const auto& r = config.ranges;
    std::uniform_real_distribution<double> angle(0.0, two_pi);

    plan.scenario = FeederScenario::for_system(config.scenario);
    plan.scenario.loading_level = draw(r.loading, rng);
    plan.scenario.phase_offset = angle(rng);
    plan.scenario.power_factor_angle = draw(r.power_factor_angle, rng);

    const double peak = plan.scenario.peak_voltage;
    // Negative onsets place the event before the first sample, in whole cycles back
    // from the matching in-window phase.
    auto onset_angle = [&](Rng& g) {
        const double onset = draw(r.onset, g);
        const double lead = std::ceil(-onset);
        plan.scenario.lead_cycles = lead > 0.0 ? static_cast<int>(lead) : 0;
        return std::fmod(plan.scenario.phase_offset + two_pi * (onset + plan.scenario.lead_cycles), two_pi);
    };
    if (plan.label == Label::Hif) {
        plan.hif.v_p = draw(r.v_p, rng) * peak;
        plan.hif.v_n = draw(r.v_n, rng) * peak;
        plan.hif.r_p = draw(r.r_p, rng);
        plan.hif.r_n = draw(r.r_n, rng);
        plan.hif.inception_angle = onset_angle(rng);
        plan.hif.arc_jitter = draw(r.jitter, rng);
    } else {
        const auto& m = config.transient_mix;
        std::discrete_distribution<int> kind({m.load_step, m.capacitor_switch, m.feeder_switch});
        auto& t = plan.transient;
        t.kind = static_cast<TransientKind>(kind(rng));
        t.inception_angle = onset_angle(rng);
        switch (t.kind) {
        case TransientKind::LoadStep:
            t.magnitude = draw(r.step_magnitude, rng);
            break;
        case TransientKind::CapacitorSwitch:
            t.magnitude = draw(r.cap_magnitude, rng);
            t.damping_time_constant = draw(r.cap_time_constant, rng);
            t.oscillation_frequency = draw(r.cap_frequency, rng);
            break;
        case TransientKind::FeederSwitch:
            t.magnitude = draw(r.dropout_magnitude, rng);
            break;
        }
    }
    return plan;
}

Dataset build_dataset(const GenConfig& config, std::uint64_t master_seed) {
    validate(config);
    Dataset d;
    d.master_seed = master_seed;
    d.scenario = config.scenario;
    d.windows.reserve(config.count);
    for (std::size_t i = 0; i < config.count; ++i) {
        const auto plan = plan_window(config, master_seed, i);
        d.windows.push_back(plan.label == Label::Hif ? synth_hif_window(plan.scenario, plan.hif, plan.seed)
                                                     : synth_transient_window(plan.scenario, plan.transient, plan.seed));
    }
    return d;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    }
    Rng rng(seed);
    std::vector<bool> to_first(d.size(), false);
    for (Label label : {Label::Hif, Label::Normal}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d.windows[i].label == label) {
                members.push_back(i);
            }
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto take = static_cast<std::size_t>(std::lround(static_cast<double>(members.size()) * train_fraction));
        for (std::size_t j = 0; j < take; ++j) {
            to_first[members[j]] = true;
        }
    }

    Dataset first{{}, d.master_seed, d.generator_version, d.scenario};
    Dataset second{{}, d.master_seed, d.generator_version, d.scenario};
    for (std::size_t i = 0; i < d.size(); ++i) {
        (to_first[i] ? first : second).windows.push_back(d.windows[i]);
    }
    if (first.empty() || second.empty()) {
        throw ConfigError("split fraction " + std::to_string(train_fraction) + " leaves one side empty for " +
                          std::to_string(d.size()) + " windows");
    }
    return {std::move(first), std::move(second)};
}

std::vector<std::uint8_t> encode_dataset(const Dataset& d) {
    const std::size_t length = d.empty() ? 0 : d.windows.front().samples.size();
    io::ByteWriter w;
    w.put_bytes(kDatasetMagic);
    w.put_u32(kDatasetFormatVersion);
    w.put_u64(d.size());
    w.put_u32(static_cast<std::uint32_t>(length));
    w.put_u64(d.master_seed);
    w.put_u32(d.generator_version);
    w.put_u8(static_cast<std::uint8_t>(d.scenario));
    for (const auto& win : d.windows) {
        if (win.samples.size() != length) {
            throw DataError("dataset windows have inconsistent lengths");
        }
        w.put_u8(static_cast<std::uint8_t>(win.label));
        w.put_u8(static_cast<std::uint8_t>(win.scenario_id));
        w.put_u64(win.generation_seed);
        for (double v : win.samples) {
            w.put_f64(v);
        }
    }
    w.seal();
    return w.bytes();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kDatasetMagic.begin(), kDatasetMagic.end(), bytes.begin())) {
        throw DataError("not a dataset file (bad magic)");
    }
    io::ByteReader header(bytes.subspan(4));
    const auto version = header.get_u32();
    if (version != kDatasetFormatVersion) {
        throw VersionError("unsupported dataset format version " + std::to_string(version) + " (expected " +
                           std::to_string(kDatasetFormatVersion) + ")");
    }
    const auto count = header.get_u64();
    const auto length = header.get_u32();
    const std::size_t expected = kHeaderBytes + count * (kRecordOverhead + 8 * std::size_t{length}) + 4;
    if (bytes.size() < expected) {
        throw TruncatedError("dataset file truncated: " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(expected));
    }
    if (bytes.size() > expected) {
        throw DataError("dataset file has " + std::to_string(bytes.size() - expected) + " trailing bytes");
    }
    const auto payload = io::verify_sealed(bytes);

    io::ByteReader r(payload.subspan(4 + 4 + 8 + 4));
    Dataset d;
    d.master_seed = r.get_u64();
    d.generator_version = r.get_u32();
    d.scenario = static_cast<SystemId>(r.get_u8());
    d.windows.resize(count);
    for (auto& win : d.windows) {
        const auto label = r.get_u8();
        const auto scenario = r.get_u8();
        if (label > 1 || scenario > 1) {
            throw DataError("dataset record has an invalid label or scenario byte");
        }
        win.label = static_cast<Label>(label);
        win.scenario_id = static_cast<SystemId>(scenario);
        win.generation_seed = r.get_u64();
        win.samples.resize(length);
        for (double& v : win.samples) {
            v = r.get_f64();
        }
    }
    return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
    io::write_file(path, encode_dataset(d));
}

Dataset read_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

} // namespace hifnet::wave
