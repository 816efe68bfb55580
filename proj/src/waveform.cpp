#include "hifnet/waveform.hpp"

#include "hifnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hifnet::wave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    return r;
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

} // namespace

std::string_view to_string(SystemId id) {
    switch (id) {
    case SystemId::SourceSystem:
        return "source";
    case SystemId::TargetSystem:
        return "target";
    }
    return "unknown";
}

std::string_view to_string(Label label) { return label == Label::Hif ? "HIF" : "NORMAL"; }

SystemId system_from_string(std::string_view name) {
    if (name == "source" || name == "SourceSystem") {
        return SystemId::SourceSystem;
    }
    if (name == "target" || name == "TargetSystem") {
        return SystemId::TargetSystem;
    }
    throw ConfigError("unknown scenario '" + std::string(name) + "' (expected source or target)");
}

FeederScenario FeederScenario::source_system() {
    FeederScenario s;
    s.system_id = SystemId::SourceSystem;
    s.peak_voltage = 10180.0; // 12.47 kV feeder, line-to-neutral peak
    s.base_load_current = 40.0;
    s.power_factor_angle = 0.32;
    s.harmonic_level = 0.03;
    return s;
}

FeederScenario FeederScenario::target_system() {
    FeederScenario s;
    s.system_id = SystemId::TargetSystem;
    s.peak_voltage = 3400.0; // 4.16 kV feeder, line-to-neutral peak
    s.base_load_current = 25.0;
    s.power_factor_angle = 0.45;
    s.harmonic_level = 0.05;
    return s;
}

FeederScenario FeederScenario::for_system(SystemId id) {
    return id == SystemId::SourceSystem ? source_system() : target_system();
}

double FeederScenario::angular_frequency() const { return kTwoPi * grid_frequency; }

double FeederScenario::phase_at(std::size_t k) const {
    return phase_offset + angular_frequency() * static_cast<double>(k) / sampling_rate;
}

double FeederScenario::voltage_at(std::size_t k) const {
    // Reduce k modulo the cycle so integer samples-per-cycle gives exactly periodic values.
    const double spc = samples_per_cycle();
    const double in_cycle = std::fmod(static_cast<double>(k), spc);
    return peak_voltage * std::sin(phase_offset + kTwoPi * in_cycle / spc);
}

void validate(const FeederScenario& s) {
    if (!finite_positive(s.peak_voltage) || !finite_positive(s.base_load_current) ||
        !finite_positive(s.loading_level)) {
        throw ConfigError("scenario peak_voltage, base_load_current and loading_level must be positive");
    }
    if (!finite_positive(s.grid_frequency) || !finite_positive(s.sampling_rate) || s.window_length == 0) {
        throw ConfigError("scenario grid_frequency, sampling_rate and window_length must be positive");
    }
    if (!(s.noise_level >= 0.0) || !(s.harmonic_level >= 0.0) || !std::isfinite(s.phase_offset)) {
        throw ConfigError("scenario noise_level and harmonic_level must be non-negative");
    }
    if (s.lead_cycles < 0) {
        throw ConfigError("scenario lead_cycles must be non-negative");
    }
}

void validate(const HifParams& p, double peak_voltage) {
    if (!(p.r_p >= 100.0 && p.r_p <= 600.0) || !(p.r_n >= 100.0 && p.r_n <= 600.0)) {
        throw ConfigError("HIF resistances must lie in [100, 600] ohm (got r_p=" + std::to_string(p.r_p) +
                          ", r_n=" + std::to_string(p.r_n) + ")");
    }
    if (!(p.v_p > 0.0) || !(p.v_n < 0.0)) {
        throw ConfigError("HIF thresholds need v_p > 0 and v_n < 0");
    }
    if (!(p.v_p < peak_voltage) || !(-p.v_n < peak_voltage)) {
        throw ConfigError("HIF thresholds must be below the peak phase voltage");
    }
    if (!(p.inception_angle >= 0.0 && p.inception_angle < kTwoPi)) {
        throw ConfigError("HIF inception angle must lie in [0, 2pi)");
    }
    if (!(p.arc_jitter >= 0.0 && p.arc_jitter <= 0.5)) {
        throw ConfigError("arc_jitter must lie in [0, 0.5]");
    }
}

void validate(const TransientParams& t) {
    if (!(t.magnitude >= 0.0) || !std::isfinite(t.magnitude)) {
        throw ConfigError("transient magnitude must be non-negative");
    }
    if (!std::isfinite(t.inception_angle)) {
        throw ConfigError("transient inception angle must be finite");
    }
    switch (t.kind) {
    case TransientKind::LoadStep:
        break;
    case TransientKind::CapacitorSwitch:
        if (!(t.magnitude > 0.0) || !finite_positive(t.damping_time_constant) ||
            !(t.oscillation_frequency > 60.0) || !std::isfinite(t.oscillation_frequency)) {
            throw ConfigError("capacitor switching needs magnitude > 0, damping_time_constant > 0 and "
                              "oscillation_frequency > 60 Hz");
        }
        break;
    case TransientKind::FeederSwitch:
        if (!(t.magnitude > 0.0)) {
            throw ConfigError("feeder switching needs magnitude > 0");
        }
        break;
    default:
        throw ConfigError("unknown transient kind");
    }
}

double hif_current(double v_inst, const HifParams& p) {
    if (v_inst > p.v_p) {
        return (v_inst - p.v_p) / p.r_p;
    }
    if (v_inst < p.v_n) {
        return (v_inst - p.v_n) / p.r_n;
    }
    return 0.0;
}

std::size_t inception_sample(const FeederScenario& s, double inception_angle) {
    const double delta = wrap_angle(inception_angle - s.phase_offset);
    const double step = kTwoPi / s.samples_per_cycle();
    // An angle that lands on a sample (up to rounding) starts at that sample.
    return static_cast<std::size_t>(std::ceil(delta / step - 1e-9));
}

long long event_start(const FeederScenario& s, double inception_angle) {
    return static_cast<long long>(inception_sample(s, inception_angle)) -
           static_cast<long long>(s.lead_cycles) * std::llround(s.samples_per_cycle());
}

std::vector<double> steady_load_current(const FeederScenario& s, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double h3 = s.harmonic_level * unit(rng);
    const double h5 = s.harmonic_level * unit(rng);
    const double phi3 = kTwoPi * unit(rng);
    const double phi5 = kTwoPi * unit(rng);

    const double amp = s.base_load_current * s.loading_level;
    const double spc = s.samples_per_cycle();
    std::vector<double> out(s.window_length);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double theta = s.phase_offset - s.power_factor_angle +
                             kTwoPi * std::fmod(static_cast<double>(k), spc) / spc;
        out[k] = amp * (std::sin(theta) + h3 * std::sin(3.0 * theta + phi3) + h5 * std::sin(5.0 * theta + phi5));
    }
    return out;
}

std::vector<double> add_noise(std::span<const double> samples, double level, Rng& rng) {
    std::vector<double> out(samples.begin(), samples.end());
    if (level <= 0.0 || samples.empty()) {
        return out;
    }
    double sum_sq = 0.0;
    for (double v : samples) {
        sum_sq += v * v;
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(samples.size()));
    if (rms == 0.0) {
        return out;
    }
    std::normal_distribution<double> noise(0.0, level * rms);
    for (double& v : out) {
        v += noise(rng);
    }
    return out;
}

Window synth_hif_window(const FeederScenario& s, const HifParams& p, std::uint64_t rng_seed) {
    validate(s);
    validate(p, s.peak_voltage);

    Rng rng(rng_seed);
    auto clean = steady_load_current(s, rng);

    std::uniform_real_distribution<double> jitter(-p.arc_jitter, p.arc_jitter);
    const auto start = static_cast<std::size_t>(std::max(0LL, event_start(s, p.inception_angle)));
    HifParams arc = p;
    long long half_cycle = -1;
    for (std::size_t k = start; k < clean.size(); ++k) {
        const auto h = static_cast<long long>(std::floor(s.phase_at(k) / std::numbers::pi));
        if (h != half_cycle) {
            half_cycle = h;
            if (p.arc_jitter > 0.0) {
                arc.r_p = p.r_p * (1.0 + jitter(rng));
                arc.r_n = p.r_n * (1.0 + jitter(rng));
            }
        }
        clean[k] += hif_current(s.voltage_at(k), arc);
    }

    Window w;
    w.samples = add_noise(clean, s.noise_level, rng);
    w.label = Label::Hif;
    w.scenario_id = s.system_id;
    w.generation_seed = rng_seed;
    return w;
}

Window synth_transient_window(const FeederScenario& s, const TransientParams& t, std::uint64_t rng_seed) {
    validate(s);
    validate(t);

    Rng rng(rng_seed);
    auto clean = steady_load_current(s, rng);
    const long long onset = event_start(s, t.inception_angle);
    const auto start = static_cast<std::size_t>(std::max(0LL, onset));
    const double amp = t.magnitude * s.base_load_current;
    const double spc = s.samples_per_cycle();

    switch (t.kind) {
    case TransientKind::LoadStep:
        for (std::size_t k = start; k < clean.size(); ++k) {
            const double theta = s.phase_offset - s.power_factor_angle +
                                 kTwoPi * std::fmod(static_cast<double>(k), spc) / spc;
            clean[k] += amp * std::sin(theta);
        }
        break;
    case TransientKind::CapacitorSwitch:
        for (std::size_t k = start; k < clean.size(); ++k) {
            const double dt = static_cast<double>(static_cast<long long>(k) - onset) / s.sampling_rate;
            clean[k] += amp * std::exp(-dt / t.damping_time_constant) *
                        std::sin(kTwoPi * t.oscillation_frequency * dt);
        }
        break;
    case TransientKind::FeederSwitch: {
        // Current sags by `magnitude` (capped at a full outage) for one half-cycle.
        const double keep = 1.0 - std::min(t.magnitude, 1.0);
        const long long stop = onset + std::llround(spc / 2.0);
        for (std::size_t k = start; static_cast<long long>(k) < stop && k < clean.size(); ++k) {
            clean[k] *= keep;
        }
        break;
    }
    }

    Window w;
    w.samples = add_noise(clean, s.noise_level, rng);
    w.label = Label::Normal;
    w.scenario_id = s.system_id;
    w.generation_seed = rng_seed;
    return w;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace hifnet::wave
