#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace hifnet::wave {

using Rng = std::mt19937_64;

enum class SystemId : std::uint8_t { SourceSystem = 0, TargetSystem = 1 };
enum class Label : std::uint8_t { Normal = 0, Hif = 1 };

std::string_view to_string(SystemId id);
std::string_view to_string(Label label);
SystemId system_from_string(std::string_view name);

/// Parameters of the anti-parallel diode / DC source fault model.
/// v_n is stored as a negative voltage.
struct HifParams {
    double v_p = 0.0;
    double v_n = 0.0;
    double r_p = 0.0;
    double r_n = 0.0;
    double inception_angle = 0.0;
    double arc_jitter = 0.1;
};

enum class TransientKind : std::uint8_t { LoadStep = 0, CapacitorSwitch = 1, FeederSwitch = 2 };

struct TransientParams {
    TransientKind kind = TransientKind::LoadStep;
    double magnitude = 0.0;              // per-unit of base load current
    double inception_angle = 0.0;
    double damping_time_constant = 0.0; // seconds, CapacitorSwitch only
    double oscillation_frequency = 0.0; // hertz, CapacitorSwitch only
};

/// Single-waveform stand-in for a distribution feeder.
///
/// `loading_level`, `phase_offset` (voltage phase at the first sample),
/// `power_factor_angle` and `lead_cycles` vary per window; everything else is fixed
/// by the system profile.
struct FeederScenario {
    SystemId system_id = SystemId::SourceSystem;
    double peak_voltage = 0.0;
    double base_load_current = 0.0;
    double loading_level = 1.0;
    double phase_offset = 0.0;
    double power_factor_angle = 0.0; // load current lags voltage by this angle
    double harmonic_level = 0.0;     // 3rd/5th harmonic content of the load, fraction of fundamental
    double grid_frequency = 60.0;
    double sampling_rate = 15000.0;
    std::size_t window_length = 300;
    double noise_level = 0.02;
    int lead_cycles = 0; // whole cycles the event started before its in-window inception

    static FeederScenario source_system();
    static FeederScenario target_system();
    static FeederScenario for_system(SystemId id);

    double angular_frequency() const;
    /// Voltage phase (radians, unwrapped) at sample k.
    double phase_at(std::size_t k) const;
    double voltage_at(std::size_t k) const;
    /// Samples per grid cycle (250 at 15 kHz / 60 Hz).
    double samples_per_cycle() const { return sampling_rate / grid_frequency; }
};

struct Window {
    std::vector<double> samples;
    Label label = Label::Normal;
    SystemId scenario_id = SystemId::SourceSystem;
    std::uint64_t generation_seed = 0;

    bool operator==(const Window&) const = default;
};

void validate(const FeederScenario& s);
void validate(const HifParams& p, double peak_voltage);
void validate(const TransientParams& t);

/// Fault current through the diode branches for an instantaneous phase voltage.
double hif_current(double v_inst, const HifParams& p);

/// First sample index at which the voltage phase reaches `inception_angle`.
std::size_t inception_sample(const FeederScenario& s, double inception_angle);

/// Signed event start: inception_sample moved back by `lead_cycles` whole cycles.
/// Negative when the event began before the window.
long long event_start(const FeederScenario& s, double inception_angle);

/// Steady load current (fundamental plus harmonic background) without noise.
std::vector<double> steady_load_current(const FeederScenario& s, Rng& rng);

Window synth_hif_window(const FeederScenario& s, const HifParams& p, std::uint64_t rng_seed);
Window synth_transient_window(const FeederScenario& s, const TransientParams& t, std::uint64_t rng_seed);

/// Adds zero-mean Gaussian noise with standard deviation level * RMS(samples).
std::vector<double> add_noise(std::span<const double> samples, double level, Rng& rng);

/// Deterministic per-item seed derivation (SplitMix64 finalizer over master and index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace hifnet::wave
