#pragma once

#include "hifnet/tensor.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hifnet::nn {

inline constexpr std::size_t kWindowLength = 300;

struct ConvBlockSpec {
    std::size_t out_channels = 0;
    std::size_t kernel_size = 0;
    std::size_t pool_width = 0;
    std::size_t pool_stride = 0;

    bool operator==(const ConvBlockSpec&) const = default;
};

/// Four conv/ReLU/max-pool blocks, then dense(hidden) -> ReLU -> dense(1) -> sigmoid.
struct CnnSpec {
    std::array<ConvBlockSpec, 4> blocks{};
    std::size_t hidden_dim = 64;
    std::size_t output_dim = 1;
    std::size_t input_length = kWindowLength;

    static CnnSpec defaults();
    bool operator==(const CnnSpec&) const = default;
};

/// Four dense layers: input -> hidden -> hidden -> hidden -> 1 (ReLU hidden, sigmoid output).
struct MlpSpec {
    std::array<std::size_t, 5> dims{kWindowLength, 128, 64, 32, 1};

    static MlpSpec defaults();
    bool operator==(const MlpSpec&) const = default;
};

using ModelSpec = std::variant<CnnSpec, MlpSpec>;

std::string architecture_name(const ModelSpec& spec);

/// Canonical text form of a spec; the fingerprint hashes this string.
std::string canonical_string(const ModelSpec& spec);

/// FNV-1a 64 of canonical_string(spec).
std::uint64_t fingerprint(const ModelSpec& spec);

/// Feature lengths after each conv and each pool, starting with the input length.
std::vector<std::size_t> feature_lengths(const CnnSpec& spec);

/// Throws ConfigError when the shape algebra collapses or dimensions are invalid.
void validate(const ModelSpec& spec);

std::size_t parameter_count(const ModelSpec& spec);

/// Per-window z-score; std floored at 1e-8.
std::vector<double> standardize(std::span<const double> samples);

class Model {
public:
    /// He initialization (std sqrt(2/fan_in)) for layers feeding a ReLU,
    /// sqrt(1/fan_in) for the sigmoid output layer; zero biases.
    static Model build(const ModelSpec& spec, std::uint64_t init_seed);

    /// Zero-initialized model of the given shape.
    static Model zeros(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    bool is_cnn() const { return std::holds_alternative<CnnSpec>(spec_); }
    std::uint64_t init_seed() const { return init_seed_; }

    std::vector<ConvLayer>& convs() { return convs_; }
    const std::vector<ConvLayer>& convs() const { return convs_; }
    std::vector<DenseLayer>& dense() { return dense_; }
    const std::vector<DenseLayer>& dense() const { return dense_; }

    /// Pre-sigmoid output for a raw (unstandardized) window.
    double logit(std::span<const double> window) const;
    /// HIF probability in (0, 1). Throws DivergenceError on non-finite intermediates.
    double forward(std::span<const double> window) const;

    /// Adds d(bce)/d(theta) for one labelled window into `grad` (flat layout) and
    /// returns the window's loss. `grad.size()` must equal parameter_count().
    double accumulate_gradient(std::span<const double> window, double label, std::span<double> grad) const;

    std::size_t parameter_count() const;
    /// Parameters belonging to conv blocks; they occupy the front of the flat layout.
    std::size_t conv_parameter_count() const;

    /// Flat layout: conv blocks (weights, bias) in order, then dense layers (weights, bias).
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    std::vector<double> flat_parameters() const;
    void set_flat_parameters(std::span<const double> flat);

    bool operator==(const Model&) const = default;

private:
    Model(ModelSpec spec, std::uint64_t seed);

    struct PassResult {
        double logit = 0.0;
        double loss = 0.0;
    };

    // Forward pass; when `grad` is non-empty also backpropagates the BCE loss into it.
    PassResult cnn_pass(std::span<const double> window, double label, std::span<double> grad) const;
    PassResult mlp_pass(std::span<const double> window, double label, std::span<double> grad) const;

    ModelSpec spec_;
    std::uint64_t init_seed_ = 0;
    std::vector<ConvLayer> convs_;
    std::vector<DenseLayer> dense_;
};

} // namespace hifnet::nn
