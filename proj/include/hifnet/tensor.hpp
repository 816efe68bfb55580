#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hifnet::nn {

/// Row-major (channels x length) feature map.
struct Tensor1 {
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<double> values;

    Tensor1() = default;
    Tensor1(std::size_t c, std::size_t l, double fill = 0.0) : channels(c), length(l), values(c * l, fill) {}
    Tensor1(std::size_t c, std::size_t l, std::vector<double> v);

    double& at(std::size_t c, std::size_t t) { return values[c * length + t]; }
    double at(std::size_t c, std::size_t t) const { return values[c * length + t]; }
    std::span<double> channel(std::size_t c) { return {values.data() + c * length, length}; }
    std::span<const double> channel(std::size_t c) const { return {values.data() + c * length, length}; }
    std::size_t size() const { return values.size(); }

    bool operator==(const Tensor1&) const = default;
};

/// Valid (unpadded) stride-1 cross-correlation. Weights laid out [out][in][tap].
struct ConvLayer {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_size = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    ConvLayer() = default;
    ConvLayer(std::size_t out, std::size_t in, std::size_t k);

    double& weight(std::size_t o, std::size_t c, std::size_t i) { return weights[(o * in_channels + c) * kernel_size + i]; }
    double weight(std::size_t o, std::size_t c, std::size_t i) const {
        return weights[(o * in_channels + c) * kernel_size + i];
    }
    std::size_t parameter_count() const { return weights.size() + bias.size(); }

    bool operator==(const ConvLayer&) const = default;
};

/// Fully connected layer, weights laid out [out][in].
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out);

    double& weight(std::size_t o, std::size_t i) { return weights[o * in_dim + i]; }
    double weight(std::size_t o, std::size_t i) const { return weights[o * in_dim + i]; }
    std::size_t parameter_count() const { return weights.size() + bias.size(); }

    bool operator==(const DenseLayer&) const = default;
};

struct PoolRecord {
    std::size_t width = 0;
    std::size_t stride = 0;
    std::size_t input_length = 0;
    std::size_t channels = 0;
    std::vector<std::size_t> argmax; // input position per (channel, output position)
};

/// Gradients aligned with a layer's weights and bias.
struct GradBundle {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct ConvBackward {
    GradBundle params;
    Tensor1 input_grad;
};

struct DenseBackward {
    GradBundle params;
    std::vector<double> input_grad;
};

std::size_t conv_output_length(std::size_t length, std::size_t kernel_size);
std::size_t pool_output_length(std::size_t length, std::size_t width, std::size_t stride);

Tensor1 conv_forward(const Tensor1& input, const ConvLayer& layer);
ConvBackward conv_backward(const Tensor1& input, const ConvLayer& layer, const Tensor1& grad_out);

Tensor1 relu_forward(const Tensor1& x);
Tensor1 relu_backward(const Tensor1& input, const Tensor1& grad_out);

std::pair<Tensor1, PoolRecord> maxpool_forward(const Tensor1& x, std::size_t width, std::size_t stride);
Tensor1 maxpool_backward(const PoolRecord& record, const Tensor1& grad_out);

std::vector<double> dense_forward(std::span<const double> x, const DenseLayer& layer);
DenseBackward dense_backward(std::span<const double> x, const DenseLayer& layer, std::span<const double> grad_out);

/// Logistic function e^x / (e^x + 1); never overflows.
double sigmoid(double x);

inline constexpr double kProbabilityClip = 1e-12;

/// Mean binary cross-entropy with predictions clipped to [eps, 1 - eps].
double bce_loss(std::span<const double> y_hat, std::span<const double> y);

/// BCE evaluated from pre-activations; equals bce_loss(sigmoid(logits), y).
double bce_from_logits(std::span<const double> logits, std::span<const double> y);

/// Gradient of bce(sigmoid(z), y) with respect to z: (sigmoid(z) - y) / m.
std::vector<double> sigmoid_bce_backward(std::span<const double> logits, std::span<const double> y);

} // namespace hifnet::nn
