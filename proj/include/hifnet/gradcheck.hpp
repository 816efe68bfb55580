#pragma once

#include "hifnet/network.hpp"
#include "hifnet/tensor.hpp"
#include "hifnet/waveform.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hifnet::nn {

inline constexpr double kGradCheckEpsilon = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::string worst; // description of the worst entry

    bool passed(double tolerance = kGradCheckTolerance) const { return max_relative_error < tolerance; }
    /// Merges another result, keeping the worse one's description.
    void absorb(const GradCheckResult& other);
};

/// Compares `analytic[b][i]` against (J(theta + eps) - J(theta - eps)) / 2eps for every
/// entry of every block in `params`. `loss` must read the current contents of `params`; it
/// may evaluate in extended precision. Throws Error if the loss turns non-finite.
GradCheckResult finite_difference_check(const std::vector<std::span<double>>& params,
                                        const std::vector<std::vector<double>>& analytic,
                                        const std::function<long double()>& loss, const std::string& label,
                                        double eps = kGradCheckEpsilon);

// Layer checks in isolation. Each layer output is reduced to a scalar with a fixed random
// projection followed by sigmoid and BCE against a label, and both parameter and input
// gradients are checked.
GradCheckResult check_conv_layer(const ConvLayer& layer, const Tensor1& input, std::uint64_t seed);
GradCheckResult check_relu(const Tensor1& input, std::uint64_t seed);
GradCheckResult check_maxpool(const Tensor1& input, std::size_t width, std::size_t stride, std::uint64_t seed);
GradCheckResult check_dense_layer(const DenseLayer& layer, std::span<const double> input, std::uint64_t seed);
GradCheckResult check_sigmoid_bce(std::span<const double> logits, std::span<const double> labels);

/// Hook that may rewrite the analytic gradient before comparison (negative controls).
using GradientTamper = std::function<void(std::vector<double>&)>;

/// Full-model check of the mean BCE over `windows` against every parameter. The reference
/// loss is an independent extended-precision forward pass over the model's parameters.
GradCheckResult grad_check(const Model& model, std::span<const wave::Window> windows,
                           const GradientTamper& tamper = {});

/// Every layer type in isolation on random shapes drawn from `seed`.
GradCheckResult check_all_layers(std::uint64_t seed);

} // namespace hifnet::nn
