#include "hifnet/tensor.hpp"

#include "hifnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hifnet::nn {

Tensor1::Tensor1(std::size_t c, std::size_t l, std::vector<double> v) : channels(c), length(l), values(std::move(v)) {
    if (values.size() != channels * length) {
        throw ShapeError("tensor value count " + std::to_string(values.size()) + " != " + std::to_string(channels) +
                         " x " + std::to_string(length));
    }
}

ConvLayer::ConvLayer(std::size_t out, std::size_t in, std::size_t k)
    : out_channels(out), in_channels(in), kernel_size(k), weights(out * in * k, 0.0), bias(out, 0.0) {
    if (out == 0 || in == 0 || k == 0) {
        throw ShapeError("conv layer dimensions must be positive");
    }
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : in_dim(in), out_dim(out), weights(in * out, 0.0), bias(out, 0.0) {
    if (in == 0 || out == 0) {
        throw ShapeError("dense layer dimensions must be positive");
    }
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel_size) {
    return length >= kernel_size && kernel_size > 0 ? length - kernel_size + 1 : 0;
}

std::size_t pool_output_length(std::size_t length, std::size_t width, std::size_t stride) {
    if (width == 0 || stride == 0 || width > length) {
        return 0;
    }
    return (length - width) / stride + 1;
}

Tensor1 conv_forward(const Tensor1& input, const ConvLayer& layer) {
    if (input.channels != layer.in_channels) {
        throw ShapeError("conv input has " + std::to_string(input.channels) + " channels, layer expects " +
                         std::to_string(layer.in_channels));
    }
    if (input.length < layer.kernel_size) {
        throw ShapeError("conv input length " + std::to_string(input.length) + " shorter than kernel " +
                         std::to_string(layer.kernel_size));
    }
    const std::size_t out_len = conv_output_length(input.length, layer.kernel_size);
    Tensor1 out(layer.out_channels, out_len);
    // Per output element the accumulation order is bias, then (c, i) with i fastest.
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        double* dst = out.values.data() + o * out_len;
        std::fill(dst, dst + out_len, layer.bias[o]);
        for (std::size_t c = 0; c < layer.in_channels; ++c) {
            const double* src = input.values.data() + c * input.length;
            for (std::size_t i = 0; i < layer.kernel_size; ++i) {
                const double w = layer.weight(o, c, i);
                const double* s = src + i;
                for (std::size_t t = 0; t < out_len; ++t) {
                    dst[t] += w * s[t];
                }
            }
        }
    }
    return out;
}

ConvBackward conv_backward(const Tensor1& input, const ConvLayer& layer, const Tensor1& grad_out) {
    const std::size_t out_len = conv_output_length(input.length, layer.kernel_size);
    if (input.channels != layer.in_channels || grad_out.channels != layer.out_channels || grad_out.length != out_len) {
        throw ShapeError("conv backward: gradient shape does not match the cached forward pass");
    }
    ConvBackward result;
    result.params.weights.assign(layer.weights.size(), 0.0);
    result.params.bias.assign(layer.bias.size(), 0.0);
    result.input_grad = Tensor1(input.channels, input.length);

    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        const double* g = grad_out.values.data() + o * out_len;
        double db = 0.0;
        for (std::size_t t = 0; t < out_len; ++t) {
            db += g[t];
        }
        result.params.bias[o] = db;
        for (std::size_t c = 0; c < layer.in_channels; ++c) {
            const double* src = input.values.data() + c * input.length;
            double* dx = result.input_grad.values.data() + c * input.length;
            for (std::size_t i = 0; i < layer.kernel_size; ++i) {
                const double w = layer.weight(o, c, i);
                double dw = 0.0;
                for (std::size_t t = 0; t < out_len; ++t) {
                    dw += g[t] * src[t + i];
                    dx[t + i] += w * g[t];
                }
                result.params.weights[(o * layer.in_channels + c) * layer.kernel_size + i] = dw;
            }
        }
    }
    return result;
}

Tensor1 relu_forward(const Tensor1& x) {
    Tensor1 out = x;
    for (double& v : out.values) {
        v = v > 0.0 ? v : 0.0;
    }
    return out;
}

Tensor1 relu_backward(const Tensor1& input, const Tensor1& grad_out) {
    if (input.channels != grad_out.channels || input.length != grad_out.length) {
        throw ShapeError("relu backward: gradient shape does not match the cached input");
    }
    Tensor1 out(input.channels, input.length);
    for (std::size_t i = 0; i < input.values.size(); ++i) {
        out.values[i] = input.values[i] > 0.0 ? grad_out.values[i] : 0.0;
    }
    return out;
}

std::pair<Tensor1, PoolRecord> maxpool_forward(const Tensor1& x, std::size_t width, std::size_t stride) {
    if (stride == 0 || width == 0) {
        throw ShapeError("pool width and stride must be positive");
    }
    if (width > x.length) {
        throw ShapeError("pool width " + std::to_string(width) + " exceeds input length " + std::to_string(x.length));
    }
    const std::size_t out_len = pool_output_length(x.length, width, stride);
    Tensor1 out(x.channels, out_len);
    PoolRecord rec{width, stride, x.length, x.channels, std::vector<std::size_t>(x.channels * out_len)};
    for (std::size_t c = 0; c < x.channels; ++c) {
        const double* src = x.values.data() + c * x.length;
        for (std::size_t t = 0; t < out_len; ++t) {
            const std::size_t begin = t * stride;
            std::size_t best = begin;
            for (std::size_t j = begin + 1; j < begin + width; ++j) {
                if (src[j] > src[best]) { // strict: ties keep the first index
                    best = j;
                }
            }
            out.at(c, t) = src[best];
            rec.argmax[c * out_len + t] = best;
        }
    }
    return {std::move(out), std::move(rec)};
}

Tensor1 maxpool_backward(const PoolRecord& record, const Tensor1& grad_out) {
    const std::size_t out_len = pool_output_length(record.input_length, record.width, record.stride);
    if (grad_out.channels != record.channels || grad_out.length != out_len) {
        throw ShapeError("maxpool backward: gradient shape does not match the pool record");
    }
    Tensor1 dx(record.channels, record.input_length);
    for (std::size_t c = 0; c < record.channels; ++c) {
        for (std::size_t t = 0; t < out_len; ++t) {
            dx.at(c, record.argmax[c * out_len + t]) += grad_out.at(c, t);
        }
    }
    return dx;
}

std::vector<double> dense_forward(std::span<const double> x, const DenseLayer& layer) {
    if (x.size() != layer.in_dim) {
        throw ShapeError("dense input has " + std::to_string(x.size()) + " values, layer expects " +
                         std::to_string(layer.in_dim));
    }
    std::vector<double> out(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double* w = layer.weights.data() + o * layer.in_dim;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in_dim; ++i) {
            acc += w[i] * x[i];
        }
        out[o] = acc;
    }
    return out;
}

DenseBackward dense_backward(std::span<const double> x, const DenseLayer& layer, std::span<const double> grad_out) {
    if (x.size() != layer.in_dim || grad_out.size() != layer.out_dim) {
        throw ShapeError("dense backward: shapes do not match the cached forward pass");
    }
    DenseBackward result;
    result.params.weights.resize(layer.weights.size());
    result.params.bias.assign(grad_out.begin(), grad_out.end());
    result.input_grad.assign(layer.in_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const double g = grad_out[o];
        const double* w = layer.weights.data() + o * layer.in_dim;
        double* dw = result.params.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) {
            dw[i] = g * x[i];
            result.input_grad[i] += w[i] * g;
        }
    }
    return result;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (e + 1.0);
}

double bce_loss(std::span<const double> y_hat, std::span<const double> y) {
    if (y_hat.empty()) {
        throw ShapeError("cross-entropy over an empty batch");
    }
    if (y_hat.size() != y.size()) {
        throw ShapeError("cross-entropy: prediction and label counts differ");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double p = std::clamp(y_hat[j], kProbabilityClip, 1.0 - kProbabilityClip);
        sum += y[j] * std::log(p) + (1.0 - y[j]) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(y.size());
}

double bce_from_logits(std::span<const double> logits, std::span<const double> y) {
    std::vector<double> p(logits.size());
    std::transform(logits.begin(), logits.end(), p.begin(), sigmoid);
    return bce_loss(p, y);
}

std::vector<double> sigmoid_bce_backward(std::span<const double> logits, std::span<const double> y) {
    if (logits.empty() || logits.size() != y.size()) {
        throw ShapeError("sigmoid/BCE backward: bad batch shape");
    }
    const double m = static_cast<double>(logits.size());
    std::vector<double> g(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
        g[j] = (sigmoid(logits[j]) - y[j]) / m;
    }
    return g;
}

} // namespace hifnet::nn
