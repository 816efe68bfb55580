#include "hifnet/gradcheck.hpp"

#include "hifnet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hifnet::nn {

namespace {

/// Scalar head used to turn a layer output into a loss: bce(sigmoid(r . out), y).
struct Probe {
    std::vector<double> weights;
    double label = 1.0;

    Probe(std::size_t n, std::uint64_t seed) : weights(n) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
        for (double& w : weights) {
            w = dist(rng);
        }
        label = std::bernoulli_distribution(0.5)(rng) ? 1.0 : 0.0;
    }

    double score(std::span<const double> out) const {
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            s += weights[i] * out[i];
        }
        return s;
    }

    double loss(std::span<const double> out) const {
        const double z = score(out);
        return bce_from_logits(std::span(&z, 1), std::span(&label, 1));
    }

    std::vector<double> grad(std::span<const double> out) const {
        const double z = score(out);
        const double dz = sigmoid_bce_backward(std::span(&z, 1), std::span(&label, 1))[0];
        std::vector<double> g(weights.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = dz * weights[i];
        }
        return g;
    }
};

// Forward pass in extended precision, written directly from the layer definitions. The
// full-model finite-difference reference uses it so that rounding in J(theta +- eps) stays
// far below the smallest gradients being checked. The network is a chain of stages (each
// conv block, then each dense layer); unperturbed stage inputs and pre-activations are
// cached so a perturbation only recomputes the output unit it touches and what follows.
using Ext = std::vector<long double>;

class ExtendedNet {
public:
    ExtendedNet(const Model& model) : model_(model) {
        if (const auto* cnn = std::get_if<CnnSpec>(&model.spec())) {
            pools_.assign(cnn->blocks.begin(), cnn->blocks.end());
        }
    }

    std::size_t stages() const { return model_.convs().size() + model_.dense().size(); }

    /// Stage owning flat parameter block `b` (blocks come in weight/bias pairs).
    static std::size_t stage_of_block(std::size_t b) { return b / 2; }

    /// Output unit (dense) or channel (conv) that parameter `i` of block `b` feeds.
    std::size_t unit_of(std::size_t b, std::size_t i) const {
        if (b % 2 == 1) {
            return i;
        }
        const std::size_t s = stage_of_block(b);
        if (is_conv(s)) {
            const auto& l = model_.convs()[s];
            return i / (l.in_channels * l.kernel_size);
        }
        return i / dense(s).in_dim;
    }

    /// Inputs and pre-activations of every stage for one standardized window.
    struct Trace {
        std::vector<Ext> inputs;
        std::vector<std::size_t> lengths; // per-channel length of each stage input
        std::vector<Ext> pre;
    };

    Trace trace(std::span<const double> standardized) const {
        Trace t;
        Ext x(standardized.begin(), standardized.end());
        std::size_t length = x.size();
        for (std::size_t s = 0; s < stages(); ++s) {
            t.inputs.push_back(x);
            t.lengths.push_back(length);
            t.pre.push_back(pre_activation(s, x, length));
            x = post(s, t.pre.back(), length);
        }
        return t;
    }

    /// Logit when only unit `unit` of stage `s` is recomputed from the cached input.
    long double logit_from(const Trace& t, std::size_t s, std::size_t unit) const {
        Ext pre = t.pre[s];
        recompute_unit(s, t.inputs[s], t.lengths[s], unit, pre);
        std::size_t length = t.lengths[s];
        Ext x = post(s, pre, length);
        for (std::size_t r = s + 1; r < stages(); ++r) {
            x = post(r, pre_activation(r, x, length), length);
        }
        return x[0];
    }

private:
    bool is_conv(std::size_t s) const { return s < model_.convs().size(); }
    const DenseLayer& dense(std::size_t s) const { return model_.dense()[s - model_.convs().size()]; }

    Ext pre_activation(std::size_t s, const Ext& x, std::size_t length) const {
        Ext pre;
        if (is_conv(s)) {
            const auto& l = model_.convs()[s];
            pre.resize(l.out_channels * (length - l.kernel_size + 1));
            for (std::size_t o = 0; o < l.out_channels; ++o) {
                recompute_unit(s, x, length, o, pre);
            }
        } else {
            pre.resize(dense(s).out_dim);
            for (std::size_t o = 0; o < pre.size(); ++o) {
                recompute_unit(s, x, length, o, pre);
            }
        }
        return pre;
    }

    void recompute_unit(std::size_t s, const Ext& x, std::size_t length, std::size_t o, Ext& pre) const {
        if (is_conv(s)) {
            const auto& l = model_.convs()[s];
            const std::size_t out_len = length - l.kernel_size + 1;
            for (std::size_t t = 0; t < out_len; ++t) {
                long double acc = l.bias[o];
                for (std::size_t c = 0; c < l.in_channels; ++c) {
                    for (std::size_t i = 0; i < l.kernel_size; ++i) {
                        acc += static_cast<long double>(l.weight(o, c, i)) * x[c * length + t + i];
                    }
                }
                pre[o * out_len + t] = acc;
            }
            return;
        }
        const auto& l = dense(s);
        long double acc = l.bias[o];
        for (std::size_t i = 0; i < l.in_dim; ++i) {
            acc += static_cast<long double>(l.weight(o, i)) * x[i];
        }
        pre[o] = acc;
    }

    // ReLU then max-pool for conv stages, ReLU for hidden dense layers, identity at the output.
    Ext post(std::size_t s, const Ext& pre, std::size_t& length) const {
        if (s + 1 == stages()) {
            return pre;
        }
        Ext act(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) {
            act[i] = pre[i] > 0.0L ? pre[i] : 0.0L;
        }
        if (!is_conv(s)) {
            return act;
        }
        const auto& l = model_.convs()[s];
        const auto& blk = pools_[s];
        const std::size_t conv_len = pre.size() / l.out_channels;
        const std::size_t pool_len = (conv_len - blk.pool_width) / blk.pool_stride + 1;
        Ext pooled(l.out_channels * pool_len);
        for (std::size_t o = 0; o < l.out_channels; ++o) {
            for (std::size_t t = 0; t < pool_len; ++t) {
                long double best = act[o * conv_len + t * blk.pool_stride];
                for (std::size_t j = 1; j < blk.pool_width; ++j) {
                    best = std::max(best, act[o * conv_len + t * blk.pool_stride + j]);
                }
                pooled[o * pool_len + t] = best;
            }
        }
        length = pool_len;
        return pooled;
    }

    const Model& model_;
    std::vector<ConvBlockSpec> pools_;
};

/// Stable BCE of sigmoid(z) against y in extended precision.
long double extended_bce(long double z, double y) {
    const long double softplus = std::max(z, 0.0L) + std::log1p(std::exp(-std::abs(z)));
    return softplus - static_cast<long double>(y) * z;
}

// Central differences over every entry; `loss(b, i)` evaluates J with entry i of block b perturbed.
template <typename Loss>
GradCheckResult central_differences(const std::vector<std::span<double>>& params,
                                    const std::vector<std::vector<double>>& analytic, const Loss& loss,
                                    const std::string& label, double eps) {
    if (params.size() != analytic.size()) {
        throw ShapeError("gradient check: parameter and gradient block counts differ");
    }
    GradCheckResult result;
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto block = params[b];
        if (block.size() != analytic[b].size()) {
            throw ShapeError("gradient check: block " + std::to_string(b) + " size mismatch");
        }
        for (std::size_t i = 0; i < block.size(); ++i) {
            const double saved = block[i];
            block[i] = saved + eps;
            const long double up = loss(b, i);
            block[i] = saved - eps;
            const long double down = loss(b, i);
            block[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw Error("gradient check: non-finite loss while perturbing " + label);
            }
            // The perturbation actually applied is (saved + eps) - (saved - eps) after rounding.
            const long double step = static_cast<long double>(saved + eps) - static_cast<long double>(saved - eps);
            const double numeric = static_cast<double>((up - down) / step);
            const double err = relative_error(analytic[b][i], numeric);
            ++result.checked;
            if (err > result.max_relative_error || result.worst.empty()) {
                result.max_relative_error = std::max(result.max_relative_error, err);
                result.worst = label + " block " + std::to_string(b) + " index " + std::to_string(i) +
                               " analytic " + std::to_string(analytic[b][i]) + " numeric " + std::to_string(numeric);
            }
        }
    }
    return result;
}

} // namespace

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

void GradCheckResult::absorb(const GradCheckResult& other) {
    checked += other.checked;
    if (other.max_relative_error > max_relative_error) {
        max_relative_error = other.max_relative_error;
        worst = other.worst;
    }
}

GradCheckResult finite_difference_check(const std::vector<std::span<double>>& params,
                                        const std::vector<std::vector<double>>& analytic,
                                        const std::function<long double()>& loss, const std::string& label, double eps) {
    return central_differences(params, analytic, [&](std::size_t, std::size_t) { return loss(); }, label, eps);
}

GradCheckResult check_conv_layer(const ConvLayer& layer, const Tensor1& input, std::uint64_t seed) {
    ConvLayer l = layer;
    Tensor1 x = input;
    const Probe probe(conv_forward(x, l).size(), seed);
    auto loss = [&] { return probe.loss(conv_forward(x, l).values); };

    const auto out = conv_forward(x, l);
    const Tensor1 g(out.channels, out.length, probe.grad(out.values));
    const auto back = conv_backward(x, l, g);
    return finite_difference_check({l.weights, l.bias, x.values},
                                   {back.params.weights, back.params.bias, back.input_grad.values}, loss, "conv");
}

GradCheckResult check_relu(const Tensor1& input, std::uint64_t seed) {
    Tensor1 x = input;
    const Probe probe(x.size(), seed);
    auto loss = [&] { return probe.loss(relu_forward(x).values); };
    const auto out = relu_forward(x);
    const Tensor1 g(out.channels, out.length, probe.grad(out.values));
    return finite_difference_check({x.values}, {relu_backward(x, g).values}, loss, "relu");
}

GradCheckResult check_maxpool(const Tensor1& input, std::size_t width, std::size_t stride, std::uint64_t seed) {
    Tensor1 x = input;
    auto [out, rec] = maxpool_forward(x, width, stride);
    const Probe probe(out.size(), seed);
    auto loss = [&] { return probe.loss(maxpool_forward(x, width, stride).first.values); };
    const Tensor1 g(out.channels, out.length, probe.grad(out.values));
    return finite_difference_check({x.values}, {maxpool_backward(rec, g).values}, loss, "maxpool");
}

GradCheckResult check_dense_layer(const DenseLayer& layer, std::span<const double> input, std::uint64_t seed) {
    DenseLayer l = layer;
    std::vector<double> x(input.begin(), input.end());
    const Probe probe(l.out_dim, seed);
    auto loss = [&] { return probe.loss(dense_forward(x, l)); };
    const auto out = dense_forward(x, l);
    const auto back = dense_backward(x, l, probe.grad(out));
    return finite_difference_check({l.weights, l.bias, x}, {back.params.weights, back.params.bias, back.input_grad},
                                   loss, "dense");
}

GradCheckResult check_sigmoid_bce(std::span<const double> logits, std::span<const double> labels) {
    std::vector<double> z(logits.begin(), logits.end());
    auto loss = [&] { return bce_from_logits(z, labels); };
    return finite_difference_check({z}, {sigmoid_bce_backward(z, labels)}, loss, "sigmoid+bce");
}

GradCheckResult grad_check(const Model& model, std::span<const wave::Window> windows, const GradientTamper& tamper) {
    if (windows.empty()) {
        throw ShapeError("gradient check needs at least one window");
    }
    Model probe = model;
    const double m = static_cast<double>(windows.size());
    auto label_of = [](const wave::Window& w) { return w.label == wave::Label::Hif ? 1.0 : 0.0; };

    std::vector<double> flat(probe.parameter_count(), 0.0);
    for (const auto& w : windows) {
        probe.accumulate_gradient(w.samples, label_of(w), flat);
    }
    for (double& g : flat) {
        g /= m;
    }
    if (tamper) {
        tamper(flat);
    }

    auto blocks = probe.parameter_blocks();
    std::vector<std::vector<double>> analytic;
    std::size_t offset = 0;
    for (auto block : blocks) {
        analytic.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                              flat.begin() + static_cast<std::ptrdiff_t>(offset + block.size()));
        offset += block.size();
    }

    const ExtendedNet net(probe);
    std::vector<ExtendedNet::Trace> traces;
    for (const auto& w : windows) {
        traces.push_back(net.trace(standardize(w.samples)));
    }
    auto loss = [&](std::size_t b, std::size_t i) {
        const std::size_t stage = ExtendedNet::stage_of_block(b);
        const std::size_t unit = net.unit_of(b, i);
        long double total = 0.0L;
        for (std::size_t k = 0; k < windows.size(); ++k) {
            total += extended_bce(net.logit_from(traces[k], stage, unit), label_of(windows[k]));
        }
        return total / static_cast<long double>(windows.size());
    };
    return central_differences(blocks, analytic, loss, architecture_name(model.spec()), kGradCheckEpsilon);
}

GradCheckResult check_all_layers(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> small(1, 4);

    auto random_tensor = [&](std::size_t c, std::size_t l) {
        Tensor1 t(c, l);
        for (double& v : t.values) {
            // Keep inputs away from the ReLU kink so +-eps never crosses it.
            do {
                v = normal(rng);
            } while (std::abs(v) < 1e-3);
        }
        return t;
    };

    GradCheckResult total;
    {
        ConvLayer conv(small(rng), small(rng), small(rng) + 1);
        for (double& w : conv.weights) {
            w = normal(rng);
        }
        for (double& b : conv.bias) {
            b = normal(rng);
        }
        total.absorb(check_conv_layer(conv, random_tensor(conv.in_channels, 12), rng()));
    }
    total.absorb(check_relu(random_tensor(3, 10), rng()));
    total.absorb(check_maxpool(random_tensor(3, 11), 2, 2, rng()));
    total.absorb(check_maxpool(random_tensor(2, 9), 3, 1, rng()));
    {
        DenseLayer dense(7, 5);
        for (double& w : dense.weights) {
            w = normal(rng);
        }
        for (double& b : dense.bias) {
            b = normal(rng);
        }
        total.absorb(check_dense_layer(dense, random_tensor(1, 7).values, rng()));
    }
    {
        std::vector<double> logits{-2.0, -0.3, 0.0, 0.7, 3.1};
        std::vector<double> labels{0.0, 1.0, 1.0, 0.0, 1.0};
        total.absorb(check_sigmoid_bce(logits, labels));
    }
    return total;
}

} // namespace hifnet::nn
