#include "hifnet/network.hpp"

#include "hifnet/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace hifnet::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void add_into(std::span<double>& grad, std::size_t& offset, const std::vector<double>& g) {
    double* dst = grad.data() + offset;
    for (std::size_t i = 0; i < g.size(); ++i) {
        dst[i] += g[i];
    }
    offset += g.size();
}

void require_finite(double v, const char* where) {
    if (!std::isfinite(v)) {
        throw DivergenceError(std::string("non-finite value in ") + where, -1, -1);
    }
}

// ReLU maps NaN to zero, so a non-finite input has to be caught before the first layer.
std::vector<double> standardized_input(std::span<const double> window) {
    auto x = standardize(window);
    for (double v : x) {
        require_finite(v, "input window");
    }
    return x;
}

} // namespace

CnnSpec CnnSpec::defaults() {
    CnnSpec s;
    s.blocks = {{{8, 7, 2, 2}, {16, 5, 2, 2}, {32, 5, 2, 2}, {32, 3, 2, 2}}};
    s.hidden_dim = 64;
    return s;
}

MlpSpec MlpSpec::defaults() { return MlpSpec{}; }

std::string architecture_name(const ModelSpec& spec) {
    return std::holds_alternative<CnnSpec>(spec) ? "cnn" : "mlp";
}

std::string canonical_string(const ModelSpec& spec) {
    std::ostringstream os;
    std::visit(overloaded{[&](const CnnSpec& s) {
                              os << "cnn:in=" << s.input_length;
                              for (std::size_t b = 0; b < s.blocks.size(); ++b) {
                                  const auto& blk = s.blocks[b];
                                  os << ";b" << b << '=' << blk.out_channels << ',' << blk.kernel_size << ','
                                     << blk.pool_width << ',' << blk.pool_stride;
                              }
                              os << ";hidden=" << s.hidden_dim << ";out=" << s.output_dim;
                          },
                          [&](const MlpSpec& s) {
                              os << "mlp:";
                              for (std::size_t i = 0; i < s.dims.size(); ++i) {
                                  os << (i ? "-" : "") << s.dims[i];
                              }
                          }},
               spec);
    return os.str();
}

std::uint64_t fingerprint(const ModelSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_string(spec)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::size_t> feature_lengths(const CnnSpec& spec) {
    std::vector<std::size_t> lengths{spec.input_length};
    std::size_t len = spec.input_length;
    for (const auto& b : spec.blocks) {
        len = conv_output_length(len, b.kernel_size);
        lengths.push_back(len);
        len = pool_output_length(len, b.pool_width, b.pool_stride);
        lengths.push_back(len);
    }
    return lengths;
}

void validate(const ModelSpec& spec) {
    std::visit(overloaded{[](const CnnSpec& s) {
                              if (s.input_length == 0 || s.hidden_dim == 0) {
                                  throw ConfigError("cnn input_length and hidden_dim must be positive");
                              }
                              if (s.output_dim != 1) {
                                  throw ConfigError("cnn output must be a single sigmoid unit");
                              }
                              for (const auto& b : s.blocks) {
                                  if (b.out_channels == 0 || b.kernel_size == 0 || b.pool_width == 0 ||
                                      b.pool_stride == 0) {
                                      throw ConfigError("cnn block dimensions must be positive");
                                  }
                              }
                              const auto lengths = feature_lengths(s);
                              for (std::size_t i = 1; i < lengths.size(); ++i) {
                                  if (lengths[i] < 1) {
                                      throw ConfigError("cnn shape algebra collapses to length 0 at stage " +
                                                        std::to_string(i) + " (" + canonical_string(s) + ")");
                                  }
                              }
                          },
                          [](const MlpSpec& s) {
                              for (auto d : s.dims) {
                                  if (d == 0) {
                                      throw ConfigError("mlp layer widths must be positive");
                                  }
                              }
                              if (s.dims.back() != 1) {
                                  throw ConfigError("mlp output must be a single sigmoid unit");
                              }
                          }},
               spec);
}

std::size_t parameter_count(const ModelSpec& spec) { return Model::zeros(spec).parameter_count(); }

std::vector<double> standardize(std::span<const double> samples) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) {
        mean += v;
    }
    mean /= n;
    double var = 0.0;
    for (double v : samples) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::max(std::sqrt(var / n), 1e-8);
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = (samples[i] - mean) / sd;
    }
    return out;
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)), init_seed_(seed) {
    validate(spec_);
    std::visit(overloaded{[this](const CnnSpec& s) {
                              std::size_t in = 1;
                              for (const auto& b : s.blocks) {
                                  convs_.emplace_back(b.out_channels, in, b.kernel_size);
                                  in = b.out_channels;
                              }
                              const std::size_t flat = in * feature_lengths(s).back();
                              dense_.emplace_back(flat, s.hidden_dim);
                              dense_.emplace_back(s.hidden_dim, s.output_dim);
                          },
                          [this](const MlpSpec& s) {
                              for (std::size_t i = 0; i + 1 < s.dims.size(); ++i) {
                                  dense_.emplace_back(s.dims[i], s.dims[i + 1]);
                              }
                          }},
               spec_);
}

Model Model::zeros(const ModelSpec& spec) { return Model(spec, 0); }

Model Model::build(const ModelSpec& spec, std::uint64_t init_seed) {
    Model m(spec, init_seed);
    std::mt19937_64 rng(init_seed);
    auto fill = [&rng](std::vector<double>& w, std::size_t fan_in, double gain) {
        std::normal_distribution<double> dist(0.0, std::sqrt(gain / static_cast<double>(fan_in)));
        for (double& v : w) {
            v = dist(rng);
        }
    };
    for (auto& c : m.convs_) {
        fill(c.weights, c.in_channels * c.kernel_size, 2.0);
    }
    for (std::size_t i = 0; i < m.dense_.size(); ++i) {
        const bool output_layer = i + 1 == m.dense_.size();
        fill(m.dense_[i].weights, m.dense_[i].in_dim, output_layer ? 1.0 : 2.0);
    }
    return m;
}

std::size_t Model::parameter_count() const {
    return conv_parameter_count() +
           std::accumulate(dense_.begin(), dense_.end(), std::size_t{0},
                           [](std::size_t acc, const DenseLayer& d) { return acc + d.parameter_count(); });
}

std::size_t Model::conv_parameter_count() const {
    return std::accumulate(convs_.begin(), convs_.end(), std::size_t{0},
                           [](std::size_t acc, const ConvLayer& c) { return acc + c.parameter_count(); });
}

std::vector<std::span<double>> Model::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    for (auto& c : convs_) {
        blocks.emplace_back(c.weights);
        blocks.emplace_back(c.bias);
    }
    for (auto& d : dense_) {
        blocks.emplace_back(d.weights);
        blocks.emplace_back(d.bias);
    }
    return blocks;
}

std::vector<std::span<const double>> Model::parameter_blocks() const {
    std::vector<std::span<const double>> blocks;
    for (const auto& c : convs_) {
        blocks.emplace_back(c.weights);
        blocks.emplace_back(c.bias);
    }
    for (const auto& d : dense_) {
        blocks.emplace_back(d.weights);
        blocks.emplace_back(d.bias);
    }
    return blocks;
}

std::vector<double> Model::flat_parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (auto block : parameter_blocks()) {
        flat.insert(flat.end(), block.begin(), block.end());
    }
    return flat;
}

void Model::set_flat_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ShapeError("flat parameter vector has " + std::to_string(flat.size()) + " values, model needs " +
                         std::to_string(parameter_count()));
    }
    std::size_t offset = 0;
    for (auto block : parameter_blocks()) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), block.size(), block.begin());
        offset += block.size();
    }
}

double Model::logit(std::span<const double> window) const {
    const auto r = is_cnn() ? cnn_pass(window, 0.0, {}) : mlp_pass(window, 0.0, {});
    require_finite(r.logit, "model output");
    return r.logit;
}

double Model::forward(std::span<const double> window) const { return sigmoid(logit(window)); }

double Model::accumulate_gradient(std::span<const double> window, double label, std::span<double> grad) const {
    if (grad.size() != parameter_count()) {
        throw ShapeError("gradient buffer does not match the model's parameter count");
    }
    const auto r = is_cnn() ? cnn_pass(window, label, grad) : mlp_pass(window, label, grad);
    require_finite(r.loss, "loss");
    return r.loss;
}

Model::PassResult Model::cnn_pass(std::span<const double> window, double label, std::span<double> grad) const {
    const auto& spec = std::get<CnnSpec>(spec_);
    if (window.size() != spec.input_length) {
        throw ShapeError("window has " + std::to_string(window.size()) + " samples, model expects " +
                         std::to_string(spec.input_length));
    }

    struct BlockCache {
        Tensor1 input;
        Tensor1 pre_activation;
        PoolRecord pool;
    };
    std::vector<BlockCache> cache(convs_.size());

    Tensor1 x(1, window.size(), standardized_input(window));
    for (std::size_t b = 0; b < convs_.size(); ++b) {
        auto& c = cache[b];
        c.input = std::move(x);
        c.pre_activation = conv_forward(c.input, convs_[b]);
        auto [pooled, rec] = maxpool_forward(relu_forward(c.pre_activation), spec.blocks[b].pool_width,
                                             spec.blocks[b].pool_stride);
        c.pool = std::move(rec);
        x = std::move(pooled);
    }

    const std::vector<double>& flat = x.values;
    const auto hidden_pre = dense_forward(flat, dense_[0]);
    std::vector<double> hidden(hidden_pre.size());
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        hidden[i] = hidden_pre[i] > 0.0 ? hidden_pre[i] : 0.0;
    }
    const double z = dense_forward(hidden, dense_[1])[0];
    PassResult result{z, 0.0};
    if (grad.empty()) {
        return result;
    }

    const double y = label;
    result.loss = bce_from_logits(std::span(&z, 1), std::span(&y, 1));
    const auto dz = sigmoid_bce_backward(std::span(&z, 1), std::span(&y, 1));

    auto head = dense_backward(hidden, dense_[1], dz);
    for (std::size_t i = 0; i < hidden_pre.size(); ++i) {
        if (!(hidden_pre[i] > 0.0)) {
            head.input_grad[i] = 0.0;
        }
    }
    auto fc = dense_backward(flat, dense_[0], head.input_grad);

    // Dense gradients sit after every conv parameter in the flat layout.
    std::size_t offset = conv_parameter_count();
    add_into(grad, offset, fc.params.weights);
    add_into(grad, offset, fc.params.bias);
    add_into(grad, offset, head.params.weights);
    add_into(grad, offset, head.params.bias);

    Tensor1 upstream(x.channels, x.length, std::move(fc.input_grad));
    std::vector<std::size_t> block_offsets(convs_.size());
    for (std::size_t b = 0, off = 0; b < convs_.size(); ++b) {
        block_offsets[b] = off;
        off += convs_[b].parameter_count();
    }
    for (std::size_t b = convs_.size(); b-- > 0;) {
        const auto& c = cache[b];
        const auto d_act = maxpool_backward(c.pool, upstream);
        const auto d_pre = relu_backward(c.pre_activation, d_act);
        auto conv = conv_backward(c.input, convs_[b], d_pre);
        std::size_t off = block_offsets[b];
        add_into(grad, off, conv.params.weights);
        add_into(grad, off, conv.params.bias);
        upstream = std::move(conv.input_grad);
    }
    return result;
}

Model::PassResult Model::mlp_pass(std::span<const double> window, double label, std::span<double> grad) const {
    if (window.size() != dense_.front().in_dim) {
        throw ShapeError("window has " + std::to_string(window.size()) + " samples, model expects " +
                         std::to_string(dense_.front().in_dim));
    }
    // activations[i] is the input to dense_[i]; pre[i] its output before ReLU.
    std::vector<std::vector<double>> activations{standardized_input(window)};
    std::vector<std::vector<double>> pre;
    for (std::size_t i = 0; i < dense_.size(); ++i) {
        pre.push_back(dense_forward(activations.back(), dense_[i]));
        if (i + 1 < dense_.size()) {
            auto a = pre.back();
            for (double& v : a) {
                v = v > 0.0 ? v : 0.0;
            }
            activations.push_back(std::move(a));
        }
    }
    const double z = pre.back()[0];
    PassResult result{z, 0.0};
    if (grad.empty()) {
        return result;
    }

    const double y = label;
    result.loss = bce_from_logits(std::span(&z, 1), std::span(&y, 1));
    std::vector<double> upstream = sigmoid_bce_backward(std::span(&z, 1), std::span(&y, 1));

    std::vector<std::size_t> offsets(dense_.size());
    for (std::size_t i = 0, off = 0; i < dense_.size(); ++i) {
        offsets[i] = off;
        off += dense_[i].parameter_count();
    }
    for (std::size_t i = dense_.size(); i-- > 0;) {
        if (i + 1 < dense_.size()) {
            for (std::size_t j = 0; j < upstream.size(); ++j) {
                if (!(pre[i][j] > 0.0)) {
                    upstream[j] = 0.0;
                }
            }
        }
        auto back = dense_backward(activations[i], dense_[i], upstream);
        std::size_t off = offsets[i];
        add_into(grad, off, back.params.weights);
        add_into(grad, off, back.params.bias);
        upstream = std::move(back.input_grad);
    }
    return result;
}

} // namespace hifnet::nn
