#include "doctest.h"

#include "hifnet/dataset.hpp"
#include "hifnet/gradcheck.hpp"
#include "hifnet/network.hpp"

#include <cmath>
#include <vector>

using namespace hifnet;
using namespace hifnet::nn;

namespace {

std::vector<wave::Window> toy_windows(std::size_t length) {
    std::vector<wave::Window> out;
    for (int i = 0; i < 3; ++i) {
        wave::Window w;
        w.samples.resize(length);
        for (std::size_t k = 0; k < length; ++k) {
            w.samples[k] = std::sin(0.7 * static_cast<double>(k) + i) + 0.1 * static_cast<double>(i * k % 5);
        }
        w.label = i % 2 == 0 ? wave::Label::Hif : wave::Label::Normal;
        out.push_back(w);
    }
    return out;
}

} // namespace

TEST_CASE("relative_error uses the floored max magnitude") {
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
    CHECK(relative_error(0.0, 0.0) == 0.0);
    CHECK(relative_error(1e-10, 0.0) == doctest::Approx(1e-2));
}

TEST_CASE("small dense model passes to 1e-6") {
    MlpSpec s;
    s.dims = {6, 5, 4, 3, 1};
    const auto m = Model::build(ModelSpec{s}, 2);
    const auto r = grad_check(m, toy_windows(6));
    CHECK(r.checked == m.parameter_count());
    CHECK(r.max_relative_error < 1e-6);
}

TEST_CASE("small CNN passes") {
    CnnSpec s;
    s.blocks = {{{2, 3, 2, 2}, {2, 2, 1, 1}, {3, 2, 2, 1}, {2, 1, 1, 1}}};
    s.hidden_dim = 4;
    s.input_length = 24;
    auto m = Model::build(ModelSpec{s}, 8);
    // Nonzero biases keep pre-activations off the ReLU kink, where the derivative is undefined.
    for (auto& c : m.convs()) {
        for (double& b : c.bias) b = 0.1;
    }
    for (auto& d : m.dense()) {
        for (double& b : d.bias) b = 0.05;
    }
    const auto r = grad_check(m, toy_windows(24));
    INFO(r.worst);
    CHECK(r.passed());
}

TEST_CASE("every layer type passes in isolation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto r = check_all_layers(seed);
        CHECK(r.checked > 0);
        CHECK(r.passed());
    }
}

TEST_CASE("zero weights leave only bias gradients") {
    DenseLayer l(3, 2);
    const std::vector<double> x{0.5, -1.0, 2.0};
    CHECK(check_dense_layer(l, x, 4).passed());
    ConvLayer c(2, 1, 3);
    CHECK(check_conv_layer(c, Tensor1(1, 6, 0.0), 5).passed());
}

TEST_CASE("sigmoid + BCE gradient") {
    const std::vector<double> z{-3.0, 0.0, 0.4, 5.0};
    const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
    CHECK(check_sigmoid_bce(z, y).passed());
}

TEST_CASE("a tampered gradient is caught") {
    MlpSpec s;
    s.dims = {6, 5, 4, 3, 1};
    const auto m = Model::build(ModelSpec{s}, 2);
    const auto r = grad_check(m, toy_windows(6), [](std::vector<double>& g) { g[0] = g[0] * 2.0 + 1.0; });
    CHECK_FALSE(r.passed());
    CHECK_FALSE(r.worst.empty());
}
