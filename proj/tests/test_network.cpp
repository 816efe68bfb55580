#include "doctest.h"

#include "hifnet/errors.hpp"
#include "hifnet/network.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace hifnet;
using namespace hifnet::nn;

namespace {

std::vector<double> ramp(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::sin(0.1 * static_cast<double>(i)) * 100.0 + static_cast<double>(i % 7);
    }
    return w;
}

// Four single-channel blocks with kernel 1 and pool 1: each block is y = relu(w x + b).
CnnSpec toy_cnn(std::size_t length) {
    CnnSpec s;
    s.blocks = {{{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}};
    s.hidden_dim = 1;
    s.input_length = length;
    return s;
}

} // namespace

TEST_CASE("default shapes") {
    const auto cnn = CnnSpec::defaults();
    CHECK_NOTHROW(validate(cnn));
    const auto lens = feature_lengths(cnn);
    CHECK(lens.front() == 300);
    CHECK(lens[1] == 294);
    CHECK(lens[2] == 147);
    CHECK(lens.back() > 0);
    CHECK_NOTHROW(validate(MlpSpec::defaults()));
    CHECK(parameter_count(MlpSpec::defaults()) == 300 * 128 + 128 + 128 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
}

TEST_CASE("spec validation") {
    auto s = CnnSpec::defaults();
    s.input_length = 20;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = CnnSpec::defaults();
    s.blocks[2].kernel_size = 0;
    CHECK_THROWS_AS(validate(s), ConfigError);
    s = CnnSpec::defaults();
    s.output_dim = 2;
    CHECK_THROWS_AS(validate(s), ConfigError);
    MlpSpec m;
    m.dims[2] = 0;
    CHECK_THROWS_AS(validate(m), ConfigError);
    m = MlpSpec{};
    m.dims[4] = 3;
    CHECK_THROWS_AS(validate(m), ConfigError);
    CHECK_THROWS_AS(Model::build(ModelSpec{m}, 1), ConfigError);
}

TEST_CASE("fingerprint tracks the architecture") {
    const ModelSpec a = CnnSpec::defaults();
    auto b_spec = CnnSpec::defaults();
    b_spec.hidden_dim = 32;
    const ModelSpec b = b_spec;
    CHECK(fingerprint(a) == fingerprint(ModelSpec{CnnSpec::defaults()}));
    CHECK(fingerprint(a) != fingerprint(b));
    CHECK(fingerprint(a) != fingerprint(ModelSpec{MlpSpec::defaults()}));
    CHECK(architecture_name(a) == "cnn");
    CHECK(architecture_name(ModelSpec{MlpSpec::defaults()}) == "mlp");
}

TEST_CASE("initialization is seeded and He-scaled") {
    const ModelSpec spec = CnnSpec::defaults();
    CHECK(Model::build(spec, 5) == Model::build(spec, 5));
    CHECK(Model::build(spec, 5).flat_parameters() != Model::build(spec, 6).flat_parameters());

    const auto m = Model::build(spec, 5);
    for (const auto& c : m.convs()) {
        for (double b : c.bias) CHECK(b == 0.0);
    }
    for (const auto& d : m.dense()) {
        for (double b : d.bias) CHECK(b == 0.0);
    }

    SUBCASE("variance of a wide ReLU layer is close to 2 / fan_in") {
        MlpSpec wide;
        wide.dims = {300, 1200, 64, 32, 1};
        const auto mlp = Model::build(ModelSpec{wide}, 9);
        const auto& layer = mlp.dense()[1]; // 1200 -> 64, 76800 weights
        const double n = static_cast<double>(layer.weights.size());
        const double mean = std::accumulate(layer.weights.begin(), layer.weights.end(), 0.0) / n;
        double var = 0.0;
        for (double w : layer.weights) var += (w - mean) * (w - mean);
        var /= n - 1.0;
        CHECK(var == doctest::Approx(2.0 / 1200.0).epsilon(0.10));
    }
}

TEST_CASE("forward gives a deterministic probability") {
    for (const ModelSpec& spec : {ModelSpec{CnnSpec::defaults()}, ModelSpec{MlpSpec::defaults()}}) {
        const auto m = Model::build(spec, 3);
        const auto w = ramp(300);
        const double p = m.forward(w);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        CHECK(m.forward(w) == p);
        CHECK_THROWS_AS(m.forward(ramp(299)), ShapeError);
    }
}

TEST_CASE("toy CNN matches hand arithmetic") {
    const auto spec = toy_cnn(2);
    REQUIRE_NOTHROW(validate(ModelSpec{spec}));
    auto m = Model::zeros(ModelSpec{spec});
    REQUIRE(m.convs().size() == 4);
    const double w[4] = {2.0, 0.5, -1.0, 3.0};
    const double b[4] = {0.0, 0.25, 1.0, 0.0};
    for (std::size_t i = 0; i < 4; ++i) {
        m.convs()[i].weights = {w[i]};
        m.convs()[i].bias = {b[i]};
    }
    m.dense()[0].weights = {1.0, -2.0};
    m.dense()[0].bias = {0.5};
    m.dense()[1].weights = {1.5};
    m.dense()[1].bias = {-0.25};

    // The window [3, 1] standardizes to [1, -1].
    const std::vector<double> window{3.0, 1.0};
    CHECK(standardize(window) == std::vector<double>{1.0, -1.0});
    auto block = [](double x, double wi, double bi) { return std::max(0.0, wi * x + bi); };
    double f[2] = {1.0, -1.0};
    for (std::size_t i = 0; i < 4; ++i) {
        f[0] = block(f[0], w[i], b[i]);
        f[1] = block(f[1], w[i], b[i]);
    }
    const double hidden = std::max(0.0, 0.5 + 1.0 * f[0] - 2.0 * f[1]);
    const double logit = -0.25 + 1.5 * hidden;
    CHECK(m.logit(window) == doctest::Approx(logit).epsilon(1e-14));
    CHECK(m.forward(window) == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-14));
}

TEST_CASE("standardize floors the deviation") {
    const std::vector<double> flat(10, 4.0);
    for (double v : standardize(flat)) CHECK(v == 0.0);
    const auto z = standardize(ramp(300));
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / 300.0;
    CHECK(std::abs(mean) < 1e-12);
}

TEST_CASE("flat parameter layout round trips with conv blocks first") {
    auto m = Model::build(ModelSpec{CnnSpec::defaults()}, 4);
    const auto flat = m.flat_parameters();
    CHECK(flat.size() == m.parameter_count());
    CHECK(m.conv_parameter_count() < m.parameter_count());
    CHECK(flat[0] == m.convs()[0].weights[0]);
    CHECK(flat[m.conv_parameter_count()] == m.dense()[0].weights[0]);
    auto z = Model::zeros(m.spec());
    z.set_flat_parameters(flat);
    CHECK(z.flat_parameters() == flat);
    CHECK_THROWS_AS(z.set_flat_parameters(std::vector<double>(3)), ShapeError);
}
