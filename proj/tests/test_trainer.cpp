#include "doctest.h"

#include "hifnet/dataset.hpp"
#include "hifnet/errors.hpp"
#include "hifnet/trainer.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace hifnet;
using namespace hifnet::train;

namespace {

nn::ModelSpec toy_mlp() {
    nn::MlpSpec s;
    s.dims = {8, 6, 4, 3, 1};
    return s;
}

wave::Window window(int shift, wave::Label label) {
    wave::Window w;
    w.samples.resize(8);
    for (std::size_t k = 0; k < 8; ++k) {
        w.samples[k] = std::sin(0.9 * static_cast<double>(k) + shift) * (label == wave::Label::Hif ? 3.0 : 1.0) +
                       (label == wave::Label::Hif ? static_cast<double>(k % 3) : 0.0);
    }
    w.label = label;
    w.generation_seed = static_cast<std::uint64_t>(shift);
    return w;
}

std::vector<wave::Window> toy_set(int n) {
    std::vector<wave::Window> out;
    for (int i = 0; i < n; ++i) out.push_back(window(i, i % 2 ? wave::Label::Normal : wave::Label::Hif));
    return out;
}

TrainConfig quick(int epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 4;
    c.seed = 3;
    return c;
}

} // namespace

TEST_CASE("zero learning rate leaves parameters unchanged") {
    const auto m = nn::Model::build(toy_mlp(), 1);
    auto c = quick(3);
    c.learning_rate = 0.0;
    const auto set = toy_set(8);
    const auto run = train_on(m, set, set, c);
    CHECK(run.model.flat_parameters() == m.flat_parameters());
    CHECK(run.records.size() == 3);
}

TEST_CASE("a single sample is memorized") {
    const std::vector<wave::Window> one{window(2, wave::Label::Hif)};
    auto c = quick(200);
    c.batch_size = 1;
    c.learning_rate = 0.05;
    nn::MlpSpec wide;
    wide.dims = {8, 32, 32, 32, 1};
    const auto run = train_on(nn::Model::build(wide, 4), one, one, c);
    CHECK(run.records.back().train_loss < 0.01);
    CHECK(measure(run.model, one).accuracy == 1.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto set = toy_set(16);
    const auto a = train_on(nn::Model::build(toy_mlp(), 2), set, set, quick(5));
    const auto b = train_on(nn::Model::build(toy_mlp(), 2), set, set, quick(5));
    CHECK(a.model == b.model);
    CHECK(curves_csv(a.records) == curves_csv(b.records));
    auto c = quick(5);
    c.seed = 4;
    CHECK(train_on(nn::Model::build(toy_mlp(), 2), set, set, c).model.flat_parameters() != a.model.flat_parameters());
}

TEST_CASE("train() holds out a stratified validation split") {
    auto g = wave::gen_profile("case1");
    g.count = 16;
    const auto d = wave::build_dataset(g, 5);
    auto c = quick(1);
    c.validation_fraction = 0.25;
    const auto run = hifnet::train::train(nn::Model::build(nn::MlpSpec::defaults(), 1), d, c);
    CHECK(run.records.size() == 1);
    CHECK(std::isfinite(run.records[0].val_loss));
}

TEST_CASE("fine_tune") {
    auto g = wave::gen_profile("case2");
    g.count = 12;
    const auto target = wave::build_dataset(g, 6);
    nn::CnnSpec s;
    s.blocks = {{{2, 7, 2, 2}, {2, 5, 2, 2}, {2, 5, 2, 2}, {2, 3, 2, 2}}};
    s.hidden_dim = 4;
    const nn::ModelSpec spec = s;
    const auto source = nn::Model::build(spec, 9);
    const auto ckpt = nn::make_checkpoint(source, {});

    SUBCASE("zero epochs returns the source parameters") {
        const auto run = fine_tune(ckpt, spec, target, quick(0));
        CHECK(run.model.flat_parameters() == source.flat_parameters());
        CHECK(run.records.empty());
        CHECK(run.convergence_epoch == 0);
    }
    SUBCASE("freeze_conv keeps conv blocks bit-equal and moves the head") {
        auto c = quick(2);
        c.freeze_conv = true;
        const auto run = fine_tune(ckpt, spec, target, c);
        for (std::size_t i = 0; i < source.convs().size(); ++i) {
            CHECK(run.model.convs()[i] == source.convs()[i]);
        }
        CHECK(run.model.dense()[0].weights != source.dense()[0].weights);
    }
    SUBCASE("unfrozen fine-tune moves the conv blocks") {
        const auto run = fine_tune(ckpt, spec, target, quick(2));
        CHECK(run.model.convs()[0].weights != source.convs()[0].weights);
    }
    SUBCASE("spec mismatch") {
        auto other = s;
        other.hidden_dim = 5;
        CHECK_THROWS_AS(fine_tune(ckpt, nn::ModelSpec{other}, target, quick(1)), FingerprintError);
    }
}

TEST_CASE("non-finite loss raises DivergenceError") {
    auto set = toy_set(4);
    set[1].samples[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train_on(nn::Model::build(toy_mlp(), 1), set, set, quick(1)), DivergenceError);
}

TEST_CASE("config validation") {
    auto c = quick(1);
    c.batch_size = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = quick(-1);
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = quick(1);
    c.momentum = 1.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK_NOTHROW(validate(quick(0)));
}

TEST_CASE("detect_convergence") {
    SUBCASE("flat curve converges at epoch 1") {
        const std::vector<double> v(20, 0.3);
        CHECK(detect_convergence(v) == 1);
    }
    SUBCASE("decreasing then flat converges where it flattens") {
        std::vector<double> v;
        for (int i = 0; i < 30; ++i) v.push_back(1.0 - 0.03 * i);
        for (int i = 0; i < 70; ++i) v.push_back(0.1);
        // 0.1 * 1.05 = 0.105 is first reached by 1 - 0.03 i at i = 30.
        CHECK(detect_convergence(v) == 31);
    }
    SUBCASE("a dip below the plateau does not count") {
        std::vector<double> v{0.9, 0.01, 0.8};
        for (int i = 0; i < 40; ++i) v.push_back(0.5);
        CHECK(detect_convergence(v) == 4);
    }
    SUBCASE("degenerate curves") {
        CHECK(detect_convergence(std::vector<double>{0.4}) == 1);
        CHECK(detect_convergence(std::vector<double>{}) == 0);
        // A run needs two epochs before a convergence epoch is reported.
        const auto set = toy_set(4);
        CHECK(train_on(nn::Model::build(toy_mlp(), 1), set, set, quick(1)).convergence_epoch == 0);
    }
}

TEST_CASE("curves csv") {
    std::vector<EpochRecord> r{{1, 0.5, 0.6, 0.75, 1.25}, {2, 0.25, 0.3, 1.0, 2.5}};
    const auto csv = curves_csv(r);
    CHECK(csv.rfind("epoch,train_loss,val_loss,val_accuracy,seconds\n", 0) == 0);
    CHECK(csv.find("1.25") == std::string::npos);
    CHECK(curves_csv(r, true).find("1.25") != std::string::npos);
}
