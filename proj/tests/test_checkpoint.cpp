#include "doctest.h"

#include "hifnet/binary_io.hpp"
#include "hifnet/checkpoint.hpp"
#include "hifnet/errors.hpp"
#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace hifnet;
using namespace hifnet::nn;

namespace {

std::vector<double> probe() {
    std::vector<double> w(300);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(0.05 * static_cast<double>(i)) * 30.0;
    return w;
}

} // namespace

TEST_CASE("checkpoint round trip is bit-identical") {
    oracle::TempDir dir;
    for (const ModelSpec& spec : {ModelSpec{CnnSpec::defaults()}, ModelSpec{MlpSpec::defaults()}}) {
        const auto m = Model::build(spec, 13);
        const TrainingMetadata meta{7, 0.25, 0.5, 99};
        const auto path = dir / (architecture_name(spec) + ".ckpt");
        save_checkpoint(m, meta, path);
        const auto ckpt = load_checkpoint(path);
        CHECK(ckpt.metadata == meta);
        CHECK(ckpt.init_seed == 13);
        CHECK(ckpt.architecture_fingerprint == fingerprint(spec));
        const auto back = model_from_checkpoint(ckpt);
        CHECK(back.flat_parameters() == m.flat_parameters());
        CHECK(back.forward(probe()) == m.forward(probe()));
        CHECK(encode_checkpoint(decode_checkpoint(io::read_file(path))) == io::read_file(path));
    }
}

TEST_CASE("restore_for_transfer") {
    const ModelSpec a = CnnSpec::defaults();
    const auto m = Model::build(a, 3);
    const auto ckpt = make_checkpoint(m, {});

    SUBCASE("same spec restores the source function") {
        const auto r = restore_for_transfer(ckpt, a);
        CHECK(r.forward(probe()) == m.forward(probe()));
    }
    SUBCASE("different spec is rejected") {
        auto other = CnnSpec::defaults();
        other.blocks[0].out_channels = 4;
        CHECK_THROWS_AS(restore_for_transfer(ckpt, ModelSpec{other}), FingerprintError);
        CHECK_THROWS_AS(restore_for_transfer(ckpt, ModelSpec{MlpSpec::defaults()}), FingerprintError);
    }
    SUBCASE("parameter count mismatch loads nothing") {
        auto bad = ckpt;
        bad.parameters.pop_back();
        CHECK_THROWS(restore_for_transfer(bad, a));
        CHECK_THROWS(model_from_checkpoint(bad));
    }
}

TEST_CASE("damaged checkpoint files") {
    const auto bytes = encode_checkpoint(make_checkpoint(Model::build(ModelSpec{MlpSpec::defaults()}, 1), {}));
    SUBCASE("truncated") {
        auto b = bytes;
        b.resize(b.size() - 40);
        CHECK_THROWS_AS(decode_checkpoint(b), DataError);
    }
    SUBCASE("flipped bit") {
        auto b = bytes;
        b[b.size() / 2] ^= 0x10;
        CHECK_THROWS_AS(decode_checkpoint(b), ChecksumError);
    }
    SUBCASE("empty") {
        CHECK_THROWS_AS(decode_checkpoint(std::vector<std::uint8_t>{}), DataError);
    }
    oracle::TempDir dir;
    CHECK_THROWS_AS(load_checkpoint(dir / "absent.ckpt"), DataError);
}
