#include "doctest.h"

#include "hifnet/binary_io.hpp"
#include "hifnet/cli.hpp"
#include "hifnet/config.hpp"
#include "hifnet/dataset.hpp"
#include "oracles.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace hifnet;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "hifnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

// A small case1-style dataset config so CLI tests stay fast.
std::string small_gen(const oracle::TempDir& dir, std::size_t count) {
    auto c = wave::gen_profile("case1");
    c.count = count;
    const auto path = dir / "gen.json";
    write(path, config::to_json(c).dump());
    return path.string();
}

} // namespace

TEST_CASE("gen writes profile datasets and a replayable manifest") {
    oracle::TempDir dir;
    const auto d1 = (dir / "c2.dataset").string();
    REQUIRE(run({"gen", "--profile", "case2", "--out", d1}).code == 0);
    const auto data = wave::read_dataset(d1);
    CHECK(data.size() == 300);
    CHECK(data.scenario == wave::SystemId::TargetSystem);

    const auto manifest = d1 + ".manifest.json";
    REQUIRE(std::filesystem::exists(manifest));
    const auto r = run({"replay", manifest});
    CHECK(r.code == 0);
    CHECK(r.out.find("reproduced") != std::string::npos);

    SUBCASE("a tampered artifact fails replay") {
        auto j = config::load_json(manifest);
        j["artifacts"][d1] = "00000000";
        write(manifest, j.dump());
        CHECK(run({"replay", manifest}).code == 6);
    }
}

TEST_CASE("train, seed repeatability, finetune and eval") {
    oracle::TempDir dir;
    const auto data = (dir / "d.dataset").string();
    REQUIRE(run({"gen", "--config", small_gen(dir, 24), "--seed", "4", "--out", data}).code == 0);
    const auto train_part = (dir / "train.dataset").string();
    const auto test_part = (dir / "test.dataset").string();
    REQUIRE(run({"split", "--data", data, "--fraction", "0.5", "--seed", "2", "--train-out", train_part,
                 "--test-out", test_part})
                .code == 0);

    const auto a = (dir / "a.ckpt").string();
    const auto b = (dir / "b.ckpt").string();
    REQUIRE(run({"train", "--data", train_part, "--model", "cnn", "--epochs", "2", "--seed", "5", "--out", a}).code ==
            0);
    REQUIRE(run({"train", "--data", train_part, "--model", "cnn", "--epochs", "2", "--seed", "5", "--out", b}).code ==
            0);
    CHECK(io::read_file(a) == io::read_file(b));
    CHECK(io::read_file(a + ".curves.csv") == io::read_file(b + ".curves.csv"));

    const auto same = (dir / "same.ckpt").string();
    REQUIRE(run({"finetune", "--checkpoint", a, "--data", test_part, "--epochs", "0", "--out", same}).code == 0);
    CHECK(io::read_file(same) == io::read_file(a));

    const auto tuned = (dir / "tuned.ckpt").string();
    REQUIRE(run({"finetune", "--checkpoint", a, "--data", test_part, "--epochs", "1", "--freeze-conv", "--out",
                 tuned})
                .code == 0);

    const auto csv = (dir / "report.csv").string();
    const auto e = run({"eval", "--checkpoint", a, "--checkpoint", tuned, "--name", "before", "--name", "after",
                        "--data", test_part, "--out", csv});
    CHECK(e.code == 0);
    CHECK(e.out.find("before") != std::string::npos);
    CHECK(e.out.find(" %") != std::string::npos);
    CHECK(std::filesystem::exists(csv));

    SUBCASE("an mlp checkpoint evaluates on the same data") {
        const auto m = (dir / "m.ckpt").string();
        REQUIRE(run({"train", "--data", train_part, "--model", "mlp", "--epochs", "1", "--out", m}).code == 0);
        const auto r = run({"eval", "--checkpoint", m, "--data", test_part});
        CHECK(r.code == 0);
    }
}

TEST_CASE("error exit codes") {
    oracle::TempDir dir;
    SUBCASE("usage") {
        CHECK(run({}).code != 0);
        CHECK(run({"train"}).code != 0);
        CHECK(run({"replicate", "case9", "--out", (dir / "x").string()}).code == 1);
    }
    SUBCASE("eval on an empty dataset") {
        wave::Dataset empty;
        const auto path = (dir / "empty.dataset").string();
        wave::write_dataset(empty, path);
        const auto ck = (dir / "m.ckpt").string();
        nn::save_checkpoint(nn::Model::build(nn::MlpSpec::defaults(), 1), {}, ck);
        CHECK(run({"eval", "--checkpoint", ck, "--data", path}).code == 1);
    }
    SUBCASE("config") {
        const auto cfg = dir / "bad.json";
        write(cfg, R"({"scenario": "source", "count": 10, "bogus": 1})");
        CHECK(run({"gen", "--config", cfg.string(), "--out", (dir / "d").string()}).code == 2);
        write(cfg, "{not json");
        CHECK(run({"gen", "--config", cfg.string(), "--out", (dir / "d").string()}).code == 2);
    }
    SUBCASE("data") {
        const auto junk = dir / "junk.dataset";
        write(junk, "definitely not a dataset");
        CHECK(run({"train", "--data", junk.string(), "--out", (dir / "m").string()}).code == 3);
        CHECK(run({"train", "--data", (dir / "missing").string(), "--out", (dir / "m").string()}).code == 3);
    }
    SUBCASE("fingerprint") {
        const auto data = (dir / "d.dataset").string();
        REQUIRE(run({"gen", "--config", small_gen(dir, 8), "--out", data}).code == 0);
        auto other = nn::CnnSpec::defaults();
        other.hidden_dim = 16;
        const auto spec_path = dir / "spec.json";
        write(spec_path, config::to_json(nn::ModelSpec{other}).dump());
        const auto ck = (dir / "small.ckpt").string();
        REQUIRE(run({"train", "--data", data, "--model", spec_path.string(), "--epochs", "0", "--out", ck}).code == 0);
        const auto loaded = nn::load_checkpoint(ck);
        CHECK_THROWS_AS(nn::restore_for_transfer(loaded, nn::CnnSpec::defaults()), FingerprintError);
        CHECK(cli::exit_code_for(FingerprintError("x")) == cli::ExitCode::Fingerprint);
        CHECK(cli::exit_code_for(DivergenceError("x", 1, 2)) == cli::ExitCode::Divergence);
    }
}

TEST_CASE("gradcheck negative control") {
    const auto ok = run({"gradcheck", "--model", "mlp"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS") != std::string::npos);
    const auto bad = run({"gradcheck", "--model", "mlp", "--corrupt-backward"});
    CHECK(bad.code == 6);
    CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("replicate defaults") {
    const auto c1 = cli::replicate_defaults("case1", "out");
    CHECK(c1.at("gen").at("count") == 5000);
    CHECK(c1.at("train_fraction") == 0.8);
    const auto c2 = cli::replicate_defaults("case2", "out");
    CHECK(c2.at("gen").at("count") == 300);
    CHECK(c2.at("train_fraction") == 0.5);
    CHECK(c2.at("case1").at("out_dir").get<std::string>().find("case1") != std::string::npos);
}
