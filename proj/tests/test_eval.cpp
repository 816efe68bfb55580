#include "doctest.h"

#include "hifnet/errors.hpp"
#include "hifnet/eval.hpp"

#include <sstream>
#include <vector>

using namespace hifnet;
using namespace hifnet::eval;

namespace {

ConfusionMatrix counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
    ConfusionMatrix m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    return m;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("classify") {
    CHECK(classify(0.9) == wave::Label::Hif);
    CHECK(classify(0.5) == wave::Label::Normal);
    CHECK(classify(0.1) == wave::Label::Normal);
    CHECK(classify(0.3, 0.2) == wave::Label::Hif);
}

TEST_CASE("confusion matrix arithmetic") {
    CHECK(format_percent(counts(523, 3, 2, 509).accuracy()) == "99.52 %");
    CHECK(format_percent(counts(62, 6, 2, 92).accuracy()) == "95.06 %");
    CHECK(format_percent(counts(45, 23, 18, 76).accuracy()) == "74.69 %");

    ConfusionMatrix m;
    m.add(wave::Label::Hif, wave::Label::Hif);
    m.add(wave::Label::Normal, wave::Label::Hif);
    m.add(wave::Label::Hif, wave::Label::Normal);
    m.add(wave::Label::Normal, wave::Label::Normal);
    m.add(wave::Label::Normal, wave::Label::Normal);
    CHECK(m == counts(1, 1, 1, 2));
    CHECK(m.total() == 5);
    CHECK(m.accuracy() == doctest::Approx(0.6));
}

TEST_CASE("report recalls") {
    const auto r = make_report(counts(62, 6, 2, 92), "Transfer learning");
    CHECK(r.accuracy == doctest::Approx(154.0 / 162.0));
    CHECK(r.hif_recall == doctest::Approx(62.0 / 64.0));
    CHECK(r.normal_recall == doctest::Approx(92.0 / 98.0));
}

TEST_CASE("rendered table") {
    const std::vector<EvalReport> one{make_report(counts(523, 3, 2, 509), "CNN-based")};
    const auto t1 = render_table(one);
    CHECK(t1.find("CNN-based") != std::string::npos);
    CHECK(t1.find("99.52 %") != std::string::npos);

    const std::vector<EvalReport> two{make_report(counts(62, 6, 2, 92), "Transfer learning"),
                                      make_report(counts(45, 23, 18, 76), "Random initialization")};
    const auto t2 = render_table(two);
    CHECK(t2.find("95.06 %") != std::string::npos);
    CHECK(t2.find("74.69 %") != std::string::npos);
    CHECK(t2.find("Transfer learning") < t2.find("Random initialization"));
    // Same row structure regardless of column count.
    CHECK(count_lines(t1) == count_lines(t2));

    const auto csv = render_csv(two);
    CHECK(csv.rfind("model,tp,fp,fn,tn,accuracy\n", 0) == 0);
    CHECK(csv.find("Transfer learning,62,6,2,92,") != std::string::npos);
    CHECK(count_lines(csv) == 3);
}

TEST_CASE("evaluate rejects an empty set") {
    const auto m = nn::Model::build(nn::MlpSpec::defaults(), 1);
    CHECK_THROWS_AS(evaluate(m, std::vector<wave::Window>{}), ConfigError);
}
