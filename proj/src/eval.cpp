#include "hifnet/eval.hpp"

#include "hifnet/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <vector>

namespace hifnet::eval {

wave::Label classify(double probability, double threshold) {
    return probability > threshold ? wave::Label::Hif : wave::Label::Normal;
}

void ConfusionMatrix::add(wave::Label actual, wave::Label predicted) {
    const bool is_hif = actual == wave::Label::Hif;
    const bool said_hif = predicted == wave::Label::Hif;
    if (is_hif) {
        ++(said_hif ? tp : fn);
    } else {
        ++(said_hif ? fp : tn);
    }
}

double ConfusionMatrix::accuracy() const {
    const auto n = total();
    return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

EvalReport make_report(const ConfusionMatrix& matrix, std::string model_name, std::string dataset_id,
                       std::uint64_t model_fingerprint, double threshold) {
    EvalReport r;
    r.model_name = std::move(model_name);
    r.matrix = matrix;
    r.accuracy = matrix.accuracy();
    r.hif_recall = matrix.actual_hif() ? static_cast<double>(matrix.tp) / static_cast<double>(matrix.actual_hif()) : 0.0;
    r.normal_recall =
        matrix.actual_normal() ? static_cast<double>(matrix.tn) / static_cast<double>(matrix.actual_normal()) : 0.0;
    r.dataset_id = std::move(dataset_id);
    r.model_fingerprint = model_fingerprint;
    r.threshold = threshold;
    return r;
}

EvalReport evaluate(const nn::Model& model, std::span<const wave::Window> test_set, double threshold,
                    std::string model_name, std::string dataset_id) {
    if (test_set.empty()) {
        throw ConfigError("evaluation needs a non-empty test set");
    }
    ConfusionMatrix m;
    for (const auto& w : test_set) {
        m.add(w.label, classify(model.forward(w.samples), threshold));
    }
    return make_report(m, std::move(model_name), std::move(dataset_id), nn::fingerprint(model.spec()), threshold);
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f %%", 100.0 * fraction);
    return buf;
}

std::string render_table(std::span<const EvalReport> reports) {
    struct Row {
        std::string label;
        std::vector<std::string> cells;
    };
    auto ratio = [](std::uint64_t num, std::uint64_t den) { return std::to_string(num) + "/" + std::to_string(den); };

    std::vector<Row> rows{{"", {}},
                          {"True Positive", {}},
                          {"False Positive", {}},
                          {"False Negative", {}},
                          {"True Negative", {}},
                          {"Accuracy", {}}};
    for (const auto& r : reports) {
        const auto& m = r.matrix;
        rows[0].cells.push_back(r.model_name);
        rows[1].cells.push_back(ratio(m.tp, m.actual_hif()));
        rows[2].cells.push_back(ratio(m.fp, m.actual_normal()));
        rows[3].cells.push_back(ratio(m.fn, m.actual_hif()));
        rows[4].cells.push_back(ratio(m.tn, m.actual_normal()));
        rows[5].cells.push_back(format_percent(r.accuracy));
    }

    std::size_t label_width = 0;
    for (const auto& row : rows) {
        label_width = std::max(label_width, row.label.size());
    }
    std::vector<std::size_t> widths(reports.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            widths[c] = std::max(widths[c], row.cells[c].size());
        }
    }

    std::ostringstream os;
    auto rule = [&](char ch) {
        std::size_t total = label_width;
        for (auto w : widths) {
            total += w + 3;
        }
        os << std::string(total, ch) << '\n';
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 1) {
            rule('-');
        }
        if (i == rows.size() - 1) {
            rule('=');
        }
        const auto& row = rows[i];
        os << row.label << std::string(label_width - row.label.size(), ' ');
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            const auto& cell = row.cells[c];
            const auto pad = widths[c] - cell.size();
            os << " | " << std::string(pad - pad / 2, ' ') << cell << std::string(pad / 2, ' ');
        }
        os << '\n';
    }
    return os.str();
}

std::string render_csv(std::span<const EvalReport> reports) {
    std::string out = "model,tp,fp,fn,tn,accuracy\n";
    char acc[32];
    for (const auto& r : reports) {
        std::snprintf(acc, sizeof acc, "%.6f", r.accuracy);
        out += r.model_name + "," + std::to_string(r.matrix.tp) + "," + std::to_string(r.matrix.fp) + "," +
               std::to_string(r.matrix.fn) + "," + std::to_string(r.matrix.tn) + "," + acc + "\n";
    }
    return out;
}

} // namespace hifnet::eval
