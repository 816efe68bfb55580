#pragma once

#include "hifnet/network.hpp"
#include "hifnet/waveform.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace hifnet::eval {

/// HIF iff probability > threshold; a probability equal to the threshold is NORMAL.
wave::Label classify(double probability, double threshold = 0.5);

/// Counts with HIF as the positive class.
struct ConfusionMatrix {
    std::uint64_t tp = 0; // actual HIF, predicted HIF
    std::uint64_t fp = 0; // actual NORMAL, predicted HIF
    std::uint64_t fn = 0; // actual HIF, predicted NORMAL
    std::uint64_t tn = 0; // actual NORMAL, predicted NORMAL

    void add(wave::Label actual, wave::Label predicted);
    std::uint64_t total() const { return tp + fp + fn + tn; }
    std::uint64_t actual_hif() const { return tp + fn; }
    std::uint64_t actual_normal() const { return fp + tn; }
    double accuracy() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

struct EvalReport {
    std::string model_name;
    ConfusionMatrix matrix;
    double accuracy = 0.0;
    double hif_recall = 0.0;
    double normal_recall = 0.0;
    std::string dataset_id;
    std::uint64_t model_fingerprint = 0;
    double threshold = 0.5;
};

EvalReport make_report(const ConfusionMatrix& matrix, std::string model_name, std::string dataset_id = {},
                       std::uint64_t model_fingerprint = 0, double threshold = 0.5);

/// Runs the model over every window. Throws ConfigError on an empty set.
EvalReport evaluate(const nn::Model& model, std::span<const wave::Window> test_set, double threshold = 0.5,
                    std::string model_name = {}, std::string dataset_id = {});

/// "99.52 %"
std::string format_percent(double fraction);

/// Side-by-side table, one column per report.
std::string render_table(std::span<const EvalReport> reports);

/// Columns model,tp,fp,fn,tn,accuracy.
std::string render_csv(std::span<const EvalReport> reports);

} // namespace hifnet::eval
