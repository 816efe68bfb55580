#pragma once

#include "hifnet/checkpoint.hpp"
#include "hifnet/dataset.hpp"
#include "hifnet/network.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hifnet::train {

struct EarlyStop {
    int patience = 10;
    double min_delta = 0.0;

    bool operator==(const EarlyStop&) const = default;
};

struct TrainConfig {
    int epochs = 150;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    double validation_fraction = 0.25;
    bool freeze_conv = false;
    std::optional<EarlyStop> early_stop;

    /// Defaults for each architecture (learning rate 0.01 CNN, 0.005 MLP).
    static TrainConfig defaults_for(const nn::ModelSpec& spec);

    bool operator==(const TrainConfig&) const = default;
};

/// Epochs may be 0 (a no-op run); everything else follows the usual bounds.
void validate(const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainingRun {
    std::vector<EpochRecord> records;
    nn::Model model;
    TrainConfig config;
    /// 1-based; 0 when fewer than two epochs were recorded.
    int convergence_epoch = 0;
};

/// Called after every epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Stratified validation split of `dataset` (validation_fraction), then train_on.
TrainingRun train(nn::Model model, const wave::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// SGD with momentum over seeded shuffled mini-batches.
/// Throws DivergenceError naming the epoch and batch on a non-finite loss.
TrainingRun train_on(nn::Model model, std::span<const wave::Window> train_set, std::span<const wave::Window> val_set,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Continues training from a checkpoint; freeze_conv keeps conv-block parameters fixed.
TrainingRun fine_tune(const nn::Checkpoint& checkpoint, const nn::ModelSpec& spec, const wave::Dataset& target,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Mean BCE loss and accuracy (threshold 0.5) of a model over a window set.
struct SetMetrics {
    double loss = 0.0;
    double accuracy = 0.0;
};
SetMetrics measure(const nn::Model& model, std::span<const wave::Window> windows);

/// Mean of per-sample gradients in fixed (index) order; returns the mean loss.
double batch_gradient(const nn::Model& model, std::span<const wave::Window> batch, std::span<double> grad);

/// First epoch (1-based) whose validation loss is within 5% (either side) of the
/// median over the final 10% of epochs.
int detect_convergence(std::span<const double> val_losses);
int detect_convergence(std::span<const EpochRecord> records);

/// CSV with columns epoch,train_loss,val_loss,val_accuracy,seconds. The seconds column is
/// left empty unless `with_wall_clock` is set, so repeated runs stay byte-identical.
std::string curves_csv(std::span<const EpochRecord> records, bool with_wall_clock = false);

} // namespace hifnet::train
