#include "hifnet/trainer.hpp"

#include "hifnet/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

namespace hifnet::train {

namespace {

using Clock = std::chrono::steady_clock;

double label_value(const wave::Window& w) { return w.label == wave::Label::Hif ? 1.0 : 0.0; }

template <typename Windows>
double accumulate_batch(const nn::Model& model, const Windows& batch, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (const wave::Window& w : batch) {
        loss += model.accumulate_gradient(w.samples, label_value(w), grad);
    }
    const double m = static_cast<double>(std::size(batch));
    for (double& g : grad) {
        g /= m;
    }
    return loss / m;
}

} // namespace

TrainConfig TrainConfig::defaults_for(const nn::ModelSpec& spec) {
    TrainConfig c;
    c.learning_rate = std::holds_alternative<nn::CnnSpec>(spec) ? 0.01 : 0.005;
    return c;
}

void validate(const TrainConfig& c) {
    if (c.epochs < 0) {
        throw ConfigError("epochs must be non-negative");
    }
    if (c.batch_size < 1) {
        throw ConfigError("batch_size must be at least 1");
    }
    if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
        throw ConfigError("learning_rate must be a non-negative finite number");
    }
    if (!(c.momentum >= 0.0 && c.momentum < 1.0)) {
        throw ConfigError("momentum must lie in [0, 1)");
    }
    if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
        throw ConfigError("validation_fraction must lie strictly between 0 and 1");
    }
    if (c.early_stop && c.early_stop->patience < 1) {
        throw ConfigError("early_stop.patience must be at least 1");
    }
}

double batch_gradient(const nn::Model& model, std::span<const wave::Window> batch, std::span<double> grad) {
    if (batch.empty()) {
        throw ShapeError("empty batch");
    }
    return accumulate_batch(model, batch, grad);
}

SetMetrics measure(const nn::Model& model, std::span<const wave::Window> windows) {
    if (windows.empty()) {
        throw ShapeError("cannot measure an empty window set");
    }
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& w : windows) {
        const double z = model.logit(w.samples);
        const double y = label_value(w);
        loss += nn::bce_from_logits(std::span(&z, 1), std::span(&y, 1));
        const bool predicted_hif = nn::sigmoid(z) > 0.5;
        correct += predicted_hif == (w.label == wave::Label::Hif) ? 1 : 0;
    }
    const double n = static_cast<double>(windows.size());
    return {loss / n, static_cast<double>(correct) / n};
}

TrainingRun train_on(nn::Model model, std::span<const wave::Window> train_set, std::span<const wave::Window> val_set,
                     const TrainConfig& config, const EpochCallback& on_epoch) {
    validate(config);
    if (train_set.empty() || val_set.empty()) {
        throw ConfigError("training needs non-empty training and validation sets");
    }

    const std::size_t n_params = model.parameter_count();
    const std::size_t frozen = config.freeze_conv ? model.conv_parameter_count() : 0;
    std::vector<double> grad(n_params, 0.0);
    std::vector<double> velocity(n_params, 0.0);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    wave::Rng shuffle_rng(wave::derive_seed(config.seed, 2));

    TrainingRun run{{}, model, config, 0};
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;
    std::vector<std::reference_wrapper<const wave::Window>> batch;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = Clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch.emplace_back(train_set[order[i]]);
            }
            double batch_loss = 0.0;
            try {
                batch_loss = accumulate_batch(model, batch, grad);
            } catch (const DivergenceError&) {
                batch_loss = std::numeric_limits<double>::quiet_NaN();
            }
            // Overflowing weights can leave the loss finite (ReLU zeroes NaN), so the gradient is checked too.
            if (!std::isfinite(batch_loss) ||
                !std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
                throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                          ", batch " + std::to_string(batch_index),
                                      epoch, batch_index);
            }
            loss_sum += batch_loss * static_cast<double>(stop - start);

            std::size_t offset = 0;
            for (auto block : model.parameter_blocks()) {
                for (std::size_t i = 0; i < block.size(); ++i, ++offset) {
                    if (offset < frozen) {
                        continue;
                    }
                    velocity[offset] = config.momentum * velocity[offset] - config.learning_rate * grad[offset];
                    block[i] += velocity[offset];
                }
            }
        }

        SetMetrics val;
        try {
            val = measure(model, val_set);
        } catch (const DivergenceError&) {
            throw DivergenceError("training diverged: non-finite validation output at epoch " +
                                      std::to_string(epoch),
                                  epoch, -1);
        }
        EpochRecord rec{epoch, loss_sum / static_cast<double>(train_set.size()), val.loss, val.accuracy,
                        std::chrono::duration<double>(Clock::now() - t0).count()};
        run.records.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }

        if (config.early_stop) {
            if (val.loss < best_val - config.early_stop->min_delta) {
                best_val = val.loss;
                epochs_since_best = 0;
            } else if (++epochs_since_best >= config.early_stop->patience) {
                break;
            }
        }
    }

    run.model = std::move(model);
    run.convergence_epoch = run.records.size() >= 2 ? detect_convergence(run.records) : 0;
    return run;
}

TrainingRun train(nn::Model model, const wave::Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    validate(config);
    if (dataset.empty()) {
        throw ConfigError("cannot train on an empty dataset");
    }
    auto [fit, val] = wave::split(dataset, 1.0 - config.validation_fraction, wave::derive_seed(config.seed, 1));
    return train_on(std::move(model), fit.windows, val.windows, config, on_epoch);
}

TrainingRun fine_tune(const nn::Checkpoint& checkpoint, const nn::ModelSpec& spec, const wave::Dataset& target,
                      const TrainConfig& config, const EpochCallback& on_epoch) {
    return train(nn::restore_for_transfer(checkpoint, spec), target, config, on_epoch);
}

int detect_convergence(std::span<const double> val_losses) {
    const std::size_t n = val_losses.size();
    if (n == 0) {
        return 0;
    }
    const std::size_t tail = std::max<std::size_t>(1, (n + 9) / 10);
    std::vector<double> last(val_losses.end() - static_cast<std::ptrdiff_t>(tail), val_losses.end());
    std::sort(last.begin(), last.end());
    const double median = tail % 2 == 1 ? last[tail / 2] : 0.5 * (last[tail / 2 - 1] + last[tail / 2]);
    // Two-sided band: a curve that climbs while overfitting has not settled until it
    // stops climbing, so approaching the terminal value from below counts too.
    const double band = 0.05 * std::abs(median);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(val_losses[i] - median) <= band) {
            return static_cast<int>(i + 1);
        }
    }
    return static_cast<int>(n);
}

int detect_convergence(std::span<const EpochRecord> records) {
    std::vector<double> losses;
    losses.reserve(records.size());
    for (const auto& r : records) {
        losses.push_back(r.val_loss);
    }
    return detect_convergence(losses);
}

std::string curves_csv(std::span<const EpochRecord> records, bool with_wall_clock) {
    std::string out = "epoch,train_loss,val_loss,val_accuracy,seconds\n";
    char line[160];
    for (const auto& r : records) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.6f,", r.epoch, r.train_loss, r.val_loss, r.val_accuracy);
        out += line;
        if (with_wall_clock) {
            std::snprintf(line, sizeof line, "%.4f", r.seconds);
            out += line;
        }
        out += '\n';
    }
    return out;
}

} // namespace hifnet::train
