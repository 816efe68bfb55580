#pragma once

#include "hifnet/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hifnet::nn {

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct TrainingMetadata {
    std::uint32_t epochs_trained = 0;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    std::uint64_t dataset_seed = 0;

    bool operator==(const TrainingMetadata&) const = default;
};

/// Serialized network parameters plus the spec they belong to.
struct Checkpoint {
    std::uint32_t format_version = kCheckpointFormatVersion;
    std::uint64_t architecture_fingerprint = 0;
    ModelSpec spec;
    std::uint64_t init_seed = 0;
    std::vector<double> parameters;
    TrainingMetadata metadata;

    bool operator==(const Checkpoint&) const = default;
};

Checkpoint make_checkpoint(const Model& model, const TrainingMetadata& metadata);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Model& model, const TrainingMetadata& metadata, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model stored in a checkpoint.
Model model_from_checkpoint(const Checkpoint& ckpt);

/// Model carrying the checkpoint's parameters, provided `target_spec` has the same
/// architecture fingerprint. Throws FingerprintError otherwise.
Model restore_for_transfer(const Checkpoint& ckpt, const ModelSpec& target_spec);

} // namespace hifnet::nn
