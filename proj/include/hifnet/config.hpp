#pragma once

#include "hifnet/dataset.hpp"
#include "hifnet/network.hpp"
#include "hifnet/trainer.hpp"

#include "json.hpp"

#include <filesystem>
#include <string_view>

namespace hifnet::config {

using json = nlohmann::ordered_json;

/// Reads and parses a JSON document; parse failures become ConfigError.
json load_json(const std::filesystem::path& path);

// Generation config: {scenario, count, seed, ranges{...}, transient_mix{...}}.
// Unknown keys are rejected.
json to_json(const wave::GenConfig& c);
wave::GenConfig gen_config_from_json(const json& j);

// Model spec: {"architecture": "cnn", "blocks": [...], "hidden_dim": 64} or
// {"architecture": "mlp", "dims": [300, 128, 64, 32, 1]}.
json to_json(const nn::ModelSpec& spec);
nn::ModelSpec model_spec_from_json(const json& j);
/// "cnn" / "mlp" for the default architectures, otherwise a path to a spec document.
nn::ModelSpec resolve_model_spec(std::string_view name_or_path);

// Training config; keys absent from `j` keep their value from `base`.
json to_json(const train::TrainConfig& c);
train::TrainConfig train_config_from_json(const json& j, train::TrainConfig base);

} // namespace hifnet::config
