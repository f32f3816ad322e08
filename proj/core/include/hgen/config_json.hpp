#pragma once

#include <nlohmann/json.hpp>

#include "hgen/ensemble.hpp"

namespace hgen {

/// Flat key-value echo of the model and training configuration. Keys match
/// the CLI config file schema; every key is always written so the echo
/// doubles as documentation of the effective run settings.
nlohmann::ordered_json configs_to_json(const ModelConfig& mc,
                                       const TrainConfig& tc);

/// Applies one flat config key. Returns false when the key is not a
/// model/train key (the caller decides whether that is an error).
bool apply_config_key(const std::string& key, const nlohmann::ordered_json& value,
                      ModelConfig& mc, TrainConfig& tc);

/// Applies a whole flat document; unknown keys are hard errors.
void configs_from_json(const nlohmann::ordered_json& j, ModelConfig& mc,
                       TrainConfig& tc);

}  // namespace hgen
