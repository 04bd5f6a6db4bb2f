#pragma once

// Aggregate configuration for the full pipeline, loaded from a single JSON
// file. Every random decision downstream flows from the one seed here via
// named sub-streams, so runs are reproducible byte for byte. Unknown JSON
// keys are a hard error to catch typos.

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "plenopose/dlv.hpp"
#include "plenopose/losses.hpp"
#include "plenopose/pose.hpp"

namespace plenopose {

struct PipelineConfig {
    std::uint64_t seed = 1;
    DlvConfig dlv;
    LikelihoodConfig likelihood;
    DiffusionConfig diffusion;
    TerminationConfig termination;
    LossConfig loss;

    // Throws ConfigError when any component config is invalid.
    void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Missing sections and keys keep their defaults; "seed" is required.
PipelineConfig config_from_json(const nlohmann::json& doc);

void store_config(const PipelineConfig& cfg,
                  const std::filesystem::path& path);
// Parses and validates; throws ConfigError on unknown keys, missing seed, or
// invalid values, ParseError on unreadable or malformed JSON.
PipelineConfig load_config(const std::filesystem::path& path);

// Human-readable list of every config key with its meaning and default,
// printed by the CLI help text.
std::string config_reference();

}  // namespace plenopose
