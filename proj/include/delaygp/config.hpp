#pragma once

// JSON configuration files and the JSON trade-off report.

#include "delaygp/event_trigger.hpp"
#include "delaygp/experiments.hpp"

#include <string>

namespace delaygp {

/// Parses a JSON object into a configuration on top of the defaults.
/// Unknown keys, wrong value types and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Serializes every key understood by parse_config.
std::string dump_config(const ExperimentConfig& cfg);

std::string tradeoff_to_json(const TradeoffReport& report);
TradeoffReport tradeoff_from_json(const std::string& json_text);

}  // namespace delaygp
