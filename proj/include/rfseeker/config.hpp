#pragma once

// YAML experiment configuration: parsing with strict key checking, and the
// resolved dump written next to the outputs.

#include <string>
#include <string_view>

#include "rfseeker/experiment.hpp"

namespace rfseek {

/// Invalid configuration. `key` is the dotted key path, `line` the 1-based
/// line in the source text (0 when unknown).
class ConfigError : public ContractError {
public:
    ConfigError(std::string key, int line, const std::string& what);
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

/// Parses and validates a config document. Missing keys keep their defaults;
/// an empty document yields the default config.
[[nodiscard]] ExperimentConfig parse_config(std::string_view yaml,
                                            std::string_view origin = "<config>");

/// Reads and parses a config file.
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Every setting, defaults included, as a YAML document that parses back to
/// an equal config.
[[nodiscard]] std::string dump_config(const ExperimentConfig& cfg);

}  // namespace rfseek
