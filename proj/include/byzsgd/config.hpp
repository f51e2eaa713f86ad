#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "byzsgd/simulator.hpp"

namespace byzsgd {

/// Raised when a config document fails to parse or validate; the message
/// names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json aggregator_to_json(const AggregatorSpec& spec);
AggregatorSpec aggregator_from_json(const nlohmann::json& j);

nlohmann::json attack_to_json(const AttackSpec& spec);
AttackSpec attack_from_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const ProblemConfig& p);
ProblemConfig problem_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Optional aggregator x attack grid carried alongside the base config.
struct ExperimentGrid {
    std::vector<AggregatorSpec> aggregators;  // empty -> base aggregator only
    std::vector<AttackSpec> attacks;          // empty -> base attack only
};

struct ConfigDocument {
    ExperimentConfig base;
    ExperimentGrid grid;
};

ConfigDocument parse_config_text(const std::string& text);
ConfigDocument load_config_file(const std::string& path);
std::string config_document_to_text(const ConfigDocument& doc);

}  // namespace byzsgd
