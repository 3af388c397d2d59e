#pragma once

// Flat run configuration:
//
//   # comment
//   [env]
//   code_length = 3
//   ...
//
// Sections: env, trainer, reward, expbase, extraction, run. Unknown sections
// or keys raise ConfigError naming the key.

#include <iosfwd>
#include <string>

#include "proact/trainer.hpp"

namespace proact {

struct RunConfig {
  EnvConfig env;
  TrainerConfig trainer;
  RewardWeights reward;
  ExpbaseConfig expbase;
  ExtractionConfig extraction;
  std::string out_dir = "run";
  std::string run_id = "run";

  void validate() const;
  EvolutionSetup setup() const { return {env, trainer, reward, expbase, extraction}; }
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);
/// Every key with its effective value, in a form parse_run_config accepts.
std::string to_text(const RunConfig& config);

}  // namespace proact
