#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "narrative/evaluation.hpp"

namespace narrative {

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
};

/// FNV-1a of the canonical (sorted-key) dump of `config`.
std::string config_digest(const nlohmann::json& config);
nlohmann::json manifest_to_json(const RunManifest& m);
std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now());

/// Expert traces that reach `ending_id`: sampled rollouts under the ending's
/// path reward, keeping the first `n` that end there. Candidate i uses the
/// same seed derivation as synthesize_expert_traces. Throws std::runtime_error if
/// fewer than n succeed within `max_candidates`.
struct ExpertSpec {
  std::string ending_id;
  int n = 5;
  double beta = 5.0;
  int horizon = 4;
  int cap = 100;
  std::uint64_t seed = 1;
  int max_candidates = 2000;
};

struct ExpertBatch {
  std::vector<Trace> traces;
  int candidates = 0;  // rollouts drawn to obtain them
};

ExpertBatch synthesize_ending_group(const WorldSpec& world, const FeatureMap& fm, const ExpertSpec& spec);

struct RecoveryResult {
  TrainingResult training;
  GeneratedTrace rollout;
  GroupReport report;
  ExpertBatch experts;
};

/// Synthesizes the expert group, trains on it, rolls out greedily and
/// compares against the demonstrations.
RecoveryResult run_expert_recovery(const WorldSpec& world, const ExpertSpec& spec, const LearnerConfig& cfg,
                                   int rollout_cap = 100);

}  // namespace narrative
