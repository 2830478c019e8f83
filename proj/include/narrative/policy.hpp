#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "narrative/rhirl.hpp"

namespace narrative {

enum class PolicyMode { Greedy, Sampled };

struct TrainedPolicy {
  RewardModel reward_model;
  int horizon = 1;
  double beta = 0.1;
  PolicyMode mode = PolicyMode::Greedy;
  std::uint64_t seed = 0;  // sampled mode only
};

/// Uniform double in [0,1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// Picks an action at `state`. Greedy mode takes the argmax of soft Q at depth
/// h (ties to canonical order); when `recent` is given, an argmax whose
/// successor equals one of those states is skipped for the next best distinct
/// action. Sampled mode draws from the Boltzmann policy using `rng`.
/// Throws TerminalState.
ActionInstance choose_action(const TrainedPolicy& p, const WorldSpec& world, const GameState& state,
                             std::mt19937_64* rng = nullptr, const std::vector<GameState>* recent = nullptr);

struct GeneratedTrace {
  std::vector<ActionInstance> actions;
  std::vector<int> plot_points_discovered;  // discovery order
  std::optional<int> end_reached;           // plot index of the ending
};

/// Runs choose_action + apply_action from the initial state until a terminal
/// state or `cap` actions. Sampled mode seeds its generator from p.seed.
GeneratedTrace rollout(const TrainedPolicy& p, const WorldSpec& world, int cap = 100);

}  // namespace narrative
