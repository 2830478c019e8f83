#include "narrative/policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "narrative/errors.hpp"

namespace narrative {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ActionInstance choose_action(const TrainedPolicy& p, const WorldSpec& world, const GameState& state,
                             std::mt19937_64* rng, const std::vector<GameState>* recent) {
  if (p.horizon < 1) throw std::invalid_argument("policy horizon must be >= 1");
  auto av = soft_q(world, p.reward_model, state, p.horizon, p.beta);
  if (av.actions.empty()) throw EmptyActionSet();

  if (p.mode == PolicyMode::Sampled) {
    if (!rng) throw std::invalid_argument("sampled policy needs a generator");
    auto pi = boltzmann_policy(av.values, p.beta);
    const double u = uniform01(*rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
      acc += pi[i];
      if (u < acc) return av.actions[i];
    }
    return av.actions.back();
  }

  std::vector<std::size_t> order(av.actions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return av.values[a] > av.values[b]; });
  if (!recent || recent->empty()) return av.actions[order.front()];
  for (std::size_t i : order) {
    const GameState next = successor(world, state, av.actions[i]);
    if (std::find(recent->begin(), recent->end(), next) == recent->end()) return av.actions[i];
  }
  return av.actions[order.front()];
}

GeneratedTrace rollout(const TrainedPolicy& p, const WorldSpec& world, int cap) {
  if (cap < 1) throw std::invalid_argument("rollout cap must be >= 1");
  GeneratedTrace out;
  std::mt19937_64 rng(p.seed);
  GameState state = initial_state(world);
  // current state plus the two before it
  std::vector<GameState> recent{state};
  while (static_cast<int>(out.actions.size()) < cap && !is_terminal(world, state)) {
    const auto action = choose_action(p, world, state, p.mode == PolicyMode::Sampled ? &rng : nullptr,
                                      p.mode == PolicyMode::Greedy ? &recent : nullptr);
    auto outcome = apply_action(world, state, action);
    out.actions.push_back(action);
    for (int plot : outcome.newly_visited_plot_points) out.plot_points_discovered.push_back(plot);
    state = std::move(outcome.next_state);
    recent.push_back(state);
    if (recent.size() > 3) recent.erase(recent.begin());
  }
  if (int e = ending_reached(world, state); e >= 0) out.end_reached = e;
  return out;
}

}  // namespace narrative
