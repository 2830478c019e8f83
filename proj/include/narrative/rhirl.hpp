#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "narrative/lookahead.hpp"

namespace narrative {

struct LearnerConfig {
  int horizon = 1;
  double beta = 0.1;
  int max_iterations = 10;
  double step_size = 0.1;
  bool backtracking = true;
  int max_halvings = 20;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct Demonstration {
  std::vector<std::pair<GameState, ActionInstance>> pairs;
  std::string source_trace_id;
};

struct TrainingRecord {
  LearnerConfig config;
  std::vector<double> log_likelihood;  // entry 0 is the initial value
  std::vector<double> step_size_used;  // 0 for the initial entry and rejected steps
  std::vector<double> seconds;         // wall clock per entry
  std::vector<double> final_weights;
};

struct ActionValues {
  std::vector<ActionInstance> actions;  // canonical engine order
  std::vector<double> values;
};

/// Q_depth(s, a) for every applicable action under the soft (Boltzmann
/// expectation) value recursion. Throws TerminalState.
ActionValues soft_q(const WorldSpec& world, const RewardModel& rm, const GameState& state, int depth, double beta);

/// pi(a) proportional to exp(beta * q(a)). Throws EmptyActionSet.
std::vector<double> boltzmann_policy(std::span<const double> q, double beta);

/// Log-likelihood of a demonstration set and its gradient in the reward
/// weights. Builds the lookahead graph once; evaluation is cheap afterwards.
class DemonstrationObjective {
 public:
  /// Throws DemonstrationMismatch if a demonstrated action is not applicable.
  DemonstrationObjective(const WorldSpec& world, const FeatureMap& fm, const std::vector<Demonstration>& demos,
                         int horizon);

  double log_likelihood(std::span<const double> w, double beta) const;
  double log_likelihood(std::span<const double> w, double beta, std::vector<double>& gradient) const;

  std::size_t pair_count() const { return targets_.size(); }
  const LookaheadGraph& graph() const { return *graph_; }

 private:
  struct Target {
    int slot;    // root slot in the graph
    int action;  // index among the root's actions
  };
  double evaluate(std::span<const double> w, double beta, std::vector<double>* gradient) const;

  std::unique_ptr<LookaheadGraph> graph_;
  std::vector<Target> targets_;
  std::size_t k_;
};

double log_likelihood(const WorldSpec& world, const RewardModel& rm, const std::vector<Demonstration>& demos,
                      const LearnerConfig& cfg);
std::vector<double> grad_log_likelihood(const WorldSpec& world, const RewardModel& rm,
                                        const std::vector<Demonstration>& demos, const LearnerConfig& cfg);

struct TrainingResult {
  RewardModel model;
  TrainingRecord record;
};

/// Projected gradient ascent from w = 0 with optional backtracking.
/// Throws std::invalid_argument on empty demonstrations.
TrainingResult train(const WorldSpec& world, const FeatureMap& fm, const std::vector<Demonstration>& demos,
                     const LearnerConfig& cfg);

struct GridKey {
  std::string group;
  int horizon;
  double beta;

  auto operator<=>(const GridKey&) const = default;
};

struct GridCell {
  std::optional<TrainingResult> result;
  std::string error;
};

struct GridOptions {
  LearnerConfig base;  // horizon and beta are overridden per cell
  unsigned jobs = 1;
  std::function<void(const GridKey&, const GridCell&)> on_cell_done;
};

/// Trains every (group, h, beta) cell independently. Failures are recorded
/// per cell and do not stop the grid.
std::map<GridKey, GridCell> run_grid(const WorldSpec& world, const FeatureMap& fm,
                                     const std::map<std::string, std::vector<Demonstration>>& groups,
                                     const std::vector<int>& horizons, const std::vector<double>& betas,
                                     const GridOptions& opts = {});

}  // namespace narrative
