#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "narrative/features.hpp"

namespace narrative {

/// Finite-horizon expansion of the transition function below a set of root
/// states. Successor states are shared (the structure is a DAG keyed by state),
/// and everything stored is independent of the reward weights, so one graph
/// serves every likelihood and gradient evaluation of a training run.
class LookaheadGraph {
 public:
  LookaheadGraph(const WorldSpec& world, const FeatureMap& fm, int horizon);

  /// Registers a root; expands it `horizon` levels deep. Returns its node id.
  /// Throws TerminalState if the state is terminal.
  int add_root(const GameState& state);

  int horizon() const { return horizon_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t feature_count() const { return k_; }

  std::span<const ActionInstance> root_actions(int root) const;
  const GameState& state(int node) const { return states_[node]; }
  /// Successor node ids of an expanded node, aligned with root_actions.
  std::vector<int> children(int node) const;
  std::span<const double> features(int node) const { return {features_.data() + node * k_, k_}; }

  /// Q_h(root, a) for every applicable action, and optionally dQ/dw
  /// (row-major, actions x k).
  struct RootValues {
    std::vector<double> q;
    std::vector<double> dq;
  };

  /// Evaluates the soft value recursion for weights `w` and inverse temperature
  /// `beta`. Result is indexed like the roots passed to add_root, in order of
  /// registration (see roots()).
  std::vector<RootValues> evaluate(std::span<const double> w, double beta, bool with_gradient) const;

  const std::vector<int>& roots() const { return roots_; }

 private:
  struct Node {
    int edge_begin = 0;
    int edge_count = 0;
    int depth = -1;  // deepest recursion level required below this node
    bool terminal = false;
    bool expanded = false;
  };
  struct Edge {
    ActionInstance action;
    int child;
  };

  int intern(GameState&& state);
  void require_depth(int node, int depth);

  const WorldSpec& world_;
  const FeatureMap& fm_;
  int horizon_;
  std::size_t k_;
  std::vector<GameState> states_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<ActionInstance> actions_;  // mirrors edges_ for span access
  std::vector<double> features_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> roots_;
  std::unordered_map<int, int> root_slot_;
};

}  // namespace narrative
