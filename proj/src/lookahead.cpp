#include "narrative/lookahead.hpp"

#include <algorithm>

#include "narrative/errors.hpp"
#include "narrative/kernels.hpp"

namespace narrative {

LookaheadGraph::LookaheadGraph(const WorldSpec& world, const FeatureMap& fm, int horizon)
    : world_(world), fm_(fm), horizon_(horizon), k_(fm.size()) {
  if (horizon < 1) throw std::invalid_argument("lookahead horizon must be >= 1");
}

int LookaheadGraph::intern(GameState&& state) {
  auto key = state.key();
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.terminal = is_terminal(world_, state);
  nodes_.push_back(node);
  features_.resize(features_.size() + k_);
  fm_.evaluate(world_, state, std::span<double>(features_.data() + id * k_, k_));
  states_.push_back(std::move(state));
  index_.emplace(std::move(key), id);
  return id;
}

void LookaheadGraph::require_depth(int node, int depth) {
  if (nodes_[node].depth >= depth) return;
  nodes_[node].depth = depth;
  if (depth < 1 || nodes_[node].terminal) return;
  if (!nodes_[node].expanded) {
    auto acts = applicable_actions(world_, states_[node]);
    std::vector<int> kids;
    kids.reserve(acts.size());
    for (const auto& a : acts) kids.push_back(intern(successor(world_, states_[node], a)));
    nodes_[node].edge_begin = static_cast<int>(edges_.size());
    nodes_[node].edge_count = static_cast<int>(acts.size());
    nodes_[node].expanded = true;
    for (std::size_t i = 0; i < acts.size(); ++i) {
      edges_.push_back({acts[i], kids[i]});
      actions_.push_back(acts[i]);
    }
  }
  const int begin = nodes_[node].edge_begin, count = nodes_[node].edge_count;
  for (int e = begin; e < begin + count; ++e) require_depth(edges_[e].child, depth - 1);
}

int LookaheadGraph::add_root(const GameState& state) {
  if (is_terminal(world_, state)) throw TerminalState();
  const int id = intern(GameState(state));
  require_depth(id, horizon_);
  if (root_slot_.emplace(id, static_cast<int>(roots_.size())).second) roots_.push_back(id);
  return id;
}

std::span<const ActionInstance> LookaheadGraph::root_actions(int node) const {
  const auto& n = nodes_[node];
  return {actions_.data() + n.edge_begin, static_cast<std::size_t>(n.edge_count)};
}

std::vector<int> LookaheadGraph::children(int node) const {
  const auto& n = nodes_[node];
  std::vector<int> out;
  for (int e = n.edge_begin; e < n.edge_begin + n.edge_count; ++e) out.push_back(edges_[e].child);
  return out;
}

std::vector<LookaheadGraph::RootValues> LookaheadGraph::evaluate(std::span<const double> w, double beta,
                                                                 bool with_gradient) const {
  if (w.size() != k_) throw DimensionMismatch("weights do not match the feature map");
  const std::size_t n = nodes_.size();
  std::vector<double> reward(n);
  kernels::gemv(features_, k_, w, reward);

  std::vector<double> v_prev(n, 0.0), v_cur(n, 0.0);
  std::vector<double> g_prev, g_cur;
  if (with_gradient) {
    g_prev.assign(n * k_, 0.0);
    g_cur.assign(n * k_, 0.0);
  }
  std::vector<double> q, pi;

  // V_j for j = 1 .. horizon-1; V_0 = 0 and terminal successors contribute 0.
  for (int j = 1; j < horizon_; ++j) {
    for (std::size_t id = 0; id < n; ++id) {
      const Node& node = nodes_[id];
      if (node.depth < j || node.terminal || node.edge_count == 0) continue;
      q.resize(node.edge_count);
      for (int e = 0; e < node.edge_count; ++e) {
        const int c = edges_[node.edge_begin + e].child;
        q[e] = reward[c] + (nodes_[c].terminal ? 0.0 : v_prev[c]);
      }
      pi = q;
      kernels::softmax(beta, pi);
      const double value = kernels::dot(pi, q);
      v_cur[id] = value;
      if (with_gradient) {
        std::span<double> g(g_cur.data() + id * k_, k_);
        std::fill(g.begin(), g.end(), 0.0);
        for (int e = 0; e < node.edge_count; ++e) {
          const int c = edges_[node.edge_begin + e].child;
          const double coef = pi[e] * (1.0 + beta * (q[e] - value));
          kernels::axpy(coef, features(c), g);
          if (!nodes_[c].terminal)
            kernels::axpy(coef, std::span<const double>(g_prev.data() + c * k_, k_), g);
        }
      }
    }
    std::swap(v_prev, v_cur);
    if (with_gradient) std::swap(g_prev, g_cur);
  }

  std::vector<RootValues> out(roots_.size());
  for (std::size_t r = 0; r < roots_.size(); ++r) {
    const Node& node = nodes_[roots_[r]];
    auto& rv = out[r];
    rv.q.resize(node.edge_count);
    if (with_gradient) rv.dq.assign(static_cast<std::size_t>(node.edge_count) * k_, 0.0);
    for (int e = 0; e < node.edge_count; ++e) {
      const int c = edges_[node.edge_begin + e].child;
      const bool term = nodes_[c].terminal;
      rv.q[e] = reward[c] + (term ? 0.0 : v_prev[c]);
      if (with_gradient) {
        std::span<double> row(rv.dq.data() + e * k_, k_);
        kernels::axpy(1.0, features(c), row);
        if (!term) kernels::axpy(1.0, std::span<const double>(g_prev.data() + c * k_, k_), row);
      }
    }
  }
  return out;
}

}  // namespace narrative
