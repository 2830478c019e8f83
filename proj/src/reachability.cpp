#include "narrative/reachability.hpp"

#include <functional>
#include <unordered_set>

namespace narrative {

namespace {

void collect_seen_atoms(const CompiledCondition& c, std::vector<std::uint8_t>& out) {
  if (c.op == TriggerCondition::Op::Seen) out[c.index] = 1;
  for (const auto& ch : c.children) collect_seen_atoms(ch, out);
}

struct Node {
  int parent;
  ActionInstance action;
};

}  // namespace

const ReachabilityEntry* ReachabilityReport::ending(const std::string& id) const {
  for (const auto& e : endings)
    if (e.id == id) return &e;
  return nullptr;
}

ReachabilityReport validate_reachability(const WorldSpec& w, const ReachabilityOptions& opts) {
  ReachabilityReport report;
  report.cap = opts.cap;

  std::vector<std::uint8_t> seen_matters(w.objects.size(), 0);
  for (std::size_t p = 0; p < w.plot_points.size(); ++p) collect_seen_atoms(w.trigger(static_cast<int>(p)), seen_matters);
  auto quotient_key = [&](GameState s) {
    for (std::size_t o = 0; o < s.objects.size(); ++o)
      if (!seen_matters[o]) s.objects[o].seen = false;
    return s.key();
  };

  const std::size_t n_plot = w.plot_points.size();
  std::vector<int> first_depth(n_plot, -1);
  std::vector<int> first_node(n_plot, -1);

  std::vector<Node> nodes{{-1, {}}};
  std::unordered_set<std::string> visited;
  GameState init = initial_state(w);
  visited.insert(quotient_key(init));
  for (int p : pending_plot_points(w, init)) {
    first_depth[p] = 0;
    first_node[p] = 0;
  }

  std::vector<std::pair<int, GameState>> frontier{{0, std::move(init)}};
  int depth = 0;
  while (!frontier.empty() && depth < opts.cap && !report.truncated) {
    ++depth;
    std::vector<std::pair<int, GameState>> next;
    for (const auto& [id, state] : frontier) {
      if (is_terminal(w, state)) continue;
      for (const auto& a : applicable_actions(w, state)) {
        GameState s2 = successor(w, state, a);
        if (!visited.insert(quotient_key(s2)).second) continue;
        const int child = static_cast<int>(nodes.size());
        nodes.push_back({id, a});
        for (std::size_t p = 0; p < n_plot; ++p)
          if (s2.plot_visited[p] && first_depth[p] < 0) {
            first_depth[p] = depth;
            first_node[p] = child;
          }
        next.emplace_back(child, std::move(s2));
        if (visited.size() >= opts.max_states) {
          report.truncated = true;
          break;
        }
      }
      if (report.truncated) break;
    }
    frontier = std::move(next);
  }
  report.states_explored = visited.size();

  auto path_to = [&](int node) {
    std::vector<ActionInstance> path;
    for (int n = node; n > 0; n = nodes[n].parent) path.push_back(nodes[n].action);
    return std::vector<ActionInstance>(path.rbegin(), path.rend());
  };
  for (std::size_t p = 0; p < n_plot; ++p) {
    ReachabilityEntry e;
    e.id = w.plot_points[p].id;
    e.reachable = first_depth[p] >= 0;
    e.depth = first_depth[p];
    if (e.reachable) e.path = path_to(first_node[p]);
    else report.unreachable.push_back(e.id);
    if (w.plot_points[p].is_ending) report.endings.push_back(e);
    report.plot_points.push_back(std::move(e));
  }
  return report;
}

nlohmann::json reachability_to_json(const WorldSpec& w, const ReachabilityReport& r) {
  auto entry = [&](const ReachabilityEntry& e) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& a : e.path) path.push_back(action_to_json(w, a));
    return nlohmann::json{{"id", e.id}, {"reachable", e.reachable}, {"depth", e.depth}, {"path", path}};
  };
  nlohmann::json j;
  j["cap"] = r.cap;
  j["states_explored"] = r.states_explored;
  j["truncated"] = r.truncated;
  j["endings"] = nlohmann::json::array();
  for (const auto& e : r.endings) j["endings"].push_back(entry(e));
  j["plot_points"] = nlohmann::json::array();
  for (const auto& e : r.plot_points) j["plot_points"].push_back(entry(e));
  j["unreachable"] = r.unreachable;
  return j;
}

}  // namespace narrative
