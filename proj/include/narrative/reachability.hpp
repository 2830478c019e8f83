#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "narrative/engine.hpp"

namespace narrative {

struct ReachabilityEntry {
  std::string id;
  bool reachable = false;
  int depth = -1;                     // length of the shortest action sequence found
  std::vector<ActionInstance> path;   // one shortest sequence
};

struct ReachabilityReport {
  int cap = 200;
  std::size_t states_explored = 0;
  bool truncated = false;  // state budget exhausted before the cap
  std::vector<ReachabilityEntry> endings;
  std::vector<ReachabilityEntry> plot_points;
  std::vector<std::string> unreachable;  // plot point ids not reached under the cap

  const ReachabilityEntry* ending(const std::string& id) const;
};

struct ReachabilityOptions {
  int cap = 200;
  std::size_t max_states = 4'000'000;
};

/// Breadth-first search over the engine's transition function. States that
/// differ only in flags no trigger reads (unreferenced `seen` flags) are merged.
/// A plot point whose trigger already holds in the initial state is reported at
/// depth 0.
ReachabilityReport validate_reachability(const WorldSpec& world, const ReachabilityOptions& opts = {});

nlohmann::json reachability_to_json(const WorldSpec& world, const ReachabilityReport& report);

}  // namespace narrative
