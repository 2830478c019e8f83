#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "narrative/story.hpp"

namespace narrative {

/// Per-object dynamic state. `contents` and `empty` are derived from the
/// locations of the other objects; see contents_of / is_empty.
struct ObjectState {
  Place location;
  bool locked = false;
  bool open = false;
  bool can_open = false;
  bool can_take = false;
  bool visible = false;
  bool seen = false;
  bool hidden = false;  // not yet revealed by any effect

  bool operator==(const ObjectState&) const = default;
};

struct TopicState {
  bool known = false;
  bool mentioned = false;

  bool operator==(const TopicState&) const = default;
};

/// Full MDP state. Value type; all vectors are indexed in WorldSpec order.
struct GameState {
  int current_location = -1;
  std::vector<std::uint8_t> locations_available;
  std::vector<ObjectState> objects;
  std::vector<std::uint8_t> character_visible;
  std::vector<std::uint8_t> plot_visited;
  std::vector<TopicState> topics;

  bool operator==(const GameState&) const = default;

  /// Compact byte string identifying the state; equal keys <=> equal states.
  std::string key() const;
};

struct ActionInstance {
  ActionKind kind = ActionKind::Goto;
  int target = -1;  // location, object or topic index depending on kind
  int key = -1;     // unlock only

  bool operator==(const ActionInstance&) const = default;
};

struct TransitionOutcome {
  GameState next_state;
  std::vector<int> newly_visited_plot_points;
  bool is_terminal = false;
  std::string narration;
};

GameState initial_state(const WorldSpec& world);

/// Applicable actions in canonical order: kind, then target id, then key id.
std::vector<ActionInstance> applicable_actions(const WorldSpec& world, const GameState& state);

/// Direct precondition check; empty string when applicable, otherwise the reason.
std::string inapplicability_reason(const WorldSpec& world, const GameState& state,
                                   const ActionInstance& action);

/// Deterministic transition. Throws NotApplicable or TerminalState.
TransitionOutcome apply_action(const WorldSpec& world, const GameState& state,
                               const ActionInstance& action);

/// As apply_action without narration text; used by planners.
GameState successor(const WorldSpec& world, const GameState& state, const ActionInstance& action);

/// Plot points whose trigger and prerequisites already hold in `state` with no
/// preceding action, in firing order. Does not modify the state.
std::vector<int> pending_plot_points(const WorldSpec& world, const GameState& state);

bool is_terminal(const WorldSpec& world, const GameState& state);
/// First ending visited (world order), or -1.
int ending_reached(const WorldSpec& world, const GameState& state);

struct ReplayStep {
  GameState state;
  ActionInstance action;
  TransitionOutcome outcome;
};

struct ReplayResult {
  GameState initial;
  std::vector<ReplayStep> steps;

  const GameState& final_state() const { return steps.empty() ? initial : steps.back().outcome.next_state; }
};

/// Folds apply_action from the initial state. Throws ReplayError(index, reason).
ReplayResult replay(const WorldSpec& world, const std::vector<ActionInstance>& actions);

// Derived views
std::vector<int> contents_of(const GameState& state, int object);
bool is_empty(const GameState& state, int object);
std::vector<int> inventory(const GameState& state);

/// Canonical JSON form with sorted keys, named by world ids.
nlohmann::json state_to_json(const WorldSpec& world, const GameState& state);
std::string serialize_state(const WorldSpec& world, const GameState& state);

// Action naming
nlohmann::json action_to_json(const WorldSpec& world, const ActionInstance& action);
/// Throws std::invalid_argument on unknown kind or ids.
ActionInstance action_from_json(const WorldSpec& world, const nlohmann::json& j);
std::string describe(const WorldSpec& world, const ActionInstance& action);
std::string target_id(const WorldSpec& world, const ActionInstance& action);

}  // namespace narrative
