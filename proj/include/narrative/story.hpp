#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace narrative {

/// Parameterised action kinds, in the canonical enumeration order.
enum class ActionKind : std::uint8_t { Goto, Examine, Take, Use, Unlock, Open, Say, Buy, Give };

inline constexpr std::size_t kActionKindCount = 9;

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view name);

/// Boolean condition over game state and the action that was just applied.
struct TriggerCondition {
  enum class Op : std::uint8_t {
    All,
    Any,
    Not,
    Visited,     // plot point visited
    Seen,        // object seen
    Has,         // object in inventory
    Mentioned,   // topic mentioned
    At,          // current location
    LastAction,  // kind + target of the action just applied
  };

  Op op = Op::All;
  std::string id;
  ActionKind action = ActionKind::Goto;
  std::vector<TriggerCondition> children;

  bool operator==(const TriggerCondition&) const = default;
};

/// TriggerCondition with ids resolved to indices.
struct CompiledCondition {
  TriggerCondition::Op op = TriggerCondition::Op::All;
  int index = -1;
  ActionKind action = ActionKind::Goto;
  std::vector<CompiledCondition> children;
};

struct Effect {
  std::optional<std::string> at;  // only fires at this location when set
  std::vector<std::string> reveal;
  std::vector<std::string> learn;
  std::string text;

  bool empty() const { return reveal.empty() && learn.empty(); }
  bool operator==(const Effect&) const = default;
};

struct LocationDef {
  std::string id;
  std::string name;
  std::string text;
  std::vector<std::string> adjacent;

  bool operator==(const LocationDef&) const = default;
};

struct ObjectDef {
  std::string id;
  std::string name;
  std::string text;
  std::string location;  // location, container object or character id
  bool can_open = false;
  bool can_take = false;
  bool locked = false;
  bool open = false;
  bool visible = true;
  std::optional<std::string> key_id;
  std::vector<std::string> contents;  // derived from `location` of other objects
  std::optional<int> price;
  std::optional<Effect> use_effect;

  bool operator==(const ObjectDef&) const = default;
};

struct CharacterDef {
  std::string id;
  std::string name;
  std::string text;
  std::string location;
  std::vector<std::string> topics_responded;
  std::vector<std::string> sells;
  std::vector<std::string> wants;
  std::optional<Effect> on_receive;

  bool operator==(const CharacterDef&) const = default;
};

struct TopicDef {
  std::string id;
  std::string name;
  std::string text;
  bool known = false;
  std::vector<std::string> prerequisites;  // topic ids (mentioned) or plot-point ids (visited)

  bool operator==(const TopicDef&) const = default;
};

struct PlotPointDef {
  std::string id;
  std::string text;
  TriggerCondition trigger;
  std::vector<std::string> prerequisites;
  bool is_ending = false;

  bool operator==(const PlotPointDef&) const = default;
};

/// Where an object currently is.
struct Place {
  enum class Kind : std::uint8_t { Location, Container, Inventory, Character };
  Kind kind = Kind::Location;
  std::int32_t index = -1;

  bool operator==(const Place&) const = default;
};

/// Immutable story definition. Construct through load_world or finalize().
class WorldSpec {
 public:
  std::string title;
  std::string start_location;
  std::vector<LocationDef> locations;
  std::vector<ObjectDef> objects;
  std::vector<CharacterDef> characters;
  std::vector<TopicDef> topics;
  std::vector<PlotPointDef> plot_points;

  /// Validates every invariant and builds the lookup tables. Throws ValidationError.
  void finalize();

  bool operator==(const WorldSpec& other) const;

  // Lookups; -1 when absent.
  int location_index(std::string_view id) const;
  int object_index(std::string_view id) const;
  int character_index(std::string_view id) const;
  int topic_index(std::string_view id) const;
  int plot_index(std::string_view id) const;

  int start_index() const { return start_; }
  const std::vector<int>& endings() const { return endings_; }
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
  const std::vector<Place>& initial_places() const { return initial_places_; }
  int key_of(int object) const { return keys_[object]; }

  // Lexicographic id order of each category, used for action enumeration.
  const std::vector<int>& locations_by_id() const { return loc_order_; }
  const std::vector<int>& objects_by_id() const { return obj_order_; }
  const std::vector<int>& topics_by_id() const { return topic_order_; }

  const std::vector<int>& plot_prerequisites(int plot) const { return plot_prereqs_[plot]; }
  const CompiledCondition& trigger(int plot) const { return triggers_[plot]; }

  struct TopicPrereq {
    bool is_topic;
    int index;
  };
  const std::vector<TopicPrereq>& topic_prerequisites(int topic) const { return topic_prereqs_[topic]; }

  std::size_t takeable_count() const { return takeable_; }

  int character_location(int c) const { return char_loc_[c]; }
  bool responds(int c, int topic) const { return responds_[c][topic] != 0; }
  bool sells(int c, int object) const { return sells_[c][object] != 0; }
  bool wants(int c, int object) const { return wants_[c][object] != 0; }

  /// Stable content hash of the canonical serialization (16 hex digits).
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::unordered_map<std::string, int> loc_ix_, obj_ix_, chr_ix_, topic_ix_, plot_ix_;
  int start_ = -1;
  std::vector<int> endings_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<Place> initial_places_;
  std::vector<int> keys_;
  std::vector<int> loc_order_, obj_order_, topic_order_;
  std::vector<std::vector<int>> plot_prereqs_;
  std::vector<CompiledCondition> triggers_;
  std::vector<std::vector<TopicPrereq>> topic_prereqs_;
  std::size_t takeable_ = 0;
  std::vector<int> char_loc_;
  std::vector<std::vector<std::uint8_t>> responds_, sells_, wants_;
  std::string fingerprint_;
};

inline constexpr const char* kStorySchemaVersion = "1";

/// Parses and validates a story document. Throws SyntaxError or ValidationError.
WorldSpec load_world(std::string_view source);
WorldSpec load_world_file(const std::string& path);

nlohmann::json world_to_json(const WorldSpec& world);
std::string serialize_world(const WorldSpec& world);

nlohmann::json trigger_to_json(const TriggerCondition& cond);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Path of the bundled sample story, resolved at build time.
std::string sample_story_path();

}  // namespace narrative
