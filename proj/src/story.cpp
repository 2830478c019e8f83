#include "narrative/story.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "narrative/errors.hpp"

namespace narrative {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kActionKindCount> kKindNames = {
    "goto", "examine", "take", "use", "unlock", "open", "say", "buy", "give"};

struct OpName {
  TriggerCondition::Op op;
  std::string_view name;
};

constexpr std::array<OpName, 9> kOpNames = {{
    {TriggerCondition::Op::All, "all"},
    {TriggerCondition::Op::Any, "any"},
    {TriggerCondition::Op::Not, "not"},
    {TriggerCondition::Op::Visited, "visited"},
    {TriggerCondition::Op::Seen, "seen"},
    {TriggerCondition::Op::Has, "has"},
    {TriggerCondition::Op::Mentioned, "mentioned"},
    {TriggerCondition::Op::At, "at"},
    {TriggerCondition::Op::LastAction, "last_action"},
}};

[[noreturn]] void structure_error(const std::string& where, const std::string& what) {
  throw SyntaxError(0, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) structure_error(where, std::string("missing key '") + key + "'");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback = {}, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) structure_error(where, std::string("missing key '") + key + "'");
    return fallback;
  }
  if (!it->is_string()) structure_error(where, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) structure_error(where, std::string("'") + key + "' must be a boolean");
  return it->get<bool>();
}

std::vector<std::string> get_ids(const json& obj, const char* key, const std::string& where) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) structure_error(where, std::string("'") + key + "' must be an array");
  for (const auto& v : *it) {
    if (!v.is_string()) structure_error(where, std::string("'") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<Effect> parse_effect(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_object()) structure_error(where, std::string("'") + key + "' must be an object");
  Effect e;
  if (auto at = it->find("at"); at != it->end() && !at->is_null()) {
    if (!at->is_string()) structure_error(where, "effect 'at' must be a string");
    e.at = at->get<std::string>();
  }
  e.reveal = get_ids(*it, "reveal", where);
  e.learn = get_ids(*it, "learn", where);
  e.text = get_string(*it, "text", where, "", false);
  return e;
}

TriggerCondition parse_trigger(const json& node, const std::string& where) {
  if (!node.is_object() || node.size() != 1)
    structure_error(where, "trigger nodes are single-key objects");
  const auto& [key, value] = *node.items().begin();
  auto op = std::find_if(kOpNames.begin(), kOpNames.end(),
                         [&](const OpName& n) { return n.name == key; });
  if (op == kOpNames.end()) structure_error(where, "unknown trigger operator '" + key + "'");
  TriggerCondition c;
  c.op = op->op;
  switch (c.op) {
    case TriggerCondition::Op::All:
    case TriggerCondition::Op::Any:
      if (!value.is_array()) structure_error(where, key + " takes an array");
      for (const auto& child : value) c.children.push_back(parse_trigger(child, where));
      break;
    case TriggerCondition::Op::Not:
      c.children.push_back(parse_trigger(value, where));
      break;
    case TriggerCondition::Op::LastAction: {
      if (!value.is_object()) structure_error(where, "last_action takes {kind, target}");
      auto kind = parse_action_kind(get_string(value, "kind", where));
      if (!kind) structure_error(where, "unknown action kind in last_action");
      c.action = *kind;
      c.id = get_string(value, "target", where);
      break;
    }
    default:
      if (!value.is_string()) structure_error(where, key + " takes an id");
      c.id = value.get<std::string>();
  }
  return c;
}

json effect_to_json(const Effect& e) {
  json j = json::object();
  if (e.at) j["at"] = *e.at;
  j["reveal"] = e.reveal;
  j["learn"] = e.learn;
  if (!e.text.empty()) j["text"] = e.text;
  return j;
}

std::size_t line_of(std::string_view source, std::size_t byte) {
  byte = std::min(byte, source.size());
  return 1 + static_cast<std::size_t>(std::count(source.begin(), source.begin() + byte, '\n'));
}

template <class Def>
std::vector<int> lexicographic_order(const std::vector<Def>& defs) {
  std::vector<int> order(defs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return defs[a].id < defs[b].id; });
  return order;
}

}  // namespace

std::string_view to_string(ActionKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ActionKind> parse_action_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ActionKind>(i);
  return std::nullopt;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int WorldSpec::location_index(std::string_view id) const {
  auto it = loc_ix_.find(std::string(id));
  return it == loc_ix_.end() ? -1 : it->second;
}
int WorldSpec::object_index(std::string_view id) const {
  auto it = obj_ix_.find(std::string(id));
  return it == obj_ix_.end() ? -1 : it->second;
}
int WorldSpec::character_index(std::string_view id) const {
  auto it = chr_ix_.find(std::string(id));
  return it == chr_ix_.end() ? -1 : it->second;
}
int WorldSpec::topic_index(std::string_view id) const {
  auto it = topic_ix_.find(std::string(id));
  return it == topic_ix_.end() ? -1 : it->second;
}
int WorldSpec::plot_index(std::string_view id) const {
  auto it = plot_ix_.find(std::string(id));
  return it == plot_ix_.end() ? -1 : it->second;
}

bool WorldSpec::operator==(const WorldSpec& o) const {
  return title == o.title && start_location == o.start_location && locations == o.locations &&
         objects == o.objects && characters == o.characters && topics == o.topics &&
         plot_points == o.plot_points;
}

void WorldSpec::finalize() {
  loc_ix_.clear();
  obj_ix_.clear();
  chr_ix_.clear();
  topic_ix_.clear();
  plot_ix_.clear();

  std::set<std::string> placeable;  // locations, objects and characters share a namespace
  auto index_ids = [&](const auto& defs, auto& table, bool shared) {
    for (std::size_t i = 0; i < defs.size(); ++i) {
      const std::string& id = defs[i].id;
      if (id.empty()) throw ValidationError("<empty>", "empty id");
      if (!table.emplace(id, static_cast<int>(i)).second) throw ValidationError(id, "duplicate id");
      if (shared && !placeable.insert(id).second)
        throw ValidationError(id, "id shared between locations, objects and characters");
    }
  };
  index_ids(locations, loc_ix_, true);
  index_ids(objects, obj_ix_, true);
  index_ids(characters, chr_ix_, true);
  index_ids(topics, topic_ix_, false);
  index_ids(plot_points, plot_ix_, false);
  for (const auto& t : topics)
    if (plot_ix_.count(t.id)) throw ValidationError(t.id, "id shared between topic and plot point");

  if (locations.empty()) throw ValidationError("locations", "story has no locations");
  start_ = location_index(start_location);
  if (start_ < 0) throw ValidationError(start_location, "unknown start location");

  adjacency_.assign(locations.size(), {});
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (const auto& a : locations[i].adjacent) {
      int j = location_index(a);
      if (j < 0) throw ValidationError(a, "unknown adjacent location of " + locations[i].id);
      if (static_cast<std::size_t>(j) == i) throw ValidationError(a, "location adjacent to itself");
      adjacency_[i].push_back(j);
    }
  }
  for (std::size_t i = 0; i < locations.size(); ++i)
    for (int j : adjacency_[i])
      if (std::find(adjacency_[j].begin(), adjacency_[j].end(), static_cast<int>(i)) ==
          adjacency_[j].end())
        throw ValidationError(locations[j].id, "asymmetric adjacency with " + locations[i].id);

  auto check_object = [&](const std::string& id, const std::string& ctx) {
    if (object_index(id) < 0) throw ValidationError(id, "unknown object referenced by " + ctx);
  };
  auto check_topic = [&](const std::string& id, const std::string& ctx) {
    if (topic_index(id) < 0) throw ValidationError(id, "unknown topic referenced by " + ctx);
  };
  auto check_effect = [&](const std::optional<Effect>& e, const std::string& ctx) {
    if (!e) return;
    if (e->at && location_index(*e->at) < 0)
      throw ValidationError(*e->at, "unknown effect location in " + ctx);
    for (const auto& r : e->reveal) check_object(r, ctx);
    for (const auto& l : e->learn) check_topic(l, ctx);
  };

  initial_places_.assign(objects.size(), {});
  keys_.assign(objects.size(), -1);
  takeable_ = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    Place p;
    if (int l = location_index(o.location); l >= 0) {
      p = {Place::Kind::Location, l};
    } else if (int c = object_index(o.location); c >= 0) {
      if (static_cast<std::size_t>(c) == i) throw ValidationError(o.id, "object contains itself");
      p = {Place::Kind::Container, c};
    } else if (int ch = character_index(o.location); ch >= 0) {
      p = {Place::Kind::Character, ch};
    } else {
      throw ValidationError(o.location, "unknown location of object " + o.id);
    }
    initial_places_[i] = p;
    if (o.key_id) {
      check_object(*o.key_id, o.id);
      keys_[i] = object_index(*o.key_id);
    }
    if (o.locked && !o.key_id) throw ValidationError(o.id, "locked object without key");
    if (o.locked && o.open) throw ValidationError(o.id, "object both locked and open");
    check_effect(o.use_effect, o.id);
    if (o.can_take) ++takeable_;
  }
  // containment must be acyclic
  for (std::size_t i = 0; i < objects.size(); ++i) {
    std::size_t steps = 0;
    Place p = initial_places_[i];
    while (p.kind == Place::Kind::Container) {
      if (++steps > objects.size()) throw ValidationError(objects[i].id, "cyclic containment");
      p = initial_places_[p.index];
    }
  }
  // declared contents must agree with object locations
  for (std::size_t i = 0; i < objects.size(); ++i) {
    std::vector<std::string> derived;
    for (std::size_t j = 0; j < objects.size(); ++j)
      if (initial_places_[j].kind == Place::Kind::Container &&
          initial_places_[j].index == static_cast<int>(i))
        derived.push_back(objects[j].id);
    for (const auto& c : objects[i].contents) check_object(c, objects[i].id);
    if (!objects[i].contents.empty()) {
      auto declared = objects[i].contents;
      auto sorted_derived = derived;
      std::sort(declared.begin(), declared.end());
      std::sort(sorted_derived.begin(), sorted_derived.end());
      if (declared != sorted_derived)
        throw ValidationError(objects[i].id, "contents disagree with object locations");
    }
    objects[i].contents = std::move(derived);
  }

  char_loc_.clear();
  responds_.assign(characters.size(), std::vector<std::uint8_t>(topics.size(), 0));
  sells_.assign(characters.size(), std::vector<std::uint8_t>(objects.size(), 0));
  wants_.assign(characters.size(), std::vector<std::uint8_t>(objects.size(), 0));
  for (std::size_t i = 0; i < characters.size(); ++i) {
    const auto& c = characters[i];
    if (location_index(c.location) < 0)
      throw ValidationError(c.location, "unknown location of character " + c.id);
    char_loc_.push_back(location_index(c.location));
    for (const auto& t : c.topics_responded) {
      check_topic(t, c.id);
      responds_[i][topic_index(t)] = 1;
    }
    for (const auto& o : c.sells) {
      check_object(o, c.id);
      sells_[i][object_index(o)] = 1;
    }
    for (const auto& o : c.wants) {
      check_object(o, c.id);
      wants_[i][object_index(o)] = 1;
    }
    check_effect(c.on_receive, c.id);
  }

  topic_prereqs_.assign(topics.size(), {});
  for (std::size_t i = 0; i < topics.size(); ++i) {
    for (const auto& p : topics[i].prerequisites) {
      if (int t = topic_index(p); t >= 0)
        topic_prereqs_[i].push_back({true, t});
      else if (int pp = plot_index(p); pp >= 0)
        topic_prereqs_[i].push_back({false, pp});
      else
        throw ValidationError(p, "unknown prerequisite of topic " + topics[i].id);
    }
  }

  std::function<CompiledCondition(const TriggerCondition&, const std::string&)> compile =
      [&](const TriggerCondition& c, const std::string& owner) {
        CompiledCondition out;
        out.op = c.op;
        out.action = c.action;
        auto need = [&](int ix) {
          if (ix < 0) throw ValidationError(c.id, "unresolved trigger atom in " + owner);
          return ix;
        };
        using Op = TriggerCondition::Op;
        switch (c.op) {
          case Op::All:
          case Op::Any:
          case Op::Not:
            if (c.op == Op::Not && c.children.size() != 1)
              throw ValidationError(owner, "'not' takes exactly one operand");
            for (const auto& ch : c.children) out.children.push_back(compile(ch, owner));
            break;
          case Op::Visited: out.index = need(plot_index(c.id)); break;
          case Op::Seen:
          case Op::Has: out.index = need(object_index(c.id)); break;
          case Op::Mentioned: out.index = need(topic_index(c.id)); break;
          case Op::At: out.index = need(location_index(c.id)); break;
          case Op::LastAction:
            if (c.action == ActionKind::Goto)
              out.index = need(location_index(c.id));
            else if (c.action == ActionKind::Say)
              out.index = need(topic_index(c.id));
            else
              out.index = need(object_index(c.id));
            break;
        }
        return out;
      };

  plot_prereqs_.assign(plot_points.size(), {});
  triggers_.clear();
  endings_.clear();
  for (std::size_t i = 0; i < plot_points.size(); ++i) {
    for (const auto& p : plot_points[i].prerequisites) {
      int pp = plot_index(p);
      if (pp < 0) throw ValidationError(p, "unknown prerequisite of plot point " + plot_points[i].id);
      plot_prereqs_[i].push_back(pp);
    }
    triggers_.push_back(compile(plot_points[i].trigger, plot_points[i].id));
    if (plot_points[i].is_ending) endings_.push_back(static_cast<int>(i));
  }
  if (endings_.empty()) throw ValidationError("plot_points", "story has no ending");

  // prerequisite graph must be acyclic (iterative DFS colouring)
  std::vector<int> colour(plot_points.size(), 0);
  for (std::size_t root = 0; root < plot_points.size(); ++root) {
    if (colour[root]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(root), 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < plot_prereqs_[node].size()) {
        int child = plot_prereqs_[node][next++];
        if (colour[child] == 1)
          throw ValidationError(plot_points[child].id, "cyclic plot-point prerequisites");
        if (colour[child] == 0) {
          colour[child] = 1;
          stack.push_back({child, 0});
        }
      } else {
        colour[node] = 2;
        stack.pop_back();
      }
    }
  }

  loc_order_ = lexicographic_order(locations);
  obj_order_ = lexicographic_order(objects);
  topic_order_ = lexicographic_order(topics);
  fingerprint_ = fnv1a_hex(serialize_world(*this));
}

nlohmann::json trigger_to_json(const TriggerCondition& c) {
  auto name = std::find_if(kOpNames.begin(), kOpNames.end(),
                           [&](const OpName& n) { return n.op == c.op; })
                  ->name;
  json j = json::object();
  const std::string key(name);
  switch (c.op) {
    case TriggerCondition::Op::All:
    case TriggerCondition::Op::Any: {
      json arr = json::array();
      for (const auto& ch : c.children) arr.push_back(trigger_to_json(ch));
      j[key] = arr;
      break;
    }
    case TriggerCondition::Op::Not: j[key] = trigger_to_json(c.children.at(0)); break;
    case TriggerCondition::Op::LastAction:
      j[key] = {{"kind", std::string(to_string(c.action))}, {"target", c.id}};
      break;
    default: j[key] = c.id;
  }
  return j;
}

nlohmann::json world_to_json(const WorldSpec& w) {
  json j;
  j["schema_version"] = kStorySchemaVersion;
  j["title"] = w.title;
  j["start_location"] = w.start_location;
  j["locations"] = json::array();
  for (const auto& l : w.locations)
    j["locations"].push_back({{"id", l.id}, {"name", l.name}, {"text", l.text}, {"adjacent", l.adjacent}});
  j["objects"] = json::array();
  for (const auto& o : w.objects) {
    json oj = {{"id", o.id},
               {"name", o.name},
               {"text", o.text},
               {"location", o.location},
               {"can_open", o.can_open},
               {"can_take", o.can_take},
               {"locked", o.locked},
               {"open", o.open},
               {"visible", o.visible},
               {"contents", o.contents}};
    if (o.key_id) oj["key"] = *o.key_id;
    if (o.price) oj["price"] = *o.price;
    if (o.use_effect) oj["use_effect"] = effect_to_json(*o.use_effect);
    j["objects"].push_back(std::move(oj));
  }
  j["characters"] = json::array();
  for (const auto& c : w.characters) {
    json cj = {{"id", c.id},
               {"name", c.name},
               {"text", c.text},
               {"location", c.location},
               {"topics_responded", c.topics_responded},
               {"sells", c.sells},
               {"wants", c.wants}};
    if (c.on_receive) cj["on_receive"] = effect_to_json(*c.on_receive);
    j["characters"].push_back(std::move(cj));
  }
  j["topics"] = json::array();
  for (const auto& t : w.topics)
    j["topics"].push_back({{"id", t.id},
                           {"name", t.name},
                           {"text", t.text},
                           {"known", t.known},
                           {"prerequisites", t.prerequisites}});
  j["plot_points"] = json::array();
  for (const auto& p : w.plot_points)
    j["plot_points"].push_back({{"id", p.id},
                                {"text", p.text},
                                {"trigger", trigger_to_json(p.trigger)},
                                {"prerequisites", p.prerequisites},
                                {"ending", p.is_ending}});
  return j;
}

std::string serialize_world(const WorldSpec& world) { return world_to_json(world).dump(2); }

WorldSpec load_world(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    throw SyntaxError(line_of(source, e.byte), e.what());
  }
  if (!doc.is_object()) throw SyntaxError(1, "story document must be a JSON object");

  auto version = require(doc, "schema_version", "story");
  if (!version.is_string() || version.get<std::string>() != kStorySchemaVersion)
    throw ValidationError("schema_version", "unsupported schema version");

  WorldSpec w;
  w.title = get_string(doc, "title", "story", "", false);
  w.start_location = get_string(doc, "start_location", "story");

  auto array_of = [&](const char* key) -> const json& {
    const json& arr = require(doc, key, "story");
    if (!arr.is_array()) structure_error("story", std::string("'") + key + "' must be an array");
    return arr;
  };

  for (const auto& l : array_of("locations")) {
    const std::string where = "locations";
    if (!l.is_object()) structure_error(where, "entries must be objects");
    LocationDef d;
    d.id = get_string(l, "id", where);
    d.name = get_string(l, "name", where, d.id, false);
    d.text = get_string(l, "text", where, "", false);
    d.adjacent = get_ids(l, "adjacent", where + "/" + d.id);
    w.locations.push_back(std::move(d));
  }
  for (const auto& o : array_of("objects")) {
    const std::string where = "objects";
    if (!o.is_object()) structure_error(where, "entries must be objects");
    ObjectDef d;
    d.id = get_string(o, "id", where);
    const std::string at = where + "/" + d.id;
    d.name = get_string(o, "name", at, d.id, false);
    d.text = get_string(o, "text", at, "", false);
    d.location = get_string(o, "location", at);
    d.can_open = get_bool(o, "can_open", at, false);
    d.can_take = get_bool(o, "can_take", at, false);
    d.locked = get_bool(o, "locked", at, false);
    d.open = get_bool(o, "open", at, false);
    d.visible = get_bool(o, "visible", at, true);
    if (auto k = o.find("key"); k != o.end() && !k->is_null()) {
      if (!k->is_string()) structure_error(at, "'key' must be a string");
      d.key_id = k->get<std::string>();
    }
    d.contents = get_ids(o, "contents", at);
    if (auto p = o.find("price"); p != o.end() && !p->is_null()) {
      if (!p->is_number_integer()) structure_error(at, "'price' must be an integer");
      d.price = p->get<int>();
    }
    d.use_effect = parse_effect(o, "use_effect", at);
    w.objects.push_back(std::move(d));
  }
  for (const auto& c : array_of("characters")) {
    const std::string where = "characters";
    if (!c.is_object()) structure_error(where, "entries must be objects");
    CharacterDef d;
    d.id = get_string(c, "id", where);
    const std::string at = where + "/" + d.id;
    d.name = get_string(c, "name", at, d.id, false);
    d.text = get_string(c, "text", at, "", false);
    d.location = get_string(c, "location", at);
    d.topics_responded = get_ids(c, "topics_responded", at);
    d.sells = get_ids(c, "sells", at);
    d.wants = get_ids(c, "wants", at);
    d.on_receive = parse_effect(c, "on_receive", at);
    w.characters.push_back(std::move(d));
  }
  for (const auto& t : array_of("topics")) {
    const std::string where = "topics";
    if (!t.is_object()) structure_error(where, "entries must be objects");
    TopicDef d;
    d.id = get_string(t, "id", where);
    const std::string at = where + "/" + d.id;
    d.name = get_string(t, "name", at, d.id, false);
    d.text = get_string(t, "text", at, "", false);
    d.known = get_bool(t, "known", at, false);
    d.prerequisites = get_ids(t, "prerequisites", at);
    w.topics.push_back(std::move(d));
  }
  for (const auto& p : array_of("plot_points")) {
    const std::string where = "plot_points";
    if (!p.is_object()) structure_error(where, "entries must be objects");
    PlotPointDef d;
    d.id = get_string(p, "id", where);
    const std::string at = where + "/" + d.id;
    d.text = get_string(p, "text", at, "", false);
    d.trigger = parse_trigger(require(p, "trigger", at), at);
    d.prerequisites = get_ids(p, "prerequisites", at);
    d.is_ending = get_bool(p, "ending", at, false);
    w.plot_points.push_back(std::move(d));
  }

  w.finalize();
  return w;
}

WorldSpec load_world_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open story file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_world(ss.str());
}

std::string sample_story_path() { return NARRATIVE_DATA_DIR "/stories/manor.json"; }

}  // namespace narrative
