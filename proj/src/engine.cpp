#include "narrative/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "narrative/errors.hpp"

namespace narrative {

using nlohmann::json;

namespace {

bool in_inventory(const GameState& s, int o) { return s.objects[o].location.kind == Place::Kind::Inventory; }

bool object_visible(const GameState& s, int o, int depth = 0) {
  const ObjectState& os = s.objects[o];
  if (os.hidden || depth > static_cast<int>(s.objects.size())) return false;
  switch (os.location.kind) {
    case Place::Kind::Location: return os.location.index == s.current_location;
    case Place::Kind::Inventory: return true;
    case Place::Kind::Container: {
      const ObjectState& c = s.objects[os.location.index];
      return c.open && object_visible(s, os.location.index, depth + 1);
    }
    case Place::Kind::Character: return false;
  }
  return false;
}

void refresh_visibility(const WorldSpec& w, GameState& s) {
  for (std::size_t c = 0; c < w.characters.size(); ++c)
    s.character_visible[c] = w.character_location(static_cast<int>(c)) == s.current_location;
  for (std::size_t o = 0; o < s.objects.size(); ++o)
    s.objects[o].visible = object_visible(s, static_cast<int>(o));
}

bool any_character_visible(const GameState& s) {
  return std::any_of(s.character_visible.begin(), s.character_visible.end(),
                     [](std::uint8_t v) { return v != 0; });
}

// Character able to sell `o` right now, or -1.
int seller_of(const WorldSpec& w, const GameState& s, int o) {
  const Place& p = s.objects[o].location;
  if (p.kind != Place::Kind::Character || !s.character_visible[p.index]) return -1;
  return w.sells(p.index, o) ? p.index : -1;
}

int responder_to(const WorldSpec& w, const GameState& s, int topic) {
  for (std::size_t c = 0; c < w.characters.size(); ++c)
    if (s.character_visible[c] && w.responds(static_cast<int>(c), topic))
      return static_cast<int>(c);
  return -1;
}

int recipient_of(const WorldSpec& w, const GameState& s, int o) {
  for (std::size_t c = 0; c < w.characters.size(); ++c)
    if (s.character_visible[c] && w.wants(static_cast<int>(c), o))
      return static_cast<int>(c);
  return -1;
}

bool evaluate(const CompiledCondition& c, const GameState& s, const ActionInstance* last) {
  using Op = TriggerCondition::Op;
  switch (c.op) {
    case Op::All:
      return std::all_of(c.children.begin(), c.children.end(),
                         [&](const CompiledCondition& ch) { return evaluate(ch, s, last); });
    case Op::Any:
      return std::any_of(c.children.begin(), c.children.end(),
                         [&](const CompiledCondition& ch) { return evaluate(ch, s, last); });
    case Op::Not: return !evaluate(c.children.front(), s, last);
    case Op::Visited: return s.plot_visited[c.index] != 0;
    case Op::Seen: return s.objects[c.index].seen;
    case Op::Has: return in_inventory(s, c.index);
    case Op::Mentioned: return s.topics[c.index].mentioned;
    case Op::At: return s.current_location == c.index;
    case Op::LastAction: return last && last->kind == c.action && last->target == c.index;
  }
  return false;
}

void apply_effect(const WorldSpec& w, GameState& s, const Effect& e, std::string* narration) {
  if (e.at && w.location_index(*e.at) != s.current_location) return;
  for (const auto& r : e.reveal) s.objects[w.object_index(r)].hidden = false;
  for (const auto& l : e.learn) s.topics[w.topic_index(l)].known = true;
  if (narration && !e.text.empty()) *narration += "\n" + e.text;
}

// Resolves topic knowledge and plot points to a fixed point.
std::vector<int> settle(const WorldSpec& w, GameState& s, const ActionInstance* last) {
  std::vector<int> fired;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t t = 0; t < w.topics.size(); ++t) {
      if (s.topics[t].known) continue;
      const auto& pre = w.topic_prerequisites(static_cast<int>(t));
      if (pre.empty()) continue;
      bool ok = std::all_of(pre.begin(), pre.end(), [&](const WorldSpec::TopicPrereq& p) {
        return p.is_topic ? s.topics[p.index].mentioned : s.plot_visited[p.index] != 0;
      });
      if (ok) {
        s.topics[t].known = true;
        changed = true;
      }
    }
    for (std::size_t p = 0; p < w.plot_points.size(); ++p) {
      if (s.plot_visited[p]) continue;
      const auto& pre = w.plot_prerequisites(static_cast<int>(p));
      bool ok = std::all_of(pre.begin(), pre.end(), [&](int q) { return s.plot_visited[q] != 0; });
      if (ok && evaluate(w.trigger(static_cast<int>(p)), s, last)) {
        s.plot_visited[p] = 1;
        fired.push_back(static_cast<int>(p));
        changed = true;
      }
    }
  }
  return fired;
}

const std::string& display_name(const std::string& name, const std::string& id) {
  return name.empty() ? id : name;
}

GameState step(const WorldSpec& w, const GameState& s, const ActionInstance& a,
               std::vector<int>* fired, std::string* narration) {
  if (is_terminal(w, s)) throw TerminalState();
  if (auto why = inapplicability_reason(w, s, a); !why.empty()) throw NotApplicable(why);

  GameState n = s;
  if (narration) *narration = describe(w, a) + ".";
  switch (a.kind) {
    case ActionKind::Goto:
      n.current_location = a.target;
      n.locations_available[a.target] = 1;
      for (int adj : w.adjacency()[a.target]) n.locations_available[adj] = 1;
      if (narration && !w.locations[a.target].text.empty()) *narration += "\n" + w.locations[a.target].text;
      break;
    case ActionKind::Examine:
      n.objects[a.target].seen = true;
      if (narration && !w.objects[a.target].text.empty()) *narration += "\n" + w.objects[a.target].text;
      break;
    case ActionKind::Take:
    case ActionKind::Buy:
      n.objects[a.target].location = {Place::Kind::Inventory, -1};
      break;
    case ActionKind::Use:
      if (const auto& e = w.objects[a.target].use_effect) apply_effect(w, n, *e, narration);
      break;
    case ActionKind::Unlock: n.objects[a.target].locked = false; break;
    case ActionKind::Open: n.objects[a.target].open = true; break;
    case ActionKind::Say:
      if (int c = responder_to(w, s, a.target); c >= 0) {
        n.topics[a.target].mentioned = true;
        if (narration && !w.topics[a.target].text.empty()) *narration += "\n" + w.topics[a.target].text;
      } else if (narration) {
        *narration += "\nNobody here has anything to say about that.";
      }
      break;
    case ActionKind::Give:
      if (int c = recipient_of(w, s, a.target); c >= 0) {
        n.objects[a.target].location = {Place::Kind::Character, c};
        if (const auto& e = w.characters[c].on_receive) apply_effect(w, n, *e, narration);
      } else if (narration) {
        *narration += "\nNobody here wants that.";
      }
      break;
  }
  refresh_visibility(w, n);
  auto newly = settle(w, n, &a);
  if (narration)
    for (int p : newly)
      if (!w.plot_points[p].text.empty()) *narration += "\n" + w.plot_points[p].text;
  if (fired) *fired = std::move(newly);
  return n;
}

void put_u16(std::string& out, int v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

std::string GameState::key() const {
  std::string out;
  out.reserve(8 + locations_available.size() + objects.size() * 4 + plot_visited.size() + topics.size());
  put_u16(out, current_location);
  for (auto v : locations_available) out.push_back(static_cast<char>(v));
  for (const auto& o : objects) {
    out.push_back(static_cast<char>(o.locked | o.open << 1 | o.can_open << 2 | o.can_take << 3 |
                                    o.visible << 4 | o.seen << 5 | o.hidden << 6));
    out.push_back(static_cast<char>(o.location.kind));
    put_u16(out, o.location.index);
  }
  for (auto v : character_visible) out.push_back(static_cast<char>(v));
  for (auto v : plot_visited) out.push_back(static_cast<char>(v));
  for (const auto& t : topics) out.push_back(static_cast<char>(t.known | t.mentioned << 1));
  return out;
}

GameState initial_state(const WorldSpec& w) {
  GameState s;
  s.current_location = w.start_index();
  s.locations_available.assign(w.locations.size(), 0);
  s.locations_available[s.current_location] = 1;
  for (int adj : w.adjacency()[s.current_location]) s.locations_available[adj] = 1;
  s.objects.resize(w.objects.size());
  for (std::size_t i = 0; i < w.objects.size(); ++i) {
    const auto& d = w.objects[i];
    auto& o = s.objects[i];
    o.location = w.initial_places()[i];
    o.locked = d.locked;
    o.open = d.open;
    o.can_open = d.can_open;
    o.can_take = d.can_take;
    o.hidden = !d.visible;
  }
  s.character_visible.assign(w.characters.size(), 0);
  s.plot_visited.assign(w.plot_points.size(), 0);
  s.topics.resize(w.topics.size());
  for (std::size_t t = 0; t < w.topics.size(); ++t) s.topics[t].known = w.topics[t].known;
  refresh_visibility(w, s);
  return s;
}

std::vector<ActionInstance> applicable_actions(const WorldSpec& w, const GameState& s) {
  std::vector<ActionInstance> out;
  if (is_terminal(w, s)) return out;
  const auto& adj = w.adjacency()[s.current_location];
  for (int l : w.locations_by_id())
    if (std::find(adj.begin(), adj.end(), l) != adj.end()) out.push_back({ActionKind::Goto, l});

  const auto& objs = w.objects_by_id();
  for (int o : objs)
    if (s.objects[o].visible) out.push_back({ActionKind::Examine, o});
  for (int o : objs)
    if (s.objects[o].visible && s.objects[o].can_take && !in_inventory(s, o))
      out.push_back({ActionKind::Take, o});
  for (int o : objs)
    if (s.objects[o].visible) out.push_back({ActionKind::Use, o});
  for (int o : objs) {
    int k = w.key_of(o);
    if (s.objects[o].visible && s.objects[o].locked && k >= 0 && in_inventory(s, k))
      out.push_back({ActionKind::Unlock, o, k});
  }
  for (int o : objs) {
    const auto& os = s.objects[o];
    if (os.visible && !os.locked && os.can_open && !os.open) out.push_back({ActionKind::Open, o});
  }
  const bool audience = any_character_visible(s);
  if (audience)
    for (int t : w.topics_by_id())
      if (s.topics[t].known) out.push_back({ActionKind::Say, t});
  for (int o : objs)
    if (seller_of(w, s, o) >= 0) out.push_back({ActionKind::Buy, o});
  if (audience)
    for (int o : objs)
      if (in_inventory(s, o)) out.push_back({ActionKind::Give, o});
  return out;
}

std::string inapplicability_reason(const WorldSpec& w, const GameState& s, const ActionInstance& a) {
  const int n_obj = static_cast<int>(w.objects.size());
  auto object_target = [&]() -> const ObjectState* {
    return a.target >= 0 && a.target < n_obj ? &s.objects[a.target] : nullptr;
  };
  if (a.kind != ActionKind::Unlock && a.key != -1) return "only unlock carries a key";
  switch (a.kind) {
    case ActionKind::Goto: {
      if (a.target < 0 || a.target >= static_cast<int>(w.locations.size())) return "unknown location";
      const auto& adj = w.adjacency()[s.current_location];
      if (std::find(adj.begin(), adj.end(), a.target) == adj.end()) return "location not adjacent";
      return {};
    }
    case ActionKind::Examine:
    case ActionKind::Use: {
      const auto* o = object_target();
      if (!o) return "unknown object";
      return o->visible ? "" : "object not visible";
    }
    case ActionKind::Take: {
      const auto* o = object_target();
      if (!o) return "unknown object";
      if (!o->visible) return "object not visible";
      if (!o->can_take) return "object cannot be taken";
      if (o->location.kind == Place::Kind::Inventory) return "object already in inventory";
      return {};
    }
    case ActionKind::Unlock: {
      const auto* o = object_target();
      if (!o) return "unknown object";
      if (a.key < 0 || a.key >= n_obj) return "unknown key";
      if (!o->visible) return "object not visible";
      if (s.objects[a.key].location.kind != Place::Kind::Inventory) return "key not in inventory";
      if (!o->locked) return "object not locked";
      if (w.key_of(a.target) != a.key) return "key does not fit";
      return {};
    }
    case ActionKind::Open: {
      const auto* o = object_target();
      if (!o) return "unknown object";
      if (!o->visible) return "object not visible";
      if (o->locked) return "object locked";
      if (!o->can_open) return "object cannot be opened";
      if (o->open) return "object already open";
      return {};
    }
    case ActionKind::Say:
      if (a.target < 0 || a.target >= static_cast<int>(w.topics.size())) return "unknown topic";
      if (!s.topics[a.target].known) return "topic not known";
      if (!any_character_visible(s)) return "no character visible";
      return {};
    case ActionKind::Buy:
      if (!object_target()) return "unknown object";
      if (!any_character_visible(s)) return "no character visible";
      if (seller_of(w, s, a.target) < 0) return "nobody here sells that";
      return {};
    case ActionKind::Give: {
      const auto* o = object_target();
      if (!o) return "unknown object";
      if (o->location.kind != Place::Kind::Inventory) return "object not in inventory";
      if (!any_character_visible(s)) return "no character visible";
      return {};
    }
  }
  return "unknown action kind";
}

TransitionOutcome apply_action(const WorldSpec& w, const GameState& s, const ActionInstance& a) {
  TransitionOutcome out;
  out.next_state = step(w, s, a, &out.newly_visited_plot_points, &out.narration);
  out.is_terminal = is_terminal(w, out.next_state);
  return out;
}

GameState successor(const WorldSpec& w, const GameState& s, const ActionInstance& a) {
  return step(w, s, a, nullptr, nullptr);
}

std::vector<int> pending_plot_points(const WorldSpec& w, const GameState& s) {
  GameState copy = s;
  return settle(w, copy, nullptr);
}

bool is_terminal(const WorldSpec& w, const GameState& s) { return ending_reached(w, s) >= 0; }

int ending_reached(const WorldSpec& w, const GameState& s) {
  for (int e : w.endings())
    if (s.plot_visited[e]) return e;
  return -1;
}

ReplayResult replay(const WorldSpec& w, const std::vector<ActionInstance>& actions) {
  ReplayResult r;
  r.initial = initial_state(w);
  r.steps.reserve(actions.size());
  const GameState* current = &r.initial;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    try {
      ReplayStep st{*current, actions[i], apply_action(w, *current, actions[i])};
      r.steps.push_back(std::move(st));
    } catch (const NotApplicable& e) {
      throw ReplayError(i, std::string("NotApplicable: ") + e.what());
    } catch (const TerminalState& e) {
      throw ReplayError(i, e.what());
    }
    current = &r.steps.back().outcome.next_state;
  }
  return r;
}

std::vector<int> contents_of(const GameState& s, int object) {
  std::vector<int> out;
  for (std::size_t o = 0; o < s.objects.size(); ++o)
    if (s.objects[o].location.kind == Place::Kind::Container && s.objects[o].location.index == object)
      out.push_back(static_cast<int>(o));
  return out;
}

bool is_empty(const GameState& s, int object) { return contents_of(s, object).empty(); }

std::vector<int> inventory(const GameState& s) {
  std::vector<int> out;
  for (std::size_t o = 0; o < s.objects.size(); ++o)
    if (in_inventory(s, static_cast<int>(o))) out.push_back(static_cast<int>(o));
  return out;
}

json state_to_json(const WorldSpec& w, const GameState& s) {
  json j;
  j["current_location"] = w.locations[s.current_location].id;
  json avail = json::array();
  for (std::size_t l = 0; l < w.locations.size(); ++l)
    if (s.locations_available[l]) avail.push_back(w.locations[l].id);
  j["locations_available"] = avail;

  json objects = json::object();
  for (std::size_t o = 0; o < w.objects.size(); ++o) {
    const auto& os = s.objects[o];
    json contents = json::array();
    for (int c : contents_of(s, static_cast<int>(o))) contents.push_back(w.objects[c].id);
    std::string where;
    switch (os.location.kind) {
      case Place::Kind::Location: where = w.locations[os.location.index].id; break;
      case Place::Kind::Container: where = w.objects[os.location.index].id; break;
      case Place::Kind::Character: where = w.characters[os.location.index].id; break;
      case Place::Kind::Inventory: where = "inventory"; break;
    }
    objects[w.objects[o].id] = {{"locked", os.locked},     {"open", os.open},
                                {"empty", contents.empty()}, {"contents", contents},
                                {"can_open", os.can_open}, {"can_take", os.can_take},
                                {"visible", os.visible},   {"seen", os.seen},
                                {"hidden", os.hidden},     {"location", where}};
  }
  j["objects"] = objects;

  json inv = json::array();
  for (int o : inventory(s)) inv.push_back(w.objects[o].id);
  j["inventory"] = inv;

  json chars = json::object();
  for (std::size_t c = 0; c < w.characters.size(); ++c)
    chars[w.characters[c].id] = {{"visible", s.character_visible[c] != 0}};
  j["characters"] = chars;

  json plots = json::object();
  for (std::size_t p = 0; p < w.plot_points.size(); ++p)
    plots[w.plot_points[p].id] = {{"visited", s.plot_visited[p] != 0}};
  j["plot_points"] = plots;

  json topics = json::object();
  for (std::size_t t = 0; t < w.topics.size(); ++t)
    topics[w.topics[t].id] = {{"known", s.topics[t].known}, {"mentioned", s.topics[t].mentioned}};
  j["topics"] = topics;
  return j;
}

std::string serialize_state(const WorldSpec& w, const GameState& s) { return state_to_json(w, s).dump(); }

std::string target_id(const WorldSpec& w, const ActionInstance& a) {
  switch (a.kind) {
    case ActionKind::Goto: return w.locations.at(a.target).id;
    case ActionKind::Say: return w.topics.at(a.target).id;
    default: return w.objects.at(a.target).id;
  }
}

json action_to_json(const WorldSpec& w, const ActionInstance& a) {
  json j = {{"kind", std::string(to_string(a.kind))}, {"target", target_id(w, a)}};
  if (a.kind == ActionKind::Unlock) j["key"] = w.objects.at(a.key).id;
  return j;
}

ActionInstance action_from_json(const WorldSpec& w, const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("target"))
    throw std::invalid_argument("action needs kind and target");
  auto kind = parse_action_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown action kind " + j.at("kind").dump());
  ActionInstance a;
  a.kind = *kind;
  const auto target = j.at("target").get<std::string>();
  switch (a.kind) {
    case ActionKind::Goto: a.target = w.location_index(target); break;
    case ActionKind::Say: a.target = w.topic_index(target); break;
    default: a.target = w.object_index(target);
  }
  if (a.target < 0) throw std::invalid_argument("unknown action target " + target);
  if (a.kind == ActionKind::Unlock) {
    if (!j.contains("key") || !j.at("key").is_string()) throw std::invalid_argument("unlock needs a key");
    a.key = w.object_index(j.at("key").get<std::string>());
    if (a.key < 0) throw std::invalid_argument("unknown key " + j.at("key").dump());
  }
  return a;
}

std::string describe(const WorldSpec& w, const ActionInstance& a) {
  auto obj = [&](int o) -> const std::string& { return display_name(w.objects.at(o).name, w.objects.at(o).id); };
  switch (a.kind) {
    case ActionKind::Goto: {
      const auto& l = w.locations.at(a.target);
      return "Go to " + display_name(l.name, l.id);
    }
    case ActionKind::Examine: return "Examine " + obj(a.target);
    case ActionKind::Take: return "Take " + obj(a.target);
    case ActionKind::Use: return "Use " + obj(a.target);
    case ActionKind::Unlock: return "Unlock " + obj(a.target) + " with " + obj(a.key);
    case ActionKind::Open: return "Open " + obj(a.target);
    case ActionKind::Say: {
      const auto& t = w.topics.at(a.target);
      return "Ask about " + display_name(t.name, t.id);
    }
    case ActionKind::Buy: return "Buy " + obj(a.target);
    case ActionKind::Give: return "Give " + obj(a.target);
  }
  return "?";
}

}  // namespace narrative
