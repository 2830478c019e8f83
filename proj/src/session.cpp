#include "narrative/session.hpp"

#include <iomanip>
#include <random>
#include <sstream>

#include "narrative/errors.hpp"

namespace narrative {

using nlohmann::json;

std::string to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Finished: return "finished";
    case SessionStatus::Abandoned: return "abandoned";
  }
  return "active";
}

PlayerProfile profile_from_answers(const std::array<int, 4>& a) {
  for (int x : a)
    if (x < 1 || x > 5) throw InvalidChoice("questionnaire answers must be between 1 and 5");
  auto norm = [](int x) { return (x - 1) / 4.0; };
  return {norm(a[0]), norm(a[1]), norm(a[2]), norm(a[3])};
}

SessionManager::SessionManager(const WorldSpec& world, TraceStore store, Clock clock, std::chrono::milliseconds ttl)
    : world_(world), store_(std::move(store)), clock_(std::move(clock)), ttl_(ttl) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
}

std::string SessionManager::new_id() {
  static thread_local std::random_device rd;
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (int i = 0; i < 4; ++i) out << std::setw(8) << static_cast<std::uint32_t>(rd());
  return out.str();
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

json SessionManager::present(const Session& s) const {
  json j;
  j["session_id"] = s.session_id;
  j["status"] = to_string(s.status);
  j["narration"] = s.last_narration;
  j["location"] = {{"id", world_.locations[s.state.current_location].id},
                   {"name", world_.locations[s.state.current_location].name}};
  json inv = json::array();
  for (int o : inventory(s.state)) inv.push_back(world_.objects[o].name.empty() ? world_.objects[o].id : world_.objects[o].name);
  j["inventory"] = inv;
  json choices = json::array();
  const bool terminal = is_terminal(world_, s.state);
  if (s.status == SessionStatus::Active && !terminal) {
    const auto acts = applicable_actions(world_, s.state);
    for (std::size_t i = 0; i < acts.size(); ++i)
      choices.push_back({{"index", i}, {"kind", to_string(acts[i].kind)}, {"label", describe(world_, acts[i])},
                         {"action", action_to_json(world_, acts[i])}});
  }
  j["choices"] = choices;
  int visited = 0;
  for (auto v : s.state.plot_visited) visited += v;
  j["plot_progress"] = {{"visited", visited}, {"total", world_.plot_points.size()}};
  j["terminal"] = terminal;
  const int e = ending_reached(world_, s.state);
  j["ending"] = e >= 0 ? json(world_.plot_points[e].id) : json(nullptr);
  j["actions_taken"] = s.log.size();
  if (s.trace_id) j["trace_id"] = *s.trace_id;
  return j;
}

json SessionManager::create() {
  Session s;
  s.session_id = new_id();
  s.state = initial_state(world_);
  s.created_ms = s.updated_ms = clock_();
  const auto& loc = world_.locations[s.state.current_location];
  s.last_narration = loc.text.empty() ? (loc.name.empty() ? loc.id : loc.name) : loc.text;
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(s);
  json out = present(entry->session);
  std::lock_guard lock(mutex_);
  sessions_.emplace(entry->session.session_id, std::move(entry));
  return out;
}

json SessionManager::get_state(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return present(e->session);
}

json SessionManager::apply(Entry& e, const ActionInstance& action) {
  Session& s = e.session;
  if (s.status != SessionStatus::Active || is_terminal(world_, s.state)) throw SessionFinished(s.session_id);
  const auto reason = inapplicability_reason(world_, s.state, action);
  if (!reason.empty()) throw InvalidChoice(reason);
  auto outcome = apply_action(world_, s.state, action);
  const auto now = clock_();
  s.log.push_back({action, now - s.created_ms});
  s.updated_ms = now;
  s.state = std::move(outcome.next_state);
  s.last_narration = outcome.narration;
  json j = present(s);
  json fresh = json::array();
  for (int p : outcome.newly_visited_plot_points) fresh.push_back(world_.plot_points[p].id);
  j["new_plot_points"] = fresh;
  return j;
}

json SessionManager::post_action(const std::string& id, std::size_t choice_index) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  const Session& s = e->session;
  if (s.status != SessionStatus::Active || is_terminal(world_, s.state)) throw SessionFinished(id);
  const auto acts = applicable_actions(world_, s.state);
  if (choice_index >= acts.size()) throw InvalidChoice("choice index out of range");
  return apply(*e, acts[choice_index]);
}

json SessionManager::post_action(const std::string& id, const ActionInstance& action) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return apply(*e, action);
}

PlayerProfile SessionManager::post_profile(const std::string& id, const std::array<int, 4>& answers) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  // the questionnaire follows the ending, so a terminal session still accepts it
  if (e->session.status != SessionStatus::Active) throw SessionFinished(id);
  auto p = profile_from_answers(answers);
  e->session.profile = p;
  e->session.updated_ms = clock_();
  return p;
}

std::string SessionManager::persist(Session& s) {
  if (s.trace_id) return *s.trace_id;
  Trace t;
  t.trace_id = "session-" + s.session_id;
  t.player_id = s.session_id.substr(0, 12);
  t.source = TraceSource::Human;
  t.story_fingerprint = world_.fingerprint();
  t.profile = s.profile;
  t.actions = s.log;
  if (int e = ending_reached(world_, s.state); e >= 0) t.end_reached = world_.plot_points[e].id;
  store_.save(world_, t);
  s.trace_id = t.trace_id;
  return t.trace_id;
}

std::string SessionManager::finish(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  auto& s = e->session;
  const auto trace = persist(s);
  if (s.status == SessionStatus::Active) s.status = SessionStatus::Finished;
  s.updated_ms = clock_();
  return trace;
}

std::size_t SessionManager::reap_idle() {
  std::vector<std::shared_ptr<Entry>> all;
  {
    std::lock_guard lock(mutex_);
    for (auto& [_, e] : sessions_) all.push_back(e);
  }
  const auto now = clock_();
  std::size_t n = 0;
  for (auto& e : all) {
    std::lock_guard lock(e->mutex);
    auto& s = e->session;
    if (s.status != SessionStatus::Active || now - s.updated_ms < ttl_.count()) continue;
    persist(s);
    s.status = SessionStatus::Abandoned;
    ++n;
  }
  return n;
}

Session SessionManager::snapshot(const std::string& id) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session;
}

}  // namespace narrative
