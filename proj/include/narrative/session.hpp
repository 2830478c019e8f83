#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "narrative/traces.hpp"

namespace narrative {

enum class SessionStatus { Active, Finished, Abandoned };
std::string to_string(SessionStatus s);

struct Session {
  std::string session_id;
  GameState state;
  std::vector<TimedAction> log;
  std::optional<PlayerProfile> profile;
  SessionStatus status = SessionStatus::Active;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;
  std::string last_narration;
  std::optional<std::string> trace_id;  // set once persisted
};

/// Questionnaire answers on 1..5 scales -> (x - 1) / 4. Throws InvalidChoice.
PlayerProfile profile_from_answers(const std::array<int, 4>& answers);

/// Live play sessions over one story. Thread safe; operations on a single
/// session are serialized.
class SessionManager {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds

  SessionManager(const WorldSpec& world, TraceStore store, Clock clock = {},
                 std::chrono::milliseconds idle_ttl = std::chrono::hours(24));

  /// Presentation of the new session (includes "session_id").
  nlohmann::json create();
  /// Throws UnknownSession.
  nlohmann::json get_state(const std::string& id);
  /// Throws UnknownSession, SessionFinished, InvalidChoice.
  nlohmann::json post_action(const std::string& id, std::size_t choice_index);
  nlohmann::json post_action(const std::string& id, const ActionInstance& action);
  /// Throws UnknownSession, SessionFinished, InvalidChoice.
  PlayerProfile post_profile(const std::string& id, const std::array<int, 4>& answers);
  /// Persists the trace (once) and marks the session finished. Returns the trace id.
  std::string finish(const std::string& id);
  /// Persists and marks abandoned every active session idle for longer than the TTL.
  std::size_t reap_idle();

  /// Snapshot copy, for tests and diagnostics. Throws UnknownSession.
  Session snapshot(const std::string& id);
  std::size_t size() const;
  const WorldSpec& world() const { return world_; }

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  nlohmann::json present(const Session& s) const;
  nlohmann::json apply(Entry& e, const ActionInstance& action);
  std::string persist(Session& s);
  std::string new_id();

  const WorldSpec& world_;
  TraceStore store_;
  Clock clock_;
  std::chrono::milliseconds ttl_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace narrative
