#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "narrative/policy.hpp"

namespace narrative {

struct PlayerProfile {
  double familiarity = 0.0;
  double gaming_experience = 0.0;
  double preference_explore = 0.0;
  double persistence = 0.0;

  bool operator==(const PlayerProfile&) const = default;
  /// Throws std::invalid_argument unless every factor lies in [0,1].
  void validate() const;
  double factor(int i) const;
};

enum class ProfileFactor { Familiarity = 0, GamingExperience = 1, PreferenceExplore = 2, Persistence = 3 };
std::string to_string(ProfileFactor f);
/// Throws std::invalid_argument.
ProfileFactor parse_profile_factor(std::string_view s);

/// factor >= 0.5 -> 1
std::array<int, 4> binarize(const PlayerProfile& p);

enum class TraceSource { Human, Policy, SyntheticExpert };
std::string to_string(TraceSource s);
TraceSource parse_trace_source(std::string_view s);

struct TimedAction {
  ActionInstance action;
  std::int64_t t_ms = 0;

  bool operator==(const TimedAction&) const = default;
};

struct Trace {
  std::string trace_id;
  std::string player_id;
  TraceSource source = TraceSource::Human;
  std::string story_fingerprint;
  std::optional<PlayerProfile> profile;
  std::vector<TimedAction> actions;
  std::optional<std::string> end_reached;  // ending id

  bool operator==(const Trace&) const = default;
  std::vector<ActionInstance> action_list() const;
};

inline constexpr const char* kTraceSchemaVersion = "1";

nlohmann::json trace_to_json(const WorldSpec& world, const Trace& t);
/// Throws std::invalid_argument on malformed documents or a story mismatch.
Trace trace_from_json(const WorldSpec& world, const nlohmann::json& j);

/// Packages a policy rollout in trace form.
Trace trace_from_generated(const WorldSpec& world, const GeneratedTrace& g, std::string trace_id,
                           TraceSource source = TraceSource::Policy);

/// Plot-point ids discovered when replaying the trace.
std::vector<std::string> discovered_plot_points(const WorldSpec& world, const Trace& t);

/// Directory of `<source>/<trace_id>.json` documents.
class TraceStore {
 public:
  explicit TraceStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  /// Atomic single-document write (temp file + rename). Returns the path.
  std::filesystem::path save(const WorldSpec& world, const Trace& t) const;
  Trace load(const WorldSpec& world, const std::filesystem::path& file) const;
  /// All traces under the root, ordered by (source, trace_id).
  std::vector<Trace> load_all(const WorldSpec& world) const;

 private:
  std::filesystem::path root_;
};

struct TraceGroup {
  std::string group_id;
  enum class Criterion { ByEnd, ByProfile } criterion = Criterion::ByEnd;
  std::string ending;  // ByEnd
  ProfileFactor factor = ProfileFactor::Persistence;  // ByProfile
  int level = 0;
  std::vector<Trace> members;
};

/// One group per ending (world order) with the matching traces; non-ending
/// traces appear in no group. Group ids are "end:<ending id>".
std::vector<TraceGroup> group_by_end(const WorldSpec& world, const std::vector<Trace>& traces);

/// Splits traces sharing the modal combination of the other three binarized
/// factors by the binarized value of `factor`. Ids "profile:<factor>:<0|1>".
std::pair<TraceGroup, TraceGroup> group_by_profile(const std::vector<Trace>& traces, ProfileFactor factor);

/// Selects a group by id ("end:<id>" or "profile:<factor>:<level>").
/// Throws std::invalid_argument for malformed ids.
TraceGroup select_group(const WorldSpec& world, const std::vector<Trace>& traces, const std::string& group_id);

/// Replays every member. ReplayError messages name the offending trace.
std::vector<Demonstration> to_demonstrations(const WorldSpec& world, const TraceGroup& g);

/// Generator seed of expert trace `i` for a batch seed.
std::uint64_t expert_seed(std::uint64_t seed, std::uint64_t i);

/// Expert trace `index` of the batch `seed`: a sampled-mode rollout under `rm`
/// with id "expert-<seed>-<index>".
Trace synthesize_expert_trace(const WorldSpec& world, const RewardModel& rm, double beta, std::uint64_t seed,
                              int index, int horizon = 4, int cap = 100);

/// Traces 0..n-1 of the batch; deterministic in `seed`.
std::vector<Trace> synthesize_expert_traces(const WorldSpec& world, const RewardModel& rm, int n, double beta,
                                            std::uint64_t seed, int horizon = 4, int cap = 100);

}  // namespace narrative
