#include "narrative/traces.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "narrative/errors.hpp"

namespace narrative {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kFactorNames{"familiarity", "gaming_experience", "preference_explore",
                                                  "persistence"};

}  // namespace

double PlayerProfile::factor(int i) const {
  switch (i) {
    case 0: return familiarity;
    case 1: return gaming_experience;
    case 2: return preference_explore;
    case 3: return persistence;
  }
  throw std::out_of_range("profile factor index");
}

void PlayerProfile::validate() const {
  for (int i = 0; i < 4; ++i) {
    const double v = factor(i);
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string("profile ") + kFactorNames[i] + " outside [0,1]");
  }
}

std::string to_string(ProfileFactor f) { return kFactorNames[static_cast<int>(f)]; }

ProfileFactor parse_profile_factor(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (s == kFactorNames[i]) return static_cast<ProfileFactor>(i);
  throw std::invalid_argument("unknown profile factor: " + std::string(s));
}

std::array<int, 4> binarize(const PlayerProfile& p) {
  std::array<int, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = p.factor(i) >= 0.5 ? 1 : 0;
  return out;
}

std::string to_string(TraceSource s) {
  switch (s) {
    case TraceSource::Human: return "human";
    case TraceSource::Policy: return "policy";
    case TraceSource::SyntheticExpert: return "synthetic-expert";
  }
  return "human";
}

TraceSource parse_trace_source(std::string_view s) {
  if (s == "human") return TraceSource::Human;
  if (s == "policy") return TraceSource::Policy;
  if (s == "synthetic-expert") return TraceSource::SyntheticExpert;
  throw std::invalid_argument("unknown trace source: " + std::string(s));
}

std::vector<ActionInstance> Trace::action_list() const {
  std::vector<ActionInstance> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(a.action);
  return out;
}

json trace_to_json(const WorldSpec& world, const Trace& t) {
  json j;
  j["schema_version"] = kTraceSchemaVersion;
  j["trace_id"] = t.trace_id;
  j["player_id"] = t.player_id;
  j["source"] = to_string(t.source);
  j["story_fingerprint"] = t.story_fingerprint;
  if (t.profile) {
    json p;
    for (int i = 0; i < 4; ++i) p[kFactorNames[i]] = t.profile->factor(i);
    j["profile"] = p;
  }
  json acts = json::array();
  for (const auto& a : t.actions) {
    json ja = action_to_json(world, a.action);
    ja["t_ms"] = a.t_ms;
    acts.push_back(std::move(ja));
  }
  j["actions"] = std::move(acts);
  if (t.end_reached) j["end_reached"] = *t.end_reached;
  return j;
}

Trace trace_from_json(const WorldSpec& world, const json& j) {
  try {
    if (j.at("schema_version").get<std::string>() != kTraceSchemaVersion)
      throw std::invalid_argument("unsupported trace schema_version");
    Trace t;
    t.trace_id = j.at("trace_id").get<std::string>();
    t.player_id = j.value("player_id", std::string{});
    t.source = parse_trace_source(j.at("source").get<std::string>());
    t.story_fingerprint = j.at("story_fingerprint").get<std::string>();
    if (t.story_fingerprint != world.fingerprint())
      throw std::invalid_argument("trace " + t.trace_id + " was recorded against a different story");
    if (j.contains("profile")) {
      const auto& p = j["profile"];
      PlayerProfile prof{p.at("familiarity").get<double>(), p.at("gaming_experience").get<double>(),
                         p.at("preference_explore").get<double>(), p.at("persistence").get<double>()};
      prof.validate();
      t.profile = prof;
    }
    for (const auto& ja : j.at("actions")) t.actions.push_back({action_from_json(world, ja), ja.value("t_ms", std::int64_t{0})});
    if (j.contains("end_reached") && !j["end_reached"].is_null()) t.end_reached = j["end_reached"].get<std::string>();
    return t;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed trace: ") + e.what());
  }
}

Trace trace_from_generated(const WorldSpec& world, const GeneratedTrace& g, std::string trace_id, TraceSource source) {
  Trace t;
  t.trace_id = std::move(trace_id);
  t.player_id = to_string(source);
  t.source = source;
  t.story_fingerprint = world.fingerprint();
  std::int64_t ms = 0;
  for (const auto& a : g.actions) t.actions.push_back({a, ms++});
  if (g.end_reached) t.end_reached = world.plot_points[*g.end_reached].id;
  return t;
}

std::vector<std::string> discovered_plot_points(const WorldSpec& world, const Trace& t) {
  const auto result = replay(world, t.action_list());
  std::vector<std::string> out;
  for (const auto& step : result.steps)
    for (int p : step.outcome.newly_visited_plot_points) out.push_back(world.plot_points[p].id);
  return out;
}

TraceStore::TraceStore(fs::path root) : root_(std::move(root)) {}

fs::path TraceStore::save(const WorldSpec& world, const Trace& t) const {
  if (t.trace_id.empty() || t.trace_id.find_first_of("/\\") != std::string::npos || t.trace_id.front() == '.')
    throw std::invalid_argument("invalid trace id: " + t.trace_id);
  const fs::path dir = root_ / to_string(t.source);
  fs::create_directories(dir);
  const fs::path target = dir / (t.trace_id + ".json");
  const fs::path tmp = dir / ("." + t.trace_id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << trace_to_json(world, t).dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
  return target;
}

Trace TraceStore::load(const WorldSpec& world, const fs::path& file) const {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(file.string() + ": " + e.what());
  }
  return trace_from_json(world, j);
}

std::vector<Trace> TraceStore::load_all(const WorldSpec& world) const {
  if (!fs::is_directory(root_)) throw std::invalid_argument("trace directory not found: " + root_.string());
  std::vector<fs::path> files;
  for (auto source : {TraceSource::Human, TraceSource::Policy, TraceSource::SyntheticExpert}) {
    const fs::path dir = root_ / to_string(source);
    if (!fs::is_directory(dir)) continue;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto& p = entry.path();
      if (entry.is_regular_file() && p.extension() == ".json" && p.filename().string().front() != '.')
        files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Trace> out;
  for (const auto& f : files) out.push_back(load(world, f));
  std::sort(out.begin(), out.end(), [](const Trace& a, const Trace& b) {
    return std::pair(to_string(a.source), a.trace_id) < std::pair(to_string(b.source), b.trace_id);
  });
  return out;
}

std::vector<TraceGroup> group_by_end(const WorldSpec& world, const std::vector<Trace>& traces) {
  std::vector<TraceGroup> out;
  for (int e : world.endings()) {
    TraceGroup g;
    g.criterion = TraceGroup::Criterion::ByEnd;
    g.ending = world.plot_points[e].id;
    g.group_id = "end:" + g.ending;
    for (const auto& t : traces)
      if (t.end_reached && *t.end_reached == g.ending) g.members.push_back(t);
    out.push_back(std::move(g));
  }
  return out;
}

std::pair<TraceGroup, TraceGroup> group_by_profile(const std::vector<Trace>& traces, ProfileFactor factor) {
  const int f = static_cast<int>(factor);
  auto others = [f](const std::array<int, 4>& b) {
    std::array<int, 3> o{};
    for (int i = 0, k = 0; i < 4; ++i)
      if (i != f) o[k++] = b[i];
    return o;
  };
  std::map<std::array<int, 3>, int> counts;
  for (const auto& t : traces)
    if (t.profile) ++counts[others(binarize(*t.profile))];

  TraceGroup low, high;
  for (int level = 0; level < 2; ++level) {
    auto& g = level ? high : low;
    g.criterion = TraceGroup::Criterion::ByProfile;
    g.factor = factor;
    g.level = level;
    g.group_id = "profile:" + to_string(factor) + ":" + std::to_string(level);
  }
  if (counts.empty()) return {low, high};
  // most frequent combination; ties to the lexicographically smallest
  auto modal = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > modal->second) modal = it;
  for (const auto& t : traces) {
    if (!t.profile) continue;
    const auto b = binarize(*t.profile);
    if (others(b) != modal->first) continue;
    (b[f] ? high : low).members.push_back(t);
  }
  return {low, high};
}

TraceGroup select_group(const WorldSpec& world, const std::vector<Trace>& traces, const std::string& group_id) {
  if (group_id.rfind("end:", 0) == 0) {
    const std::string ending = group_id.substr(4);
    const int p = world.plot_index(ending);
    if (p < 0 || !world.plot_points[p].is_ending) throw std::invalid_argument("unknown ending: " + ending);
    for (auto& g : group_by_end(world, traces))
      if (g.ending == ending) return g;
  }
  if (group_id.rfind("profile:", 0) == 0) {
    const auto rest = group_id.substr(8);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("group id needs profile:<factor>:<0|1>");
    const auto factor = parse_profile_factor(rest.substr(0, colon));
    const auto level = rest.substr(colon + 1);
    if (level != "0" && level != "1") throw std::invalid_argument("profile level must be 0 or 1");
    auto [low, high] = group_by_profile(traces, factor);
    return level == "1" ? high : low;
  }
  throw std::invalid_argument("unrecognised group id: " + group_id);
}

std::vector<Demonstration> to_demonstrations(const WorldSpec& world, const TraceGroup& g) {
  std::vector<Demonstration> out;
  for (const auto& t : g.members) {
    ReplayResult r;
    try {
      r = replay(world, t.action_list());
    } catch (const ReplayError& e) {
      throw ReplayError(e.index(), "trace " + t.trace_id + ": " + e.what());
    }
    Demonstration d;
    d.source_trace_id = t.trace_id;
    d.pairs.reserve(r.steps.size());
    for (auto& step : r.steps) d.pairs.emplace_back(std::move(step.state), step.action);
    out.push_back(std::move(d));
  }
  return out;
}

std::uint64_t expert_seed(std::uint64_t seed, std::uint64_t i) {
  // splitmix64 of (seed, i)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trace synthesize_expert_trace(const WorldSpec& world, const RewardModel& rm, double beta, std::uint64_t seed,
                              int index, int horizon, int cap) {
  TrainedPolicy p{rm, horizon, beta, PolicyMode::Sampled, expert_seed(seed, static_cast<std::uint64_t>(index))};
  auto t = trace_from_generated(world, rollout(p, world, cap),
                                "expert-" + std::to_string(seed) + "-" + std::to_string(index),
                                TraceSource::SyntheticExpert);
  t.player_id = "expert";
  return t;
}

std::vector<Trace> synthesize_expert_traces(const WorldSpec& world, const RewardModel& rm, int n, double beta,
                                            std::uint64_t seed, int horizon, int cap) {
  if (n < 1) throw std::invalid_argument("synthesize: n must be >= 1");
  std::vector<Trace> out;
  for (int i = 0; i < n; ++i) out.push_back(synthesize_expert_trace(world, rm, beta, seed, i, horizon, cap));
  return out;
}

}  // namespace narrative
