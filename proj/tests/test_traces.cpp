#include <gtest/gtest.h>

#include <fstream>

#include "narrative/errors.hpp"
#include "narrative/experiment.hpp"
#include "narrative/reachability.hpp"
#include "support.hpp"

using namespace narrative;
using testsupport::sample_world;
namespace fs = std::filesystem;

namespace {

Trace make_trace(const WorldSpec& w, const std::string& id, const std::vector<ActionInstance>& acts,
                 std::optional<PlayerProfile> profile = std::nullopt) {
  Trace t;
  t.trace_id = id;
  t.player_id = "p-" + id;
  t.story_fingerprint = w.fingerprint();
  t.profile = profile;
  std::int64_t ms = 0;
  for (const auto& a : acts) t.actions.push_back({a, ms += 1500});
  const int e = ending_reached(w, replay(w, acts).final_state());
  if (e >= 0) t.end_reached = w.plot_points[e].id;
  return t;
}

const std::vector<ActionInstance>& path_to(const std::string& ending) {
  static const auto report = validate_reachability(sample_world());
  return report.ending(ending)->path;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nirl-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Profile, BinarizeExamples) {
  EXPECT_EQ(binarize({0.7, 0.2, 0.9, 0.4}), (std::array<int, 4>{1, 0, 1, 0}));
  EXPECT_EQ(binarize({0.5, 0.5, 0.5, 0.5}), (std::array<int, 4>{1, 1, 1, 1}));
  EXPECT_EQ(binarize({0, 0, 0, 0}), (std::array<int, 4>{0, 0, 0, 0}));
}

TEST(Profile, ValidateRange) {
  EXPECT_NO_THROW((PlayerProfile{0, 1, 0.5, 0.25}.validate()));
  EXPECT_THROW((PlayerProfile{0, 1.1, 0.5, 0.25}.validate()), std::invalid_argument);
  EXPECT_THROW((PlayerProfile{-0.1, 1, 0.5, 0.25}.validate()), std::invalid_argument);
  EXPECT_EQ(parse_profile_factor("persistence"), ProfileFactor::Persistence);
  EXPECT_THROW(parse_profile_factor("luck"), std::invalid_argument);
}

TEST(TraceJson, RoundTripAndStoryCheck) {
  const auto& w = sample_world();
  const auto t = make_trace(w, "t1", path_to("End1_FindEvilGod"), PlayerProfile{0.25, 0.5, 0.75, 1.0});
  const auto j = trace_to_json(w, t);
  EXPECT_EQ(j.at("schema_version"), "1");
  EXPECT_TRUE(trace_from_json(w, j) == t);
  auto other = j;
  other["story_fingerprint"] = "ffffffffffffffff";
  EXPECT_THROW(trace_from_json(w, other), std::invalid_argument);
  auto broken = j;
  broken.erase("actions");
  EXPECT_THROW(trace_from_json(w, broken), std::invalid_argument);
}

TEST(TraceStore, SaveLoadAllOrdered) {
  const auto& w = sample_world();
  TempDir dir;
  TraceStore store(dir.path);
  std::vector<Trace> saved;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 6; ++i) {
    const auto d = testsupport::random_demo(w, rng, 12, "");
    std::vector<ActionInstance> acts;
    for (const auto& p : d.pairs) acts.push_back(p.second);
    auto t = make_trace(w, "h" + std::to_string(5 - i), acts);
    if (i % 3 == 1) t.source = TraceSource::Policy;
    if (i % 3 == 2) t.source = TraceSource::SyntheticExpert;
    const auto file = store.save(w, t);
    EXPECT_TRUE(fs::exists(file));
    EXPECT_EQ(file.parent_path().filename(), to_string(t.source));
    EXPECT_TRUE(store.load(w, file) == t);
    saved.push_back(t);
  }
  // stray documents outside the source folders are ignored
  std::ofstream(dir.path / "manifest.json") << "{}";
  const auto all = store.load_all(w);
  ASSERT_EQ(all.size(), saved.size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto a = std::make_pair(to_string(all[i - 1].source), all[i - 1].trace_id);
    const auto b = std::make_pair(to_string(all[i].source), all[i].trace_id);
    EXPECT_LT(a, b);
  }
}

TEST(TraceStore, CorruptTraceNamesFile) {
  const auto& w = sample_world();
  TempDir dir;
  fs::create_directories(dir.path / "human");
  std::ofstream(dir.path / "human" / "rotten.json") << "{ not json";
  TraceStore store(dir.path);
  try {
    store.load_all(w);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("rotten"), std::string::npos) << e.what();
  }
}

TEST(TraceReplay, DiscoveredPlotPointsMatchEngine) {
  const auto& w = sample_world();
  const auto t = make_trace(w, "t", path_to("End2_DiscoverBookInSewers"));
  const auto found = discovered_plot_points(w, t);
  const auto fs = replay(w, t.action_list()).final_state();
  std::size_t visited = 0;
  for (auto v : fs.plot_visited) visited += v;
  EXPECT_EQ(found.size(), visited);
  EXPECT_EQ(found.back(), "End2_DiscoverBookInSewers");
  EXPECT_EQ(t.end_reached, "End2_DiscoverBookInSewers");
}

TEST(Grouping, ByEndPartitionsEndingTraces) {
  const auto& w = sample_world();
  std::vector<Trace> traces;
  for (int i = 0; i < 5; ++i) traces.push_back(make_trace(w, "a" + std::to_string(i), path_to("End1_FindEvilGod")));
  for (int i = 0; i < 3; ++i)
    traces.push_back(make_trace(w, "b" + std::to_string(i), path_to("End2_DiscoverBookInSewers")));
  traces.push_back(make_trace(w, "none", {}));
  const auto groups = group_by_end(w, traces);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].group_id, "end:End1_FindEvilGod");
  EXPECT_EQ(groups[0].members.size(), 5u);
  EXPECT_EQ(groups[1].group_id, "end:End2_DiscoverBookInSewers");
  EXPECT_EQ(groups[1].members.size(), 3u);
  for (const auto& g : groups)
    for (const auto& m : g.members) {
      // the replay oracle agrees with the recorded ending
      const int e = ending_reached(w, replay(w, m.action_list()).final_state());
      EXPECT_EQ("end:" + w.plot_points[e].id, g.group_id);
    }
  EXPECT_EQ(select_group(w, traces, "end:End1_FindEvilGod").members.size(), 5u);
  EXPECT_THROW(select_group(w, traces, "colour:blue"), std::invalid_argument);
}

TEST(Grouping, PersistenceSplitHoldsOthersConstant) {
  const auto& w = sample_world();
  std::vector<Trace> traces;
  // modal combination of the other factors is (1, 0, 1)
  const std::vector<PlayerProfile> profiles = {{0.9, 0.1, 0.8, 0.9}, {0.6, 0.3, 0.7, 0.2}, {0.8, 0.0, 0.5, 0.6},
                                               {0.7, 0.2, 0.9, 0.1}, {0.1, 0.9, 0.1, 0.9}, {0.2, 0.8, 0.3, 0.3}};
  for (std::size_t i = 0; i < profiles.size(); ++i)
    traces.push_back(make_trace(w, "p" + std::to_string(i), {}, profiles[i]));
  traces.push_back(make_trace(w, "anon", {}));
  const auto [lo, hi] = group_by_profile(traces, ProfileFactor::Persistence);
  EXPECT_EQ(lo.group_id, "profile:persistence:0");
  EXPECT_EQ(hi.group_id, "profile:persistence:1");
  EXPECT_EQ(lo.members.size(), 2u);
  EXPECT_EQ(hi.members.size(), 2u);
  for (const auto* g : {&lo, &hi})
    for (const auto& m : g->members) {
      const auto b = binarize(*m.profile);
      EXPECT_EQ(b[3], g->level);
      EXPECT_EQ(b[0], 1);
      EXPECT_EQ(b[1], 0);
      EXPECT_EQ(b[2], 1);
    }
  EXPECT_EQ(select_group(w, traces, "profile:persistence:1").members.size(), 2u);
}

TEST(Grouping, DegenerateProfileSplits) {
  const auto& w = sample_world();
  std::vector<Trace> same;
  for (int i = 0; i < 4; ++i) same.push_back(make_trace(w, "s" + std::to_string(i), {}, PlayerProfile{1, 1, 1, 1}));
  const auto [lo, hi] = group_by_profile(same, ProfileFactor::Persistence);
  EXPECT_TRUE(lo.members.empty());
  EXPECT_EQ(hi.members.size(), 4u);

  std::vector<Trace> distinct;
  distinct.push_back(make_trace(w, "d0", {}, PlayerProfile{0, 0, 0, 0}));
  distinct.push_back(make_trace(w, "d1", {}, PlayerProfile{1, 0, 0, 1}));
  distinct.push_back(make_trace(w, "d2", {}, PlayerProfile{0, 1, 0, 0}));
  const auto [a, b] = group_by_profile(distinct, ProfileFactor::Persistence);
  EXPECT_LE(a.members.size(), 1u);
  EXPECT_LE(b.members.size(), 1u);
}

TEST(Demonstrations, PairCountsAndFidelity) {
  const auto& w = sample_world();
  TraceGroup g;
  g.group_id = "manual";
  g.members.push_back(make_trace(w, "ten", std::vector<ActionInstance>(path_to("End1_FindEvilGod").begin(),
                                                                       path_to("End1_FindEvilGod").begin() + 10)));
  g.members.push_back(make_trace(w, "fourteen", path_to("End2_DiscoverBookInSewers")));
  ASSERT_EQ(g.members[1].actions.size(), 14u);
  const auto demos = to_demonstrations(w, g);
  ASSERT_EQ(demos.size(), 2u);
  EXPECT_EQ(demos[0].pairs.size(), 10u);
  EXPECT_EQ(demos[1].pairs.size(), 14u);
  EXPECT_EQ(demos[1].source_trace_id, "fourteen");
  GameState s = initial_state(w);
  for (const auto& [st, a] : demos[1].pairs) {
    EXPECT_TRUE(st == s);
    s = apply_action(w, s, a).next_state;
  }
}

TEST(Demonstrations, CorruptMemberIsNamed) {
  const auto& w = sample_world();
  TraceGroup g;
  g.members.push_back(make_trace(w, "fine", {}));
  auto bad = make_trace(w, "bad-one", {});
  bad.actions.push_back({action_from_json(w, {{"kind", "take"}, {"target", "diary"}}), 0});
  g.members.push_back(bad);
  try {
    to_demonstrations(w, g);
    FAIL();
  } catch (const ReplayError& e) {
    EXPECT_NE(std::string(e.what()).find("bad-one"), std::string::npos);
  }
}

TEST(Synthesis, SameSeedSameTraces) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  const auto rm = ending_path_reward(w, fm, "End1_FindEvilGod");
  const auto a = synthesize_expert_traces(w, rm, 3, 5.0, 42, 2, 40);
  const auto b = synthesize_expert_traces(w, rm, 3, 5.0, 42, 2, 40);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[1].trace_id, "expert-42-1");
  EXPECT_EQ(a[0].source, TraceSource::SyntheticExpert);
  EXPECT_NE(expert_seed(42, 0), expert_seed(42, 1));
  EXPECT_NE(expert_seed(42, 0), expert_seed(43, 0));
}

TEST(Synthesis, BetaZeroWandersToTheCap) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  const auto rm = ending_path_reward(w, fm, "End1_FindEvilGod");
  int capped = 0;
  for (const auto& t : synthesize_expert_traces(w, rm, 10, 0.0, 7, 1, 100)) capped += t.actions.size() == 100;
  EXPECT_GE(capped, 8);
}

TEST(Synthesis, EndingGroupsReachTheirEndings) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  for (const std::string ending : {"End1_FindEvilGod", "End2_DiscoverBookInSewers"}) {
    ExpertSpec spec;
    spec.ending_id = ending;
    const auto batch = synthesize_ending_group(w, fm, spec);
    ASSERT_EQ(batch.traces.size(), 5u);
    for (const auto& t : batch.traces) {
      EXPECT_EQ(t.end_reached, ending);
      EXPECT_EQ(ending_reached(w, replay(w, t.action_list()).final_state()), w.plot_index(ending));
    }
    std::printf("[ rate     ] %s: %d of %d candidates reached the ending\n", ending.c_str(), 5, batch.candidates);
  }
}
