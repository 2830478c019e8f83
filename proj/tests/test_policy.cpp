#include <gtest/gtest.h>

#include "narrative/errors.hpp"
#include "narrative/policy.hpp"
#include "narrative/reachability.hpp"
#include "support.hpp"

using namespace narrative;
using testsupport::sample_world;

namespace {

int feature_of_ending(const FeatureMap& fm, const WorldSpec& w, const std::string& id) {
  for (std::size_t i = 0; i < fm.size(); ++i)
    if (fm.descriptors()[i].kind == FeatureDescriptor::Kind::EndingReached &&
        w.plot_points[fm.descriptors()[i].index].id == id)
      return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST(Policy, TiesGoToFirstCanonicalAction) {
  const auto& w = sample_world();
  const TrainedPolicy p{RewardModel::zero(FeatureMap(w)), 2, 1.0};
  const auto s = initial_state(w);
  EXPECT_TRUE(choose_action(p, w, s) == applicable_actions(w, s).front());
}

TEST(Policy, GreedyTakesTheEndingOneStepAway) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  const auto rep = validate_reachability(w);
  const auto* e1 = rep.ending("End1_FindEvilGod");
  ASSERT_TRUE(e1 && e1->reachable);
  std::vector<ActionInstance> prefix(e1->path.begin(), e1->path.end() - 1);
  const auto s = replay(w, prefix).final_state();
  ASSERT_FALSE(is_terminal(w, s));
  TrainedPolicy p{RewardModel::zero(fm), 1, 1.0};
  p.reward_model.weights[feature_of_ending(fm, w, "End1_FindEvilGod")] = 1.0;
  EXPECT_TRUE(choose_action(p, w, s) == e1->path.back());
}

TEST(Policy, SampledModeNeedsGeneratorAndIsSeedDeterministic) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 wr(3);
  TrainedPolicy p{RewardModel{fm, testsupport::random_weights(wr, fm.size())}, 2, 1.0, PolicyMode::Sampled, 9};
  const auto s = initial_state(w);
  EXPECT_THROW(choose_action(p, w, s), std::invalid_argument);
  for (int i = 0; i < 20; ++i) {
    std::mt19937_64 a(i), b(i);
    EXPECT_TRUE(choose_action(p, w, s, &a) == choose_action(p, w, s, &b));
  }
}

TEST(Policy, SampledFrequenciesFollowBoltzmann) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 wr(5);
  TrainedPolicy p{RewardModel{fm, testsupport::random_weights(wr, fm.size())}, 1, 3.0, PolicyMode::Sampled};
  const auto s = initial_state(w);
  const auto q = soft_q(w, p.reward_model, s, 1, p.beta);
  const auto pi = boltzmann_policy(q.values, p.beta);
  std::vector<int> hits(pi.size());
  std::mt19937_64 rng(7);
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto a = choose_action(p, w, s, &rng);
    ++hits[std::find(q.actions.begin(), q.actions.end(), a) - q.actions.begin()];
  }
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double sd = std::sqrt(pi[i] * (1 - pi[i]) / n);
    EXPECT_NEAR(hits[i] / double(n), pi[i], 5 * sd + 1e-12);
  }
}

TEST(Policy, TerminalStateThrows) {
  const auto& w = sample_world();
  const auto rep = validate_reachability(w);
  const auto s = replay(w, rep.ending("End1_FindEvilGod")->path).final_state();
  const TrainedPolicy p{RewardModel::zero(FeatureMap(w)), 1, 1.0};
  EXPECT_THROW(choose_action(p, w, s), TerminalState);
}

TEST(Rollout, CapOfOneRecordsOneAction) {
  const auto& w = sample_world();
  const TrainedPolicy p{RewardModel::zero(FeatureMap(w)), 1, 1.0};
  EXPECT_EQ(rollout(p, w, 1).actions.size(), 1u);
}

TEST(Rollout, ZeroWeightGreedyIsDeterministicAndCapped) {
  const auto& w = sample_world();
  const TrainedPolicy p{RewardModel::zero(FeatureMap(w)), 2, 0.1};
  const auto a = rollout(p, w, 100);
  const auto b = rollout(p, w, 100);
  EXPECT_EQ(a.actions, b.actions);
  if (!a.end_reached) {
    EXPECT_EQ(a.actions.size(), 100u);
  }
}

TEST(Rollout, ReplaysToTheSameOutcome) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 wr(11);
  for (int t = 0; t < 10; ++t) {
    const auto mode = t % 2 ? PolicyMode::Sampled : PolicyMode::Greedy;
    const TrainedPolicy p{RewardModel{fm, testsupport::random_weights(wr, fm.size())}, 2, 2.0, mode,
                          static_cast<std::uint64_t>(t)};
    const auto g = rollout(p, w, 60);
    ASSERT_LE(g.actions.size(), 60u);
    const auto r = replay(w, g.actions);
    std::vector<int> discovered;
    for (const auto& st : r.steps)
      discovered.insert(discovered.end(), st.outcome.newly_visited_plot_points.begin(),
                        st.outcome.newly_visited_plot_points.end());
    EXPECT_EQ(discovered, g.plot_points_discovered);
    const int end = ending_reached(w, r.final_state());
    EXPECT_EQ(g.end_reached.value_or(-1), end);
    if (g.end_reached) {
      EXPECT_TRUE(is_terminal(w, r.final_state()));
    }
    EXPECT_EQ(rollout(p, w, 60).actions, g.actions);
  }
}

TEST(Rollout, Uniform01Range) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
