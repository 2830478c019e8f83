#include <gtest/gtest.h>

#include "narrative/errors.hpp"
#include "narrative/kernels.hpp"
#include "narrative/reachability.hpp"
#include "support.hpp"

using namespace narrative;
using testsupport::sample_world;

namespace {

// Projection oracle: bisection on the soft threshold tau, no sorting.
std::vector<double> project_oracle(const std::vector<double>& v, double r) {
  double l1 = 0;
  for (double x : v) l1 += std::abs(x);
  if (l1 <= r) return v;
  double lo = 0, hi = 0;
  for (double x : v) hi = std::max(hi, std::abs(x));
  for (int it = 0; it < 200; ++it) {
    const double tau = 0.5 * (lo + hi);
    double s = 0;
    for (double x : v) s += std::max(std::abs(x) - tau, 0.0);
    (s > r ? lo : hi) = tau;
  }
  const double tau = 0.5 * (lo + hi);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::copysign(std::max(std::abs(v[i]) - tau, 0.0), v[i]);
  return out;
}

ActionInstance act(const WorldSpec& w, const std::string& kind, const std::string& target) {
  return action_from_json(w, {{"kind", kind}, {"target", target}});
}

}  // namespace

TEST(Features, SampleLayout) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  EXPECT_EQ(fm.size(), w.plot_points.size() + w.endings().size() + 4);
  EXPECT_EQ(fm.size(), 16u);
  EXPECT_GE(fm.find("frac_objects_seen"), 0);
  EXPECT_GE(fm.find("frac_topics_known"), 0);
  EXPECT_GE(fm.find("frac_locations_available"), 0);
  EXPECT_GE(fm.find("inventory_fill"), 0);
  EXPECT_EQ(fm.find("nonsense"), -1);
}

TEST(Features, InitialStateHasNoPlotIndicators) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  const auto f = phi(w, initial_state(w), fm);
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const auto k = fm.descriptors()[i].kind;
    if (k == FeatureDescriptor::Kind::PlotVisited || k == FeatureDescriptor::Kind::EndingReached) {
      EXPECT_EQ(f[i], 0.0) << fm.descriptors()[i].name;
    }
  }
}

TEST(Features, ObjectsSeenFractionOnReachableState) {
  // doormat, brass_key and newspaper examined: 3 of the story's 10 objects.
  const auto& w = sample_world();
  ASSERT_EQ(w.objects.size(), 10u);
  const FeatureMap fm(w);
  const auto r = replay(w, {act(w, "examine", "doormat"), act(w, "use", "doormat"), act(w, "examine", "brass_key"),
                            act(w, "goto", "street"), act(w, "goto", "shop"), act(w, "examine", "newspaper")});
  const auto f = phi(w, r.final_state(), fm);
  EXPECT_DOUBLE_EQ(f[fm.find("frac_objects_seen")], 0.3);
  // entrance, hallway, street, shop reachable so far: 4 of 7
  EXPECT_DOUBLE_EQ(f[fm.find("frac_locations_available")], 4.0 / 7.0);
}

TEST(Features, RangeOverRandomReachableStates) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 rng(41);
  int states = 0;
  while (states < 10000) {
    const auto d = testsupport::random_demo(w, rng, 60, "x");
    for (const auto& [s, a] : d.pairs) {
      const auto f = phi(w, s, fm);
      for (std::size_t i = 0; i < f.size(); ++i) {
        ASSERT_GE(f[i], 0.0);
        ASSERT_LE(f[i], 1.0);
        const auto k = fm.descriptors()[i].kind;
        if (k == FeatureDescriptor::Kind::PlotVisited || k == FeatureDescriptor::Kind::EndingReached) {
          ASSERT_TRUE(f[i] == 0.0 || f[i] == 1.0);
        }
      }
      ++states;
    }
  }
}

TEST(Features, EndingIndicatorAndUnitReward) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  const auto rep = validate_reachability(w);
  const auto* e1 = rep.ending("End1_FindEvilGod");
  ASSERT_TRUE(e1 && e1->reachable);
  const auto s = replay(w, e1->path).final_state();
  const auto f = phi(w, s, fm);
  int ending_feature = -1;
  for (std::size_t i = 0; i < fm.size(); ++i)
    if (fm.descriptors()[i].kind == FeatureDescriptor::Kind::EndingReached &&
        w.plot_points[fm.descriptors()[i].index].id == "End1_FindEvilGod")
      ending_feature = static_cast<int>(i);
  ASSERT_GE(ending_feature, 0);
  EXPECT_EQ(f[ending_feature], 1.0);

  auto rm = RewardModel::zero(fm);
  EXPECT_EQ(reward(rm, w, s), 0.0);
  rm.weights[ending_feature] = 1.0;
  EXPECT_EQ(reward(rm, w, s), 1.0);
}

TEST(Features, RewardIsDotProductAndLipschitz) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 rng(43);
  for (int t = 0; t < 200; ++t) {
    const auto d = testsupport::random_demo(w, rng, 25, "x");
    if (d.pairs.empty()) continue;
    const auto& s = d.pairs.back().first;
    RewardModel a{fm, testsupport::random_weights(rng, fm.size())};
    RewardModel b{fm, testsupport::random_weights(rng, fm.size())};
    const double ra = reward(a, w, s);
    EXPECT_NEAR(ra, testsupport::naive_reward(w, fm, a.weights, s), 1e-14);
    EXPECT_LE(std::abs(ra), l1_norm(a.weights) + 1e-15);
    std::vector<double> diff(fm.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.weights[i] - b.weights[i];
    EXPECT_LE(std::abs(ra - reward(b, w, s)), l1_norm(diff) + 1e-14);
  }
}

TEST(Features, RewardDimensionMismatch) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  RewardModel rm{fm, {0.5, 0.5}};
  EXPECT_THROW(reward(rm, w, initial_state(w)), DimensionMismatch);
}

TEST(Projection, WorkedExamples) {
  const std::vector<double> inside{0.2, -0.3, 0.1};
  EXPECT_EQ(project_l1(inside), inside);
  const auto axis = project_l1(std::vector<double>{2.0, 0.0});
  EXPECT_DOUBLE_EQ(axis[0], 1.0);
  EXPECT_DOUBLE_EQ(axis[1], 0.0);
  const auto diag = project_l1(std::vector<double>{0.8, 0.8});
  EXPECT_NEAR(diag[0], 0.5, 1e-15);
  EXPECT_NEAR(diag[1], 0.5, 1e-15);
}

TEST(Projection, DiagonalExampleByBruteForceGrid) {
  // minimise distance to (0.8, 0.8) over a 1e-3 grid of the unit L1 ball
  double best = INFINITY, bx = 0, by = 0;
  for (int i = -1000; i <= 1000; ++i)
    for (int j = -1000; j <= 1000; ++j) {
      const double x = i * 1e-3, y = j * 1e-3;
      if (std::abs(x) + std::abs(y) > 1.0 + 1e-12) continue;
      const double d = (x - 0.8) * (x - 0.8) + (y - 0.8) * (y - 0.8);
      if (d < best) best = d, bx = x, by = y;
    }
  const auto p = project_l1(std::vector<double>{0.8, 0.8});
  EXPECT_NEAR(p[0], bx, 1e-3);
  EXPECT_NEAR(p[1], by, 1e-3);
}

TEST(Projection, MatchesBisectionOracleAndKkt) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> rad(0.1, 3.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> v(1 + rng() % 20);
    for (auto& x : v) x = g(rng);
    const double r = rad(rng);
    const auto p = project_l1(v, r);
    const auto o = project_oracle(v, r);
    ASSERT_EQ(p.size(), v.size());
    ASSERT_LE(l1_norm(p), r + 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_NEAR(p[i], o[i], 1e-9);
    // KKT: on the boundary, the residual v - p has a common magnitude tau on the support
    // and is bounded by tau elsewhere
    if (l1_norm(v) > r) {
      double tau = -1;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (p[i] != 0.0) {
          ASSERT_GE(p[i] * v[i], 0.0);
          if (tau < 0) tau = std::abs(v[i] - p[i]);
          ASSERT_NEAR(std::abs(v[i] - p[i]), tau, 1e-9);
        }
      for (std::size_t i = 0; i < v.size(); ++i)
        if (p[i] == 0.0) {
          ASSERT_LE(std::abs(v[i]), tau + 1e-9);
        }
    }
    const auto pp = project_l1(p, r);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(pp[i], p[i], 1e-15);
  }
}

TEST(Weights, JsonRoundTripAndFingerprintCheck) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  std::mt19937_64 rng(53);
  RewardModel rm{fm, testsupport::random_weights(rng, fm.size())};
  const auto j = weights_to_json(w, rm);
  const auto back = weights_from_json(w, j);
  EXPECT_EQ(back.weights, rm.weights);
  EXPECT_TRUE(back.feature_map == fm);
  auto bad = j;
  bad["feature_map_fingerprint"] = "0000000000000000";
  EXPECT_THROW(weights_from_json(w, bad), std::invalid_argument);
}

TEST(Weights, ExpertRewardHasUnitNorm) {
  const auto& w = sample_world();
  const FeatureMap fm(w);
  for (int e : w.endings()) {
    const auto rm = ending_path_reward(w, fm, w.plot_points[e].id);
    EXPECT_NEAR(l1_norm(rm.weights), 1.0, 1e-12);
    EXPECT_LT(rm.weights[fm.find("frac_locations_available")], 0.0);
  }
}

TEST(Kernels, ScalarAndAvx2Agree) {
  const auto* avx = kernels::avx2_table();
  if (!avx) GTEST_SKIP() << "AVX2 not available on this machine";
  const auto& sc = kernels::scalar_table();
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n = 0; n < 70; ++n) {
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double tol = 1e-14 * static_cast<double>(n + 1);
    EXPECT_NEAR(sc.dot(a.data(), b.data(), n), avx->dot(a.data(), b.data(), n), tol) << n;
    if (n > 0) {
      EXPECT_EQ(sc.max(a.data(), n), avx->max(a.data(), n)) << n;
    }

    auto y1 = b, y2 = b;
    sc.axpy(0.37, a.data(), y1.data(), n);
    avx->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);

    auto s1 = a, s2 = a;
    sc.scale(-1.5, s1.data(), n);
    avx->scale(-1.5, s2.data(), n);
    EXPECT_EQ(s1, s2);

    for (std::size_t rows : {1u, 3u, 8u}) {
      std::vector<double> m(rows * n), o1(rows), o2(rows);
      for (auto& x : m) x = u(rng);
      sc.gemv(m.data(), rows, n, a.data(), o1.data());
      avx->gemv(m.data(), rows, n, a.data(), o2.data());
      for (std::size_t r = 0; r < rows; ++r) EXPECT_NEAR(o1[r], o2[r], tol);
    }
  }
}

TEST(Kernels, ScalarMatchesPlainLoops) {
  const auto& sc = kernels::scalar_table();
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(37), b(37);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  double d = 0, m = -INFINITY;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i], m = std::max(m, a[i]);
  EXPECT_NEAR(sc.dot(a.data(), b.data(), a.size()), d, 1e-14);
  EXPECT_EQ(sc.max(a.data(), a.size()), m);
}

TEST(Kernels, SelectByName) {
  const std::string before = kernels::active().name;
  EXPECT_TRUE(kernels::select("scalar"));
  EXPECT_STREQ(kernels::active().name, "scalar");
  EXPECT_FALSE(kernels::select("quantum"));
  EXPECT_TRUE(kernels::select(before));
}
