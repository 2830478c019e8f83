#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "narrative/engine.hpp"
#include "narrative/features.hpp"
#include "narrative/rhirl.hpp"

namespace testsupport {

using namespace narrative;
using nlohmann::json;

inline const WorldSpec& sample_world() {
  static const WorldSpec w = load_world_file(sample_story_path());
  return w;
}

// Small random story: a chain of locations with extra edges, a few takeable
// objects, an optional locked container, one character and 2-4 plot points,
// the last one an ending. k = plots + 1 + 4 <= 9.
inline json random_world_json(std::mt19937_64& rng, int max_locations = 5) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const int L = 2 + pick(max_locations - 1);
  std::vector<std::vector<int>> adj(L);
  auto link = [&](int a, int b) {
    if (a == b || std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (int i = 0; i + 1 < L; ++i) link(i, i + 1);
  for (int e = pick(3); e > 0; --e) link(pick(L), pick(L));

  json locs = json::array();
  for (int i = 0; i < L; ++i) {
    json a = json::array();
    for (int b : adj[i]) a.push_back("l" + std::to_string(b));
    locs.push_back({{"id", "l" + std::to_string(i)}, {"adjacent", a}});
  }

  json objs = json::array();
  const int n_obj = 1 + pick(3);
  for (int i = 0; i < n_obj; ++i)
    objs.push_back({{"id", "o" + std::to_string(i)}, {"location", "l" + std::to_string(pick(L))}, {"can_take", true}});
  const bool container = pick(2) == 0;
  if (container) {
    objs.push_back({{"id", "box"}, {"location", "l" + std::to_string(pick(L))}, {"can_open", true},
                    {"locked", true}, {"key", "o0"}});
    objs.push_back({{"id", "gem"}, {"location", "box"}, {"can_take", true}});
  }
  const bool shop = pick(2) == 0;
  if (shop) objs.push_back({{"id", "ware"}, {"location", "c"}, {"can_take", true}, {"price", 1}});

  json chars = json::array();
  json sells = json::array();
  if (shop) sells.push_back("ware");
  chars.push_back({{"id", "c"},
                   {"location", "l" + std::to_string(pick(L))},
                   {"topics_responded", {"t0", "t1"}},
                   {"sells", sells},
                   {"wants", {"o" + std::to_string(pick(n_obj))}}});

  json topics = json::array();
  topics.push_back({{"id", "t0"}, {"known", true}});
  topics.push_back({{"id", "t1"}, {"prerequisites", {"t0"}}});

  json plots = json::array();
  const int P = 2 + pick(3);
  for (int i = 0; i < P; ++i) {
    json trig;
    const bool last = i == P - 1;
    switch (last ? 0 : pick(4)) {
      case 0: trig = {{"at", "l" + std::to_string(1 + pick(L - 1))}}; break;
      case 1: trig = {{"has", "o" + std::to_string(pick(n_obj))}}; break;
      case 2: trig = {{"mentioned", "t" + std::to_string(pick(2))}}; break;
      default:
        trig = {{"last_action", {{"kind", "examine"}, {"target", "o" + std::to_string(pick(n_obj))}}}};
        break;
    }
    json p = {{"id", "p" + std::to_string(i)}, {"trigger", trig}, {"ending", last}};
    if (i > 0 && pick(2) == 0) p["prerequisites"] = {"p" + std::to_string(pick(i))};
    plots.push_back(p);
  }

  return {{"schema_version", "1"}, {"start_location", "l0"}, {"locations", locs}, {"objects", objs},
          {"characters", chars},   {"topics", topics},      {"plot_points", plots}};
}

inline WorldSpec random_world(std::mt19937_64& rng, int max_locations = 5) {
  return load_world(random_world_json(rng, max_locations).dump());
}

// Four rooms in a ring with a locked chest, a key, a seller and topics: every
// action kind has cases where it applies and where it does not.
inline WorldSpec toy_world() {
  const char* src = R"({
    "schema_version": "1",
    "start_location": "a",
    "locations": [
      {"id": "a", "adjacent": ["b", "d"]},
      {"id": "b", "adjacent": ["a", "c"]},
      {"id": "c", "adjacent": ["b", "d"]},
      {"id": "d", "adjacent": ["c", "a"]}
    ],
    "objects": [
      {"id": "key", "location": "b", "can_take": true},
      {"id": "chest", "location": "c", "can_open": true, "locked": true, "key": "key"},
      {"id": "coin", "location": "chest", "can_take": true},
      {"id": "rock", "location": "a"},
      {"id": "lamp", "location": "merchant", "can_take": true, "price": 2},
      {"id": "note", "location": "d", "can_take": true, "visible": false}
    ],
    "characters": [
      {"id": "merchant", "location": "d", "topics_responded": ["hello", "secret"],
       "sells": ["lamp"], "wants": ["coin"],
       "on_receive": {"learn": ["secret"], "text": "Thanks."}}
    ],
    "topics": [
      {"id": "hello", "known": true},
      {"id": "secret"}
    ],
    "plot_points": [
      {"id": "GotCoin", "trigger": {"has": "coin"}},
      {"id": "Done", "trigger": {"mentioned": "secret"}, "prerequisites": ["GotCoin"], "ending": true}
    ]
  })";
  return load_world(src);
}

// Every reachable state, by breadth-first search over applicable actions.
inline std::vector<GameState> all_reachable(const WorldSpec& w, std::size_t limit = 200000) {
  std::vector<GameState> out{initial_state(w)};
  std::unordered_map<std::string, int> seen{{out[0].key(), 0}};
  for (std::size_t i = 0; i < out.size() && out.size() < limit; ++i) {
    const GameState s = out[i];
    for (const auto& a : applicable_actions(w, s)) {
      GameState n = apply_action(w, s, a).next_state;
      if (seen.emplace(n.key(), static_cast<int>(out.size())).second) out.push_back(std::move(n));
    }
  }
  return out;
}

// Random walk of at most `len` actions from the initial state.
inline Demonstration random_demo(const WorldSpec& w, std::mt19937_64& rng, int len, const std::string& id) {
  Demonstration d;
  d.source_trace_id = id;
  GameState s = initial_state(w);
  for (int i = 0; i < len && !is_terminal(w, s); ++i) {
    auto acts = applicable_actions(w, s);
    if (acts.empty()) break;
    const auto& a = acts[rng() % acts.size()];
    d.pairs.emplace_back(s, a);
    s = apply_action(w, s, a).next_state;
  }
  return d;
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v(k);
  double l1 = 0.0;
  for (auto& x : v) l1 += std::abs(x = g(rng));
  const double r = u(rng);
  for (auto& x : v) x *= r / l1;
  return v;
}

// Plain-loop soft value recursion, no memoisation and no shared kernels.
inline double naive_reward(const WorldSpec& w, const FeatureMap& fm, const std::vector<double>& wt,
                           const GameState& s) {
  const auto f = phi(w, s, fm);
  double r = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) r += wt[i] * f[i];
  return r;
}

inline std::vector<double> naive_softmax(const std::vector<double>& q, double beta) {
  double m = -INFINITY;
  for (double x : q) m = std::max(m, x);
  std::vector<double> p(q.size());
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) z += (p[i] = std::exp(beta * (q[i] - m)));
  for (auto& x : p) x /= z;
  return p;
}

inline std::vector<double> naive_q(const WorldSpec& w, const FeatureMap& fm, const std::vector<double>& wt,
                                   const GameState& s, int depth, double beta);

inline double naive_v(const WorldSpec& w, const FeatureMap& fm, const std::vector<double>& wt, const GameState& s,
                      int depth, double beta) {
  if (depth == 0 || is_terminal(w, s)) return 0.0;
  const auto q = naive_q(w, fm, wt, s, depth, beta);
  if (q.empty()) return 0.0;
  const auto p = naive_softmax(q, beta);
  double v = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) v += p[i] * q[i];
  return v;
}

inline std::vector<double> naive_q(const WorldSpec& w, const FeatureMap& fm, const std::vector<double>& wt,
                                   const GameState& s, int depth, double beta) {
  std::vector<double> q;
  for (const auto& a : applicable_actions(w, s)) {
    const GameState n = apply_action(w, s, a).next_state;
    q.push_back(naive_reward(w, fm, wt, n) + naive_v(w, fm, wt, n, depth - 1, beta));
  }
  return q;
}

inline double naive_log_likelihood(const WorldSpec& w, const FeatureMap& fm, const std::vector<double>& wt,
                                   const std::vector<Demonstration>& demos, int h, double beta) {
  double ll = 0.0;
  for (const auto& d : demos)
    for (const auto& [s, a] : d.pairs) {
      const auto acts = applicable_actions(w, s);
      const auto idx = std::find(acts.begin(), acts.end(), a) - acts.begin();
      const auto p = naive_softmax(naive_q(w, fm, wt, s, h, beta), beta);
      ll += std::log(p[idx]);
    }
  return ll;
}

// Central differences of the library's likelihood.
inline std::vector<double> finite_difference_gradient(const DemonstrationObjective& obj, std::vector<double> w,
                                                      double beta, double eps = 1e-5) {
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w[i];
    w[i] = x + eps;
    const double up = obj.log_likelihood(w, beta);
    w[i] = x - eps;
    const double down = obj.log_likelihood(w, beta);
    w[i] = x;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

// ||g - fd||_2 / max(||g||_2, ||fd||_2); 0 when both vanish below 1e-9.
inline double gradient_relative_error(const std::vector<double>& g, const std::vector<double>& fd) {
  double diff = 0, ng = 0, nf = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    diff += (g[i] - fd[i]) * (g[i] - fd[i]);
    ng += g[i] * g[i];
    nf += fd[i] * fd[i];
  }
  const double scale = std::sqrt(std::max(ng, nf));
  if (scale < 1e-9) return std::sqrt(diff);
  return std::sqrt(diff) / scale;
}

}  // namespace testsupport
