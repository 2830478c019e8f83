#include "narrative/rhirl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "narrative/errors.hpp"
#include "narrative/kernels.hpp"

namespace narrative {

void LearnerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be > 0");
}

ActionValues soft_q(const WorldSpec& world, const RewardModel& rm, const GameState& state, int depth, double beta) {
  if (rm.weights.size() != rm.feature_map.size()) throw DimensionMismatch("reward weights/feature map");
  LookaheadGraph graph(world, rm.feature_map, depth);
  const int root = graph.add_root(state);
  auto values = graph.evaluate(rm.weights, beta, false);
  auto acts = graph.root_actions(root);
  return {std::vector<ActionInstance>(acts.begin(), acts.end()), std::move(values.front().q)};
}

std::vector<double> boltzmann_policy(std::span<const double> q, double beta) {
  if (q.empty()) throw EmptyActionSet();
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  std::vector<double> pi(q.begin(), q.end());
  kernels::softmax(beta, pi);
  return pi;
}

DemonstrationObjective::DemonstrationObjective(const WorldSpec& world, const FeatureMap& fm,
                                               const std::vector<Demonstration>& demos, int horizon)
    : graph_(std::make_unique<LookaheadGraph>(world, fm, horizon)), k_(fm.size()) {
  std::vector<int> slot_of_root;
  for (const auto& demo : demos) {
    for (std::size_t i = 0; i < demo.pairs.size(); ++i) {
      const auto& [state, action] = demo.pairs[i];
      int root;
      try {
        root = graph_->add_root(state);
      } catch (const TerminalState&) {
        throw DemonstrationMismatch(demo.source_trace_id, i);
      }
      auto acts = graph_->root_actions(root);
      auto it = std::find(acts.begin(), acts.end(), action);
      if (it == acts.end()) throw DemonstrationMismatch(demo.source_trace_id, i);
      const auto& roots = graph_->roots();
      const int slot = static_cast<int>(std::find(roots.rbegin(), roots.rend(), root) - roots.rbegin());
      targets_.push_back({static_cast<int>(roots.size()) - 1 - slot, static_cast<int>(it - acts.begin())});
    }
  }
}

double DemonstrationObjective::evaluate(std::span<const double> w, double beta, std::vector<double>* gradient) const {
  if (w.size() != k_) throw DimensionMismatch("weights do not match the feature map");
  if (gradient) gradient->assign(k_, 0.0);
  if (targets_.empty()) return 0.0;
  auto roots = graph_->evaluate(w, beta, gradient != nullptr);
  std::vector<double> pi, scaled;
  double total = 0.0;
  for (const auto& t : targets_) {
    const auto& rv = roots[t.slot];
    const std::size_t n = rv.q.size();
    // log pi(a) = beta*q_a - logsumexp(beta*q)
    scaled.resize(n);
    for (std::size_t a = 0; a < n; ++a) scaled[a] = beta * rv.q[a];
    const double top = kernels::max(scaled);
    double sum = 0.0;
    for (double v : scaled) sum += std::exp(v - top);
    total += scaled[t.action] - top - std::log(sum);
    if (gradient && beta != 0.0) {
      pi.assign(rv.q.begin(), rv.q.end());
      kernels::softmax(beta, pi);
      // beta * (dQ_a - sum_b pi_b dQ_b)
      kernels::axpy(beta, std::span<const double>(rv.dq.data() + t.action * k_, k_), *gradient);
      for (std::size_t b = 0; b < n; ++b)
        kernels::axpy(-beta * pi[b], std::span<const double>(rv.dq.data() + b * k_, k_), *gradient);
    }
  }
  return total;
}

double DemonstrationObjective::log_likelihood(std::span<const double> w, double beta) const {
  return evaluate(w, beta, nullptr);
}

double DemonstrationObjective::log_likelihood(std::span<const double> w, double beta,
                                              std::vector<double>& gradient) const {
  return evaluate(w, beta, &gradient);
}

double log_likelihood(const WorldSpec& world, const RewardModel& rm, const std::vector<Demonstration>& demos,
                      const LearnerConfig& cfg) {
  cfg.validate();
  DemonstrationObjective objective(world, rm.feature_map, demos, cfg.horizon);
  return objective.log_likelihood(rm.weights, cfg.beta);
}

std::vector<double> grad_log_likelihood(const WorldSpec& world, const RewardModel& rm,
                                        const std::vector<Demonstration>& demos, const LearnerConfig& cfg) {
  cfg.validate();
  DemonstrationObjective objective(world, rm.feature_map, demos, cfg.horizon);
  std::vector<double> g;
  objective.log_likelihood(rm.weights, cfg.beta, g);
  return g;
}

TrainingResult train(const WorldSpec& world, const FeatureMap& fm, const std::vector<Demonstration>& demos,
                     const LearnerConfig& cfg) {
  cfg.validate();
  if (demos.empty()) throw std::invalid_argument("train: no demonstrations");
  using clock = std::chrono::steady_clock;
  auto started = clock::now();
  auto elapsed = [&] {
    auto now = clock::now();
    double s = std::chrono::duration<double>(now - started).count();
    started = now;
    return s;
  };

  DemonstrationObjective objective(world, fm, demos, cfg.horizon);
  TrainingResult out{RewardModel::zero(fm), {}};
  auto& rec = out.record;
  rec.config = cfg;
  std::vector<double> w(fm.size(), 0.0), grad;
  double ll = objective.log_likelihood(w, cfg.beta, grad);
  rec.log_likelihood.push_back(ll);
  rec.step_size_used.push_back(0.0);
  rec.seconds.push_back(elapsed());

  std::vector<double> candidate(w.size());
  for (int it = 0; it < cfg.max_iterations; ++it) {
    double step = cfg.step_size, used = 0.0;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving, step *= 0.5) {
      for (std::size_t i = 0; i < w.size(); ++i) candidate[i] = w[i] + step * grad[i];
      candidate = project_l1(candidate);
      const double cand_ll = objective.log_likelihood(candidate, cfg.beta);
      if (!cfg.backtracking || cand_ll >= ll) {
        w = candidate;
        ll = cand_ll;
        used = step;
        break;
      }
    }
    // gradient at the (possibly unchanged) iterate for the next step
    ll = objective.log_likelihood(w, cfg.beta, grad);
    rec.log_likelihood.push_back(ll);
    rec.step_size_used.push_back(used);
    rec.seconds.push_back(elapsed());
  }
  rec.final_weights = w;
  out.model.weights = std::move(w);
  return out;
}

std::map<GridKey, GridCell> run_grid(const WorldSpec& world, const FeatureMap& fm,
                                     const std::map<std::string, std::vector<Demonstration>>& groups,
                                     const std::vector<int>& horizons, const std::vector<double>& betas,
                                     const GridOptions& opts) {
  if (groups.empty()) throw std::invalid_argument("run_grid: no groups");
  std::vector<GridKey> keys;
  for (const auto& [group, _] : groups)
    for (int h : horizons)
      for (double b : betas) keys.push_back({group, h, b});

  std::map<GridKey, GridCell> out;
  for (const auto& k : keys) out.emplace(k, GridCell{});
  std::mutex done_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      const GridKey& key = keys[i];
      GridCell cell;
      try {
        LearnerConfig cfg = opts.base;
        cfg.horizon = key.horizon;
        cfg.beta = key.beta;
        cell.result = train(world, fm, groups.at(key.group), cfg);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      std::lock_guard lock(done_mutex);
      out[key] = std::move(cell);
      if (opts.on_cell_done) opts.on_cell_done(key, out[key]);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(keys.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace narrative
