#include "narrative/experiment.hpp"

#include <ctime>
#include <stdexcept>

namespace narrative {

std::string config_digest(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"command", m.command},   {"config_digest", m.config_digest}, {"inputs", m.inputs},
          {"outputs", m.outputs},   {"seed", m.seed},                   {"started_at", m.started_at},
          {"finished_at", m.finished_at}};
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ExpertBatch synthesize_ending_group(const WorldSpec& world, const FeatureMap& fm, const ExpertSpec& spec) {
  const RewardModel rm = ending_path_reward(world, fm, spec.ending_id);
  ExpertBatch out;
  for (int i = 0; i < spec.max_candidates; ++i) {
    auto t = synthesize_expert_trace(world, rm, spec.beta, spec.seed, i, spec.horizon, spec.cap);
    ++out.candidates;
    if (t.end_reached && *t.end_reached == spec.ending_id) out.traces.push_back(std::move(t));
    if (static_cast<int>(out.traces.size()) == spec.n) return out;
  }
  throw std::runtime_error("only " + std::to_string(out.traces.size()) + " of " + std::to_string(spec.n) +
                           " expert traces reached " + spec.ending_id);
}

RecoveryResult run_expert_recovery(const WorldSpec& world, const ExpertSpec& spec, const LearnerConfig& cfg,
                                   int rollout_cap) {
  const FeatureMap fm(world);
  RecoveryResult r;
  r.experts = synthesize_ending_group(world, fm, spec);
  TraceGroup g;
  g.group_id = "end:" + spec.ending_id;
  g.ending = spec.ending_id;
  g.members = r.experts.traces;
  r.training = train(world, fm, to_demonstrations(world, g), cfg);
  TrainedPolicy p{r.training.model, cfg.horizon, cfg.beta, PolicyMode::Greedy, cfg.seed};
  r.rollout = rollout(p, world, rollout_cap);
  r.report = evaluate_group(world, r.rollout, "policy", g, cfg.horizon, cfg.beta);
  return r;
}

}  // namespace narrative
