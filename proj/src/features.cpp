#include "narrative/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "narrative/errors.hpp"
#include "narrative/kernels.hpp"

namespace narrative {

FeatureMap::FeatureMap(const WorldSpec& w) {
  using K = FeatureDescriptor::Kind;
  for (std::size_t p = 0; p < w.plot_points.size(); ++p)
    descriptors_.push_back({K::PlotVisited, static_cast<int>(p), "plot:" + w.plot_points[p].id});
  for (int e : w.endings()) descriptors_.push_back({K::EndingReached, e, "ending:" + w.plot_points[e].id});
  descriptors_.push_back({K::ObjectsSeen, -1, "frac_objects_seen"});
  descriptors_.push_back({K::TopicsKnown, -1, "frac_topics_known"});
  descriptors_.push_back({K::LocationsAvailable, -1, "frac_locations_available"});
  descriptors_.push_back({K::InventoryFill, -1, "inventory_fill"});
  std::string names = w.fingerprint();
  for (const auto& d : descriptors_) names += "|" + d.name;
  fingerprint_ = fnv1a_hex(names);
}

int FeatureMap::find(const std::string& name) const {
  for (std::size_t i = 0; i < descriptors_.size(); ++i)
    if (descriptors_[i].name == name) return static_cast<int>(i);
  return -1;
}

void FeatureMap::evaluate(const WorldSpec& w, const GameState& s, std::span<double> out) const {
  auto fraction = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  using K = FeatureDescriptor::Kind;
  for (std::size_t i = 0; i < descriptors_.size(); ++i) {
    const auto& d = descriptors_[i];
    switch (d.kind) {
      case K::PlotVisited:
      case K::EndingReached: out[i] = s.plot_visited[d.index] ? 1.0 : 0.0; break;
      case K::ObjectsSeen:
        out[i] = fraction(std::count_if(s.objects.begin(), s.objects.end(), [](const ObjectState& o) { return o.seen; }),
                          s.objects.size());
        break;
      case K::TopicsKnown:
        out[i] = fraction(std::count_if(s.topics.begin(), s.topics.end(), [](const TopicState& t) { return t.known; }),
                          s.topics.size());
        break;
      case K::LocationsAvailable:
        out[i] = fraction(std::count(s.locations_available.begin(), s.locations_available.end(), 1),
                          s.locations_available.size());
        break;
      case K::InventoryFill: out[i] = fraction(inventory(s).size(), w.takeable_count()); break;
    }
  }
}

std::vector<double> phi(const WorldSpec& w, const GameState& s, const FeatureMap& fm) {
  std::vector<double> out(fm.size());
  fm.evaluate(w, s, out);
  return out;
}

double reward(const RewardModel& rm, const WorldSpec& w, const GameState& s) {
  if (rm.weights.size() != rm.feature_map.size())
    throw DimensionMismatch("reward weights have " + std::to_string(rm.weights.size()) + " entries, feature map " +
                            std::to_string(rm.feature_map.size()));
  auto f = phi(w, s, rm.feature_map);
  return kernels::dot(rm.weights, f);
}

double l1_norm(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0, [](double acc, double x) { return acc + std::abs(x); });
}

std::vector<double> project_l1(std::span<const double> v, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("project_l1: radius must be positive");
  std::vector<double> out(v.begin(), v.end());
  if (l1_norm(v) <= radius) return out;

  std::vector<double> mag(v.size());
  std::transform(v.begin(), v.end(), mag.begin(), [](double x) { return std::abs(x); });
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < mag.size(); ++j) {
    cumulative += mag[j];
    const double t = (cumulative - radius) / static_cast<double>(j + 1);
    if (mag[j] - t > 0) theta = t;
  }
  for (auto& x : out) x = std::copysign(std::max(std::abs(x) - theta, 0.0), x);
  // guard the last ulp so the constraint holds exactly
  const double norm = l1_norm(out);
  if (norm > radius)
    for (auto& x : out) x *= radius / norm;
  return out;
}

nlohmann::json weights_to_json(const WorldSpec& w, const RewardModel& rm) {
  if (rm.weights.size() != rm.feature_map.size()) throw DimensionMismatch("weights/feature map size");
  nlohmann::json weights = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (std::size_t i = 0; i < rm.weights.size(); ++i) {
    weights[rm.feature_map.descriptors()[i].name] = rm.weights[i];
    order.push_back(rm.feature_map.descriptors()[i].name);
  }
  return {{"schema_version", "1"},
          {"story_fingerprint", w.fingerprint()},
          {"feature_map_fingerprint", rm.feature_map.fingerprint()},
          {"descriptors", order},
          {"weights", weights}};
}

RewardModel weights_from_json(const WorldSpec& w, const nlohmann::json& j) {
  FeatureMap fm(w);
  if (!j.is_object() || !j.contains("weights") || !j.at("weights").is_object())
    throw std::invalid_argument("weights document lacks a 'weights' object");
  if (j.value("feature_map_fingerprint", std::string()) != fm.fingerprint())
    throw std::invalid_argument("weights were learned for a different story or feature map");
  RewardModel rm = RewardModel::zero(fm);
  for (const auto& [name, value] : j.at("weights").items()) {
    int i = fm.find(name);
    if (i < 0) throw std::invalid_argument("unknown feature " + name);
    rm.weights[i] = value.get<double>();
  }
  return rm;
}

RewardModel ending_path_reward(const WorldSpec& w, const FeatureMap& fm, const std::string& ending_id) {
  const int ending = w.plot_index(ending_id);
  if (ending < 0 || !w.plot_points[ending].is_ending) throw std::invalid_argument("unknown ending " + ending_id);
  std::vector<std::uint8_t> on_path(w.plot_points.size(), 0);
  std::vector<int> stack{ending};
  while (!stack.empty()) {
    int p = stack.back();
    stack.pop_back();
    if (on_path[p]) continue;
    on_path[p] = 1;
    for (int q : w.plot_prerequisites(p)) stack.push_back(q);
  }
  on_path[ending] = 0;
  int steps = 0;
  for (auto x : on_path) steps += x;
  // Progress shares 0.15, the ending 0.6, and a 0.25 per-state cost on explored
  // area. Once the path is complete a state is worth less than nothing, so
  // ending beats lingering even though nothing is earned after a terminal state.
  RewardModel rm = RewardModel::zero(fm);
  for (std::size_t i = 0; i < fm.size(); ++i) {
    const auto& d = fm.descriptors()[i];
    if (d.kind == FeatureDescriptor::Kind::PlotVisited && d.index >= 0 && on_path[d.index])
      rm.weights[i] = 0.15 / steps;
    else if (d.index == ending)
      rm.weights[i] = 0.3;
    else if (d.kind == FeatureDescriptor::Kind::LocationsAvailable)
      rm.weights[i] = -0.25;
  }
  return rm;
}

}  // namespace narrative
