#pragma once

#include <span>
#include <string>
#include <vector>

#include "narrative/engine.hpp"

namespace narrative {

struct FeatureDescriptor {
  enum class Kind : std::uint8_t {
    PlotVisited,
    EndingReached,
    ObjectsSeen,
    TopicsKnown,
    LocationsAvailable,
    InventoryFill,
  };
  Kind kind;
  int index = -1;  // plot point for the indicator kinds
  std::string name;

  bool operator==(const FeatureDescriptor&) const = default;
};

/// phi: S -> [0,1]^k. One indicator per plot point, one per ending, then four
/// exploration fractions. Order follows the story's declaration order.
class FeatureMap {
 public:
  FeatureMap() = default;
  explicit FeatureMap(const WorldSpec& world);

  std::size_t size() const { return descriptors_.size(); }
  const std::vector<FeatureDescriptor>& descriptors() const { return descriptors_; }
  int find(const std::string& name) const;
  const std::string& fingerprint() const { return fingerprint_; }

  /// Writes phi(state) into `out` (size() entries).
  void evaluate(const WorldSpec& world, const GameState& state, std::span<double> out) const;

  bool operator==(const FeatureMap& o) const { return descriptors_ == o.descriptors_ && fingerprint_ == o.fingerprint_; }

 private:
  std::vector<FeatureDescriptor> descriptors_;
  std::string fingerprint_;
};

std::vector<double> phi(const WorldSpec& world, const GameState& state, const FeatureMap& fm);

/// R(s) = w . phi(s) with ||w||_1 <= 1.
struct RewardModel {
  FeatureMap feature_map;
  std::vector<double> weights;

  static RewardModel zero(const FeatureMap& fm) { return {fm, std::vector<double>(fm.size(), 0.0)}; }
};

/// Throws DimensionMismatch when the weight vector and feature map disagree.
double reward(const RewardModel& rm, const WorldSpec& world, const GameState& state);

/// Euclidean projection onto {x : ||x||_1 <= radius} (sort-based, O(n log n)).
std::vector<double> project_l1(std::span<const double> v, double radius = 1.0);

double l1_norm(std::span<const double> v);

/// Weights document: descriptor name -> weight plus fingerprints.
nlohmann::json weights_to_json(const WorldSpec& world, const RewardModel& rm);
/// Throws std::invalid_argument when the fingerprint or names do not match.
RewardModel weights_from_json(const WorldSpec& world, const nlohmann::json& j);

/// Expert reward for an ending: 0.15 spread over its transitive prerequisite
/// plot indicators, 0.3 on each of its plot and ending indicators, and -0.25
/// on the explored-locations fraction. L1 norm 1.
RewardModel ending_path_reward(const WorldSpec& world, const FeatureMap& fm, const std::string& ending_id);

}  // namespace narrative
