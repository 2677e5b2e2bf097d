#pragma once
// Weight model: descriptor weights (theta0), clique group weights (theta),
// the feature group configuration, and per-group scale factors.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace iso {

enum class LossKind { hamming, endpoint };

LossKind parse_loss_kind(const std::string& name); // "hamming" | "endpoint"
const char* loss_kind_name(LossKind kind);

// Which clique feature groups are active.  Group order is fixed:
//   unary, distance, adjacency, scaled_distance, angle.
struct FeatureConfig {
  bool unary = true;
  bool distance = true;
  bool adjacency = true;
  bool scaled_distance = true;
  bool angle = true;

  static constexpr std::size_t group_count = 5;
  static const std::array<const char*, group_count> group_names;

  std::array<bool, group_count> flags() const {
    return {unary, distance, adjacency, scaled_distance, angle};
  }
  std::size_t active_groups() const;
  bool any_geometric() const { return distance || adjacency || scaled_distance || angle; }
};

struct WeightModel {
  std::vector<double> theta0;        // descriptor weights, one per descriptor entry
  std::vector<double> theta;         // one weight per active feature group
  int p = 10;                        // candidates kept per template point
  FeatureConfig config;
  std::vector<double> scale_factors; // one positive factor per active group
  double degenerate_penalty = 10.0;  // substituted group value for coincident triples

  void validate() const;
};

// Convenience: all-equal weights and unit scale factors ("before learning").
WeightModel default_model(std::size_t descriptor_dim, int p, const FeatureConfig& config);

WeightModel load_model(const std::string& path);
void save_model(const WeightModel& model, const std::string& path);

} // namespace iso
