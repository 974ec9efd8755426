#pragma once

#include <array>
#include <string_view>

#include "mapfsel/mapf_model.hpp"

namespace mapfsel {

inline constexpr int kNumKbsFeatures = 20;

// Column names, in vector order. See docs/features.md for definitions.
inline constexpr std::array<std::string_view, kNumKbsFeatures> kKbsFeatureNames{
    "grid_width",          "grid_height",         "passable_cells",
    "obstacle_density",    "num_agents",          "agent_density",
    "sp_len_mean",         "sp_len_max",          "sp_len_min",
    "sp_len_std",          "sp_len_sum_per_cell", "shared_path_cells",
    "path_overlap_ratio",  "manhattan_mean",      "manhattan_std",
    "detour_factor_mean",  "num_components",      "corridor_fraction",
    "open_fraction",       "largest_component_fraction"};

struct KbsFeatures {
  std::array<double, kNumKbsFeatures> values{};
  static constexpr const auto& names = kKbsFeatureNames;
};

KbsFeatures kbs_features(const MapfInstance& instance);

}  // namespace mapfsel
