#pragma once

#include <array>
#include <string>
#include <vector>

#include "churnforge/event_model.hpp"

namespace churnforge {

// Game-independent behavioral features, snapshotted as of a date. All
// trailing-window aggregates use (as_of - window, as_of]; "days since"
// features cap at player age so every feature is total.
inline constexpr std::size_t kNumFeatures = 16;

const std::array<std::string, kNumFeatures>& feature_names();

std::array<double, kNumFeatures> build_features(const PlayerTimeline& timeline,
                                                Date as_of);

// Feature index by name (throws on unknown name).
std::size_t feature_index(const std::string& name);

}  // namespace churnforge
