#pragma once

#include <memory>

#include "trackwall/gateway.hpp"

inline const trackwall::Resources& bench_resources() {
  static const auto r = trackwall::Resources::load(TRACKWALL_DATA_DIR);
  return *r;
}
