#pragma once

#include <cstdint>
#include <span>

#include "shred/shape.hpp"

namespace shred {

/// Procedural labeled shapes: axis-aligned boxes glued face to face, each box
/// one GT part, sampled on a lightly jittered surface grid with the hidden
/// contact patches removed. Output is normalized to the unit sphere.
struct BoxFixtureOptions {
  std::size_t min_parts = 4;
  std::size_t max_parts = 12;
  double spacing = 0.017;  // grid pitch in normalized units
  double jitter = 0.1;     // fraction of the pitch
  std::size_t min_points = 5000;
  std::size_t max_points = 20000;
  double connectivity_eps = 0.025;
  std::size_t max_attempts = 200;
};

/// Deterministic in `seed`. Retries internal draws until the result has the
/// requested part count and point budget, every part is connected at
/// `connectivity_eps`, and so is the whole shape.
Shape make_box_assembly(std::uint64_t seed, const BoxFixtureOptions& options = {});

/// Number of connected components of `subset` when points closer than `eps`
/// are linked (all points when subset is empty).
std::size_t component_count(const Shape& shape, std::span<const std::size_t> subset,
                            double eps);

bool fixture_is_well_formed(const Shape& shape, const BoxFixtureOptions& options);

}  // namespace shred
