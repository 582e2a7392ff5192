#pragma once

#include <vector>

#include "srf/sphere.hpp"

namespace srf {

/// Pixelized scalar field on the sphere; values are indexed in the grid's
/// own ordering.
struct SphericalMap {
  PixelGrid grid;
  std::vector<double> values;
};

/// Throws std::invalid_argument unless the value count matches the grid and
/// every value is finite.
void validate_map(const SphericalMap& map);

}  // namespace srf
