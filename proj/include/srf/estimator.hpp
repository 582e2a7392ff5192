#pragma once

#include <span>
#include <vector>

#include "srf/models.hpp"
#include "srf/spherical_map.hpp"

namespace srf {

/// Per-cell masses mu_l over a mesh restricted to a window; masses of the
/// included cells sum to one.
struct CellMasses {
  DyadicMesh mesh;
  std::vector<double> masses;   // one per cell; zero for excluded cells
  std::vector<char> included;   // window mask
};

/// M(i) - min M(i): shifts the map so its minimum is zero. The overload with
/// a mesh and window takes the minimum over the window support only.
SphericalMap preprocess_shift(const SphericalMap& map);
SphericalMap preprocess_shift(const SphericalMap& map, const DyadicMesh& mesh,
                              const Window& window);

/// Minimum map value over the pixels of the window-included cells.
double support_minimum(const SphericalMap& map, const DyadicMesh& mesh,
                       const Window& window);

/// Normalized cell masses: per included cell, the cell pixel sum divided by
/// the total over all included cells. Requires a non-negative map on the
/// support; throws on zero total mass or an empty window.
CellMasses cell_masses(const SphericalMap& map, const DyadicMesh& mesh,
                       const Window& window);

/// Empirical Renyi function T^(q) = log2(sum_l mu_l^q) / log2|S_l|.
/// Zero-mass cells are excluded from the sums for q <= 1 and contribute
/// nothing for q > 1 (0 * log 0 := 0).
RenyiCurve empirical_T(const CellMasses& masses, std::span<const double> q_grid);

/// Empirical singularity spectrum. Default mode uses base-2 logs in the
/// alpha numerator (Chhabra-Jensen form, uniform map -> alpha = 1);
/// verbatim mode keeps the published mixed-base form (ln in the numerator,
/// uniform map -> alpha = ln 2). f^ = q alpha^ - T^ in both modes.
SpectrumCurve empirical_spectrum(const CellMasses& masses,
                                 std::span<const double> q_grid,
                                 bool verbatim_alpha = false);

/// Multi-level refinement of empirical_T: per q, the least-squares slope
/// (with intercept) of log2 sum_l mu_l^q against log2|S_l| across two or
/// more mesh group orders; the intercept absorbs the partition-sum
/// prefactor that biases the single-level ratio.
RenyiCurve empirical_T_multilevel(const SphericalMap& map,
                                  const Window& window,
                                  std::span<const int> group_orders,
                                  std::span<const double> q_grid);

}  // namespace srf
