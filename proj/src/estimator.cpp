#include "srf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace srf {

namespace {

// Map values are stored in the map grid's own ordering; cells are nested
// blocks, so lookups convert when the map is ring-ordered.
double map_value_nest(const SphericalMap& map, std::int64_t nest_index) {
  const std::int64_t index =
      map.grid.ordering() == Ordering::Nested
          ? nest_index
          : map.grid.nest_to_ring(nest_index);
  return map.values[static_cast<std::size_t>(index)];
}

void require_same_grid(const SphericalMap& map, const DyadicMesh& mesh) {
  if (map.grid.nside() != mesh.grid().nside())
    throw std::invalid_argument("estimator: map and mesh nside differ");
}

}  // namespace

SphericalMap preprocess_shift(const SphericalMap& map) {
  validate_map(map);
  const double min_value =
      *std::min_element(map.values.begin(), map.values.end());
  SphericalMap shifted = map;
  for (double& v : shifted.values) v -= min_value;
  return shifted;
}

double support_minimum(const SphericalMap& map, const DyadicMesh& mesh,
                       const Window& window) {
  validate_map(map);
  require_same_grid(map, mesh);
  const auto mask = window_mask(mesh, window);
  double min_value = std::numeric_limits<double>::infinity();
  for (std::int64_t c = 0; c < mesh.cell_count(); ++c) {
    if (!mask[static_cast<std::size_t>(c)]) continue;
    for (std::int64_t t = 0; t < mesh.pixels_per_cell(); ++t)
      min_value =
          std::min(min_value, map_value_nest(map, mesh.cell_pixel_nest(c, t)));
  }
  if (!std::isfinite(min_value))
    throw std::invalid_argument("support_minimum: window contains no cells");
  return min_value;
}

SphericalMap preprocess_shift(const SphericalMap& map, const DyadicMesh& mesh,
                              const Window& window) {
  const double min_value = support_minimum(map, mesh, window);
  SphericalMap shifted = map;
  for (double& v : shifted.values) v -= min_value;
  return shifted;
}

CellMasses cell_masses(const SphericalMap& map, const DyadicMesh& mesh,
                       const Window& window) {
  validate_map(map);
  require_same_grid(map, mesh);

  CellMasses result{mesh, std::vector<double>(
                              static_cast<std::size_t>(mesh.cell_count()), 0.0),
                    window_mask(mesh, window)};

  bool any_included = false;
  double total = 0.0;
  for (std::int64_t c = 0; c < mesh.cell_count(); ++c) {
    if (!result.included[static_cast<std::size_t>(c)]) continue;
    any_included = true;
    double cell_sum = 0.0;
    for (std::int64_t t = 0; t < mesh.pixels_per_cell(); ++t) {
      const double v = map_value_nest(map, mesh.cell_pixel_nest(c, t));
      if (v < 0.0)
        throw std::invalid_argument(
            "cell_masses: negative map value on the support; shift first");
      cell_sum += v;
    }
    result.masses[static_cast<std::size_t>(c)] = cell_sum;
    total += cell_sum;
  }
  if (!any_included)
    throw std::invalid_argument("cell_masses: no cells inside the window");
  if (!(total > 0.0))
    throw std::invalid_argument(
        "cell_masses: zero total mass (constant or empty map)");

  for (double& m : result.masses) m /= total;
  return result;
}

namespace {

struct PartitionSum {
  double sum_q;        // sum of mu^q over contributing cells
  double sum_q_log2;   // sum of mu^q log2(mu)
  std::int64_t cells;  // contributing (positive-mass) cells
};

PartitionSum partition_sum(const CellMasses& masses, double q) {
  PartitionSum out{0.0, 0.0, 0};
  for (std::int64_t c = 0; c < masses.mesh.cell_count(); ++c) {
    if (!masses.included[static_cast<std::size_t>(c)]) continue;
    const double mu = masses.masses[static_cast<std::size_t>(c)];
    if (mu <= 0.0) continue;  // 0 * log 0 := 0 for q > 1; excluded otherwise
    const double mu_q = std::pow(mu, q);
    out.sum_q += mu_q;
    out.sum_q_log2 += mu_q * std::log2(mu);
    ++out.cells;
  }
  return out;
}

std::int64_t included_count(const CellMasses& masses) {
  std::int64_t n = 0;
  for (char flag : masses.included) n += flag ? 1 : 0;
  return n;
}

}  // namespace

RenyiCurve empirical_T(const CellMasses& masses,
                       std::span<const double> q_grid) {
  if (included_count(masses) < 2)
    throw std::invalid_argument("empirical_T: need at least 2 included cells");

  const double log2_measure = masses.mesh.log2_cell_measure();
  RenyiCurve curve;
  curve.provenance = "empirical";
  curve.q.assign(q_grid.begin(), q_grid.end());
  curve.T.reserve(q_grid.size());
  for (const double q : q_grid) {
    if (q == 1.0) {
      // masses are normalized, so the q = 1 partition sum is identically 1
      curve.T.push_back(0.0);
      continue;
    }
    const PartitionSum part = partition_sum(masses, q);
    if (part.cells == 0 || !(part.sum_q > 0.0))
      throw std::invalid_argument("empirical_T: all masses are zero");
    curve.T.push_back(std::log2(part.sum_q) / log2_measure);
  }
  return curve;
}

RenyiCurve empirical_T_multilevel(const SphericalMap& map,
                                  const Window& window,
                                  std::span<const int> group_orders,
                                  std::span<const double> q_grid) {
  if (group_orders.size() < 2)
    throw std::invalid_argument(
        "empirical_T_multilevel: need at least two mesh levels");

  std::vector<double> x;  // log2 cell measure per level
  std::vector<std::vector<double>> y;  // log2 partition sums per level
  for (const int j : group_orders) {
    const DyadicMesh mesh = build_mesh(map.grid, j);
    const CellMasses masses = cell_masses(map, mesh, window);
    if (included_count(masses) < 2)
      throw std::invalid_argument(
          "empirical_T_multilevel: need at least 2 included cells per level");
    x.push_back(mesh.log2_cell_measure());
    std::vector<double> level(q_grid.size());
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
      if (q_grid[i] == 1.0) {
        level[i] = 0.0;
        continue;
      }
      const PartitionSum part = partition_sum(masses, q_grid[i]);
      if (part.cells == 0 || !(part.sum_q > 0.0))
        throw std::invalid_argument(
            "empirical_T_multilevel: all masses are zero");
      level[i] = std::log2(part.sum_q);
    }
    y.push_back(std::move(level));
  }

  const double n = static_cast<double>(x.size());
  double x_mean = 0.0;
  for (double v : x) x_mean += v / n;
  double sxx = 0.0;
  for (double v : x) sxx += (v - x_mean) * (v - x_mean);
  if (sxx == 0.0)
    throw std::invalid_argument(
        "empirical_T_multilevel: group orders must be distinct");

  RenyiCurve curve;
  curve.provenance = "empirical multilevel";
  curve.q.assign(q_grid.begin(), q_grid.end());
  curve.T.resize(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    double y_mean = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) y_mean += y[l][i] / n;
    double sxy = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l)
      sxy += (x[l] - x_mean) * (y[l][i] - y_mean);
    curve.T[i] = sxy / sxx;
  }
  return curve;
}

SpectrumCurve empirical_spectrum(const CellMasses& masses,
                                 std::span<const double> q_grid,
                                 bool verbatim_alpha) {
  const RenyiCurve renyi = empirical_T(masses, q_grid);
  const double log2_measure = masses.mesh.log2_cell_measure();

  SpectrumCurve spectrum;
  spectrum.q = renyi.q;
  spectrum.alpha.reserve(q_grid.size());
  spectrum.f.reserve(q_grid.size());
  for (std::size_t i = 0; i < spectrum.q.size(); ++i) {
    const double q = spectrum.q[i];
    const PartitionSum part = partition_sum(masses, q);
    // normalized weights mu^q / sum mu^q against log(mu)
    double alpha = part.sum_q_log2 / part.sum_q / log2_measure;
    if (verbatim_alpha) alpha *= std::numbers::ln2;  // ln in the numerator
    spectrum.alpha.push_back(alpha);
    spectrum.f.push_back(q * alpha - renyi.T[i]);
  }
  return spectrum;
}

}  // namespace srf
