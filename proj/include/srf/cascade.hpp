#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "srf/models.hpp"
#include "srf/random.hpp"
#include "srf/spherical_map.hpp"

namespace srf {

/// Exponential covariance on the sphere:
/// Cov(p_i, p_j) = variance * exp(-gamma * chordal_distance(p_i, p_j)).
struct CovarianceSpec {
  double gamma = 1.0;
  double variance = 1.0;
};

/// Finite-product cascade configuration. The product has levels + 1 factors
/// (indices 0..levels); level i evaluates an independent mother realization
/// at the pixel centers scaled by b^i under modulus algebra.
struct CascadeConfig {
  ModelSpec mother;  // simulable families only (Gaussian-derived mothers)
  CovarianceSpec covariance;
  int levels = 0;
  PixelGrid grid{16, Ordering::Ring};
  std::uint64_t seed = 0;
};

/// Gaussian variance the mother transform expects for the family
/// (the normalizing sigma^2 for EvenPower, 1 for the squared families,
/// sigma_Y^2 for LogNormal). Throws for non-simulable families.
double expected_mother_variance(const ModelSpec& spec);

/// One zero-mean Gaussian realization with the exponential covariance at the
/// given points, by dense Cholesky. Exactly singular covariances (coincident
/// points) factor with zero pivots; numerically indefinite ones retry with
/// escalating diagonal jitter (1e-12 * variance up to 1e-6 * variance).
/// Point count is guarded at 20000 (dense factorization).
/// If jitter_out is non-null it receives the jitter actually applied.
std::vector<double> simulate_gaussian_on_points(std::span<const SkyCoord> points,
                                                const CovarianceSpec& cov,
                                                RandomStream& stream,
                                                double* jitter_out = nullptr);

/// Element-wise mean-one mother values from Gaussian field values.
/// `layers` holds one vector for the single-layer families and k
/// independent unit-variance vectors for ChiSquareK.
std::vector<double> mother_transform(
    const ModelSpec& spec, const std::vector<std::vector<double>>& layers);

/// Convenience overload for the single-layer families.
std::vector<double> mother_transform(const ModelSpec& spec,
                                     std::span<const double> gaussian_values);

/// Map value at pixel p is prod_i Lambda^{(i)}(b^i x p). Level i (layer l)
/// draws from RandomStream(seed).substream(i).substream(l), so maps are
/// bit-identical for identical configs regardless of internal parallelism.
SphericalMap simulate_cascade(const CascadeConfig& config);

/// Ensemble sharing the per-level Cholesky factors across seeds; map s
/// equals simulate_cascade(config with seed = seeds[s]) bit for bit.
std::vector<SphericalMap> simulate_cascade_ensemble(
    const CascadeConfig& config, std::span<const std::uint64_t> seeds);

}  // namespace srf
