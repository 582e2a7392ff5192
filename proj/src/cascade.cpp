#include "srf/cascade.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "srf/specfun.hpp"

namespace srf {

namespace {

constexpr std::size_t kMaxDensePoints = 20000;

int thread_budget() {
  if (const char* env = std::getenv("SRF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Lower-triangular in-place Cholesky, row-major. Exact zero pivots are
// accepted (positive semidefinite input, e.g. coincident points); returns
// false only for a negative pivot beyond the tolerance.
bool cholesky_semidefinite(std::vector<double>& a, std::size_t n,
                           double pivot_tol) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row_i = a.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) {
      const double* row_j = a.data() + j * n;
      double s = row_i[j];
      for (std::size_t k = 0; k < j; ++k) s -= row_i[k] * row_j[k];
      if (i == j) {
        if (s < -pivot_tol) return false;
        row_i[j] = s > 0.0 ? std::sqrt(s) : 0.0;
      } else {
        row_i[j] = (row_j[j] > 0.0) ? s / row_j[j] : 0.0;
      }
    }
    std::fill(row_i + i + 1, row_i + n, 0.0);
  }
  return true;
}

std::vector<std::array<double, 3>> unit_vectors(
    std::span<const SkyCoord> points) {
  std::vector<std::array<double, 3>> u(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double st = std::sin(points[i].theta);
    u[i] = {st * std::cos(points[i].phi), st * std::sin(points[i].phi),
            std::cos(points[i].theta)};
  }
  return u;
}

void fill_covariance(std::span<const SkyCoord> points,
                     const CovarianceSpec& cov, std::vector<double>& matrix) {
  const std::size_t n = points.size();
  const auto u = unit_vectors(points);
  matrix.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double dx = u[i][0] - u[j][0];
      const double dy = u[i][1] - u[j][1];
      const double dz = u[i][2] - u[j][2];
      const double chord = std::sqrt(dx * dx + dy * dy + dz * dz);
      matrix[i * n + j] = cov.variance * std::exp(-cov.gamma * chord);
    }
  }
}

// Factorization with the jitter escalation contract from the header.
// Returns the applied jitter.
double factor_covariance(std::span<const SkyCoord> points,
                         const CovarianceSpec& cov,
                         std::vector<double>& factor) {
  const std::size_t n = points.size();
  std::vector<double> base;
  fill_covariance(points, cov, base);
  const double pivot_tol = 1e-10 * cov.variance;

  double jitter = 0.0;
  for (;;) {
    factor = base;
    if (jitter > 0.0)
      for (std::size_t i = 0; i < n; ++i) factor[i * n + i] += jitter;
    if (cholesky_semidefinite(factor, n, pivot_tol)) return jitter;
    jitter = (jitter == 0.0) ? 1e-12 * cov.variance : jitter * 10.0;
    if (jitter > 1e-6 * cov.variance * (1.0 + 1e-12))
      throw std::runtime_error(
          "simulate_gaussian_on_points: covariance not factorizable within "
          "the jitter budget");
  }
}

std::vector<double> draw_from_factor(const std::vector<double>& factor,
                                     std::size_t n, RandomStream& stream) {
  const std::vector<double> z = stream.normal_sample(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = factor.data() + i * n;
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
    out[i] = s;
  }
  return out;
}

int layer_count(const ModelSpec& spec) {
  return spec.family == ModelFamily::ChiSquareK ? spec.k : 1;
}

void validate_simulable(const ModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::LogNormal:
    case ModelFamily::ChiSquare:
    case ModelFamily::ChiSquareEps:
    case ModelFamily::EvenPower:
    case ModelFamily::ChiSquareK:
      return;
    default:
      throw std::invalid_argument(
          "cascade: no sampling construction for gamma-correlated mothers (" +
          spec.description() + ")");
  }
}

}  // namespace

double expected_mother_variance(const ModelSpec& spec) {
  validate_simulable(spec);
  switch (spec.family) {
    case ModelFamily::LogNormal:
      return spec.sigma2_Y;
    case ModelFamily::EvenPower:
      // sigma^2 = (sqrt(pi) / (2^k Gamma(k+1/2)))^{1/k} keeps E Y^{2k} = 1
      return std::exp((0.5 * std::log(std::numbers::pi) -
                       spec.k * std::numbers::ln2 - ln_gamma(spec.k + 0.5)) /
                      spec.k);
    default:
      return 1.0;
  }
}

std::vector<double> simulate_gaussian_on_points(std::span<const SkyCoord> points,
                                                const CovarianceSpec& cov,
                                                RandomStream& stream,
                                                double* jitter_out) {
  if (points.empty())
    throw std::invalid_argument("simulate_gaussian_on_points: no points");
  if (points.size() > kMaxDensePoints)
    throw std::invalid_argument(
        "simulate_gaussian_on_points: point count exceeds the dense guard (" +
        std::to_string(kMaxDensePoints) + ")");
  if (!(cov.variance > 0.0) || !(cov.gamma > 0.0))
    throw std::invalid_argument(
        "simulate_gaussian_on_points: variance and gamma must be positive");

  std::vector<double> factor;
  const double jitter = factor_covariance(points, cov, factor);
  if (jitter_out) *jitter_out = jitter;
  return draw_from_factor(factor, points.size(), stream);
}

std::vector<double> mother_transform(
    const ModelSpec& spec, const std::vector<std::vector<double>>& layers) {
  validate_simulable(spec);
  const int expected_layers = layer_count(spec);
  if (static_cast<int>(layers.size()) != expected_layers)
    throw std::invalid_argument("mother_transform: family needs " +
                                std::to_string(expected_layers) +
                                " gaussian layers");
  const std::size_t n = layers.front().size();
  for (const auto& layer : layers)
    if (layer.size() != n)
      throw std::invalid_argument("mother_transform: ragged layers");

  std::vector<double> out(n);
  switch (spec.family) {
    case ModelFamily::LogNormal:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(layers[0][i] - 0.5 * spec.sigma2_Y);
      break;
    case ModelFamily::ChiSquare:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = layers[0][i] * layers[0][i];
      break;
    case ModelFamily::ChiSquareEps:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = (1.0 - spec.eps) * layers[0][i] * layers[0][i] + spec.eps;
      break;
    case ModelFamily::EvenPower:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = std::pow(layers[0][i] * layers[0][i], spec.k);
      break;
    case ModelFamily::ChiSquareK:
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& layer : layers) s += layer[i] * layer[i];
        out[i] = s / spec.k;
      }
      break;
    default:
      break;  // unreachable, validate_simulable throws first
  }
  return out;
}

std::vector<double> mother_transform(const ModelSpec& spec,
                                     std::span<const double> gaussian_values) {
  return mother_transform(
      spec, std::vector<std::vector<double>>{
                std::vector<double>(gaussian_values.begin(),
                                    gaussian_values.end())});
}

namespace {

void validate_config(const CascadeConfig& config) {
  validate_simulable(config.mother);
  if (config.levels < 0)
    throw std::invalid_argument("cascade: levels must be >= 0");
  const double want = expected_mother_variance(config.mother);
  if (std::fabs(config.covariance.variance - want) >
      1e-12 * std::max(1.0, want))
    throw std::invalid_argument(
        "cascade: covariance variance " +
        std::to_string(config.covariance.variance) +
        " does not match the mother family's expected variance " +
        std::to_string(want));
  if (static_cast<std::size_t>(config.grid.npix()) > kMaxDensePoints)
    throw std::invalid_argument(
        "cascade: grid too fine for dense synthesis (12 nside^2 must be <= " +
        std::to_string(kMaxDensePoints) + ")");
}

// scaled evaluation points of one level: scale_coord(center, b^i)
std::vector<SkyCoord> level_points(const PixelGrid& grid, double b, int level) {
  double factor = 1.0;
  for (int i = 0; i < level; ++i) factor *= b;  // deterministic, no pow()
  std::vector<SkyCoord> pts(static_cast<std::size_t>(grid.npix()));
  for (std::int64_t p = 0; p < grid.npix(); ++p)
    pts[static_cast<std::size_t>(p)] =
        scale_coord(grid.pixel_center(p), factor);
  return pts;
}

// per-level, per-seed mother values; shared factorization across seeds
void run_levels(const CascadeConfig& config,
                std::span<const std::uint64_t> seeds,
                std::vector<std::vector<std::vector<double>>>& level_values) {
  const int levels = config.levels;
  const int layers = layer_count(config.mother);
  const std::size_t n = static_cast<std::size_t>(config.grid.npix());

  std::atomic_int next_level{0};
  auto worker = [&] {
    std::vector<double> factor;
    for (;;) {
      const int level = next_level.fetch_add(1);
      if (level > levels) break;
      const auto points = level_points(config.grid, config.mother.b, level);
      factor_covariance(points, config.covariance, factor);
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        std::vector<std::vector<double>> gauss(layers);
        for (int l = 0; l < layers; ++l) {
          RandomStream stream = RandomStream(seeds[s])
                                    .substream(static_cast<std::uint64_t>(level))
                                    .substream(static_cast<std::uint64_t>(l));
          gauss[l] = draw_from_factor(factor, n, stream);
        }
        level_values[s][static_cast<std::size_t>(level)] =
            mother_transform(config.mother, gauss);
      }
    }
  };

  const int workers =
      std::min(thread_budget(), levels + 1);
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<SphericalMap> simulate_cascade_ensemble(
    const CascadeConfig& config, std::span<const std::uint64_t> seeds) {
  validate_config(config);
  const std::size_t n = static_cast<std::size_t>(config.grid.npix());

  std::vector<std::vector<std::vector<double>>> level_values(
      seeds.size(),
      std::vector<std::vector<double>>(static_cast<std::size_t>(config.levels) +
                                       1));
  run_levels(config, seeds, level_values);

  std::vector<SphericalMap> maps;
  maps.reserve(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    SphericalMap map{config.grid, std::vector<double>(n, 1.0)};
    // multiply in level order so results do not depend on thread timing
    for (int level = 0; level <= config.levels; ++level) {
      const auto& values = level_values[s][static_cast<std::size_t>(level)];
      for (std::size_t p = 0; p < n; ++p) map.values[p] *= values[p];
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

SphericalMap simulate_cascade(const CascadeConfig& config) {
  const std::uint64_t seed = config.seed;
  return simulate_cascade_ensemble(config, std::span(&seed, 1)).front();
}

void validate_map(const SphericalMap& map) {
  if (static_cast<std::int64_t>(map.values.size()) != map.grid.npix())
    throw std::invalid_argument("SphericalMap: value count != pixel count");
  for (double v : map.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("SphericalMap: non-finite value");
}

}  // namespace srf
