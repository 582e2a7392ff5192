#include "srf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "srf/specfun.hpp"

namespace srf {

namespace {

constexpr double kLn2 = std::numbers::ln2;

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double sum_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Gaussian elimination with partial pivoting; systems here are at most 3x3.
bool solve_dense(std::vector<double> a, std::vector<double> rhs, int n,
                 std::vector<double>& out) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * out[c];
    out[r] = s / a[r * n + r];
  }
  return all_finite(out);
}

void clamp_to_bounds(std::vector<double>& p, const std::optional<Bounds>& b) {
  if (!b) return;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i < b->lower.size()) p[i] = std::max(p[i], b->lower[i]);
    if (i < b->upper.size()) p[i] = std::min(p[i], b->upper[i]);
  }
}

}  // namespace

LMResult levenberg_marquardt(const ResidualMap& residual_map,
                             std::vector<double> init,
                             const std::optional<Bounds>& bounds,
                             const LMOptions& options) {
  LMResult result;
  const int n = static_cast<int>(init.size());
  clamp_to_bounds(init, bounds);
  std::vector<double> p = std::move(init);
  std::vector<double> r = residual_map(p);
  const int m = static_cast<int>(r.size());

  if (!all_finite(r)) {
    result.params = p;
    result.residuals = r;
    result.message = "non-finite residuals at the initial point";
    return result;
  }

  double cost = sum_sq(r);
  const double zero_cost = 1e-28 * std::max(1.0, cost);
  double damping = options.initial_damping;
  std::vector<double> jac(static_cast<std::size_t>(m) * n);
  std::vector<double> jtj(static_cast<std::size_t>(n) * n);
  std::vector<double> jtr(n), step(n), trial(n);

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    // forward-difference Jacobian
    bool jac_ok = true;
    for (int j = 0; j < n; ++j) {
      const double h = options.fd_step * std::max(std::fabs(p[j]), 1.0);
      std::vector<double> pj = p;
      pj[j] += h;
      clamp_to_bounds(pj, bounds);
      const double hj = pj[j] - p[j];
      if (hj == 0.0) {
        pj[j] = p[j] - h;
        clamp_to_bounds(pj, bounds);
      }
      const std::vector<double> rj = residual_map(pj);
      if (!all_finite(rj) || pj[j] == p[j]) {
        jac_ok = false;
        break;
      }
      const double inv_h = 1.0 / (pj[j] - p[j]);
      for (int i = 0; i < m; ++i) jac[i * n + j] = (rj[i] - r[i]) * inv_h;
    }
    if (!jac_ok) {
      result.message = "non-finite residuals while forming the Jacobian";
      break;
    }

    for (int a = 0; a < n; ++a) {
      jtr[a] = 0.0;
      for (int i = 0; i < m; ++i) jtr[a] += jac[i * n + a] * r[i];
      for (int b = a; b < n; ++b) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += jac[i * n + a] * jac[i * n + b];
        jtj[a * n + b] = s;
        jtj[b * n + a] = s;
      }
    }

    double grad_inf = 0.0;
    for (int a = 0; a < n; ++a) grad_inf = std::max(grad_inf, std::fabs(jtr[a]));
    result.gradient_norm = grad_inf;
    if (grad_inf < options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    bool stepped = false;
    while (damping < 1e14) {
      // (J'J + damping diag(J'J)) step = -J'r
      std::vector<double> lhs = jtj;
      for (int a = 0; a < n; ++a) {
        const double d = jtj[a * n + a];
        lhs[a * n + a] = d + damping * std::max(d, 1e-300);
      }
      std::vector<double> neg(jtr.size());
      for (int a = 0; a < n; ++a) neg[a] = -jtr[a];
      if (!solve_dense(lhs, neg, n, step)) {
        damping *= 11.0;
        continue;
      }
      trial = p;
      for (int a = 0; a < n; ++a) trial[a] += step[a];
      clamp_to_bounds(trial, bounds);
      const std::vector<double> rt = residual_map(trial);
      if (all_finite(rt)) {
        const double trial_cost = sum_sq(rt);
        if (trial_cost <= cost) {
          double step_norm = 0.0, p_norm = 0.0;
          for (int a = 0; a < n; ++a) {
            step_norm += (trial[a] - p[a]) * (trial[a] - p[a]);
            p_norm += p[a] * p[a];
          }
          p = trial;
          r = rt;
          cost = trial_cost;
          damping = std::max(damping / 7.0, 1e-12);
          stepped = true;
          if (cost <= zero_cost ||
              std::sqrt(step_norm) <
                  options.step_tolerance * (std::sqrt(p_norm) +
                                            options.step_tolerance))
            result.converged = true;
          break;
        }
      }
      damping *= 11.0;
    }
    if (!stepped) {
      // no damping level produced a decrease; gradient is numerically flat
      result.converged = result.converged || cost == 0.0;
      if (result.message.empty())
        result.message = "no descent step found at maximum damping";
      break;
    }
    if (result.converged) break;
  }

  result.params = std::move(p);
  result.residuals = std::move(r);
  result.iterations = iter + 1;
  result.rmse = std::sqrt(cost / std::max(m, 1));
  if (result.converged) result.message = "converged";
  return result;
}

namespace {

double log2_gamma(double x) { return ln_gamma(x) / kLn2; }

// regressor of the Model 4 linear fit: log2(2^q Gamma(q+1/2)/sqrt(pi))
double chi_square_regressor(double q) {
  return q + log2_gamma(q + 0.5) - 0.5 * std::log2(std::numbers::pi);
}

// Model 5 regressor in log2 units, parameterized by continuous k.
double even_power_regressor(double q, double k, bool verbatim) {
  if (verbatim)
    return k * q + log2_gamma(k * q + 0.5) - 0.5 * std::log2(std::numbers::pi);
  return log2_gamma(k * q + 0.5) - q * log2_gamma(k + 0.5) -
         0.5 * (1.0 - q) * std::log2(std::numbers::pi);
}

// Model 6 regressor in log2 units.
double chi_square_k_regressor(double q, double k, bool verbatim) {
  const double scale = verbatim ? 4.0 / k : 2.0 / k;
  return q * std::log2(scale) + log2_gamma(q + 0.5 * k) - log2_gamma(0.5 * k);
}

// Model 3 reparameterized model: T - q + 1 =
//   A [ (q-1) ln(2 C^B / Gamma(B)) + q ln K_B(2C) - (B/2) ln q
//       - ln K_B(2 C sqrt(q)) ]
double neg_inv_gamma_model(double q, double A, double B, double C) {
  const double ln_const = std::log(2.0) + B * std::log(C) - ln_gamma(B);
  return A * ((q - 1.0) * ln_const + q * std::log(bessel_k(B, 2.0 * C)) -
              0.5 * B * std::log(q) -
              std::log(bessel_k(B, 2.0 * C * std::sqrt(q))));
}

std::vector<double> regressand(const RenyiCurve& curve) {
  if (curve.q.size() != curve.T.size())
    throw std::invalid_argument("fit: curve q/T lengths differ");
  std::vector<double> y(curve.q.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = curve.T[i] - curve.q[i] + 1.0;
  return y;
}

FitResult from_lm(const LMResult& lm, ModelFamily family, bool verbatim) {
  FitResult fit;
  fit.family = family;
  fit.verbatim = verbatim;
  fit.rmse = lm.rmse;
  fit.residuals = lm.residuals;
  fit.converged = lm.converged;
  fit.iterations = lm.iterations;
  return fit;
}

}  // namespace

FitResult fit_linear_family(const RenyiCurve& curve, ModelFamily family) {
  const std::vector<double> y = regressand(curve);
  if (y.size() < 2)
    throw std::invalid_argument("fit_linear_family: need at least 2 points");

  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = curve.q[i];
    switch (family) {
      case ModelFamily::LogNormal: x[i] = -q * q + q; break;
      case ModelFamily::ChiSquare: x[i] = chi_square_regressor(q); break;
      default:
        throw std::invalid_argument(
            "fit_linear_family: family is not one of the linear forms");
    }
    if (!std::isfinite(x[i]))
      throw std::invalid_argument(
          "fit_linear_family: regressor not finite on the grid");
  }

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0)
    throw std::invalid_argument("fit_linear_family: degenerate regressor");
  const double coeff = sxy / sxx;

  FitResult fit;
  fit.family = family;
  fit.converged = true;
  fit.iterations = 0;
  fit.residuals.resize(y.size());
  double cost = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    fit.residuals[i] = y[i] - coeff * x[i];
    cost += fit.residuals[i] * fit.residuals[i];
  }
  fit.rmse = std::sqrt(cost / static_cast<double>(y.size()));

  if (family == ModelFamily::LogNormal) {
    fit.params = {{"a", coeff}};  // a = sigma_Y^2 / (4 ln b)
  } else {
    fit.params = {{"A", coeff}};  // A = -1 / (2 log2 b)
    if (coeff < 0.0)
      fit.natural_params = {{"b", std::exp2(-0.5 / coeff)}};
  }
  return fit;
}

FitResult fit_nonlinear_family(const RenyiCurve& curve, ModelFamily family,
                               bool verbatim, std::span<const double> init,
                               int multi_starts) {
  const std::vector<double> y = regressand(curve);
  if (y.size() < 2)
    throw std::invalid_argument("fit_nonlinear_family: need at least 2 points");
  const std::vector<double> q = curve.q;
  double q_max = q.front();
  for (double v : q) q_max = std::max(q_max, v);

  // The optimizer works on the logs of the magnitudes; that conditions the
  // strongly correlated (A, B[, C]) valleys and keeps iterates positive.
  // `sign` carries each family's canonical parameter sign.
  ResidualMap residual_map;
  Bounds bounds;  // in log space
  std::vector<double> start;
  std::vector<std::string> names;
  std::vector<double> sign;

  auto guarded = [n = y.size()](auto&& eval) {
    std::vector<double> r(n);
    try {
      eval(r);
    } catch (const std::exception&) {
      r.assign(n, std::numeric_limits<double>::infinity());
    }
    return r;
  };

  switch (family) {
    case ModelFamily::LogGamma:
      // T - q + 1 = A^{-1} (ln(1 - Bq) - q ln(1 - B)), A = (2/beta) ln b,
      // B = 1/lambda; B bounded to keep every iterate in the moment domain
      names = {"A", "B"};
      sign = {1.0, 1.0};
      start = {0.03, 0.005};
      bounds.lower = {std::log(1e-12), std::log(1e-12)};
      bounds.upper = {std::log(1e8), std::log(1.0 / q_max) - 1e-9};
      residual_map = [y, q, guarded](std::span<const double> lp) {
        return guarded([&](std::vector<double>& r) {
          const double A = std::exp(lp[0]), B = std::exp(lp[1]);
          for (std::size_t i = 0; i < y.size(); ++i)
            r[i] = y[i] -
                   (std::log1p(-B * q[i]) - q[i] * std::log1p(-B)) / A;
        });
      };
      break;
    case ModelFamily::LogNegInvGamma:
      // A = 1/(2 ln b), B = beta, C = sqrt(lambda)
      names = {"A", "B", "C"};
      sign = {1.0, 1.0, 1.0};
      start = {0.25, 5.0, 0.4};
      bounds.lower = {std::log(1e-8), std::log(1e-4), std::log(1e-3)};
      bounds.upper = {std::log(1e8), std::log(50.0), std::log(1e3)};
      residual_map = [y, q, guarded](std::span<const double> lp) {
        return guarded([&](std::vector<double>& r) {
          const double A = std::exp(lp[0]), B = std::exp(lp[1]),
                       C = std::exp(lp[2]);
          for (std::size_t i = 0; i < y.size(); ++i)
            r[i] = y[i] - neg_inv_gamma_model(q[i], A, B, C);
        });
      };
      break;
    case ModelFamily::EvenPower:
      // A = -1/(2 log2 b) < 0, continuous k
      names = {"A", "k"};
      sign = {-1.0, 1.0};
      start = {-0.25, 1.5};
      bounds.lower = {std::log(1e-12), std::log(0.05)};
      bounds.upper = {std::log(1e8), std::log(60.0)};
      residual_map = [y, q, verbatim, guarded](std::span<const double> lp) {
        return guarded([&](std::vector<double>& r) {
          const double A = -std::exp(lp[0]), k = std::exp(lp[1]);
          for (std::size_t i = 0; i < y.size(); ++i)
            r[i] = y[i] - A * even_power_regressor(q[i], k, verbatim);
        });
      };
      break;
    case ModelFamily::ChiSquareK:
      // A = 1/(2 log2 b) > 0, continuous k
      names = {"A", "k"};
      sign = {1.0, 1.0};
      start = {0.25, 1.5};
      bounds.lower = {std::log(1e-12), std::log(0.05)};
      bounds.upper = {std::log(1e8), std::log(60.0)};
      residual_map = [y, q, verbatim, guarded](std::span<const double> lp) {
        return guarded([&](std::vector<double>& r) {
          const double A = std::exp(lp[0]), k = std::exp(lp[1]);
          for (std::size_t i = 0; i < y.size(); ++i)
            r[i] = y[i] - (-A) * chi_square_k_regressor(q[i], k, verbatim);
        });
      };
      break;
    default:
      throw std::invalid_argument(
          "fit_nonlinear_family: family is not one of the nonlinear forms");
  }

  if (!init.empty()) {
    if (init.size() != start.size())
      throw std::invalid_argument(
          "fit_nonlinear_family: wrong number of initial values");
    start.assign(init.begin(), init.end());
  }

  // Deterministic start table: the (possibly user-supplied) center first,
  // then spread points covering the magnitude ranges the families produce.
  std::vector<std::vector<double>> starts{start};
  switch (family) {
    case ModelFamily::LogGamma:
      starts.insert(starts.end(),
                    {{0.1, 0.02},
                     {0.3, 0.1},
                     {1.0, 0.3},
                     {3.0, 0.05},
                     {0.01, 0.001},
                     {0.3, 0.01},
                     {1.0, 0.05}});
      break;
    case ModelFamily::LogNegInvGamma:
      starts.insert(starts.end(),
                    {{0.5, 2.0, 1.0},
                     {0.7, 0.5, 3.0},
                     {1.0, 1.0, 1.0},
                     {0.1, 8.0, 0.3},
                     {2.0, 1.0, 0.5},
                     {0.3, 3.0, 2.0},
                     {1.0, 4.0, 1.5}});
      break;
    case ModelFamily::EvenPower:
      starts.insert(starts.end(),
                    {{-0.5, 1.0},
                     {-0.5, 2.0},
                     {-0.1, 3.0},
                     {-1.0, 1.0},
                     {-0.05, 5.0},
                     {-0.25, 4.0},
                     {-1.0, 2.0}});
      break;
    default:  // ChiSquareK
      starts.insert(starts.end(),
                    {{0.5, 1.0},
                     {0.5, 2.0},
                     {0.1, 3.0},
                     {1.0, 1.0},
                     {0.05, 5.0},
                     {0.25, 4.0},
                     {1.0, 2.0}});
      break;
  }
  if (multi_starts < static_cast<int>(starts.size()))
    starts.resize(std::max(1, multi_starts));

  auto to_log = [&](const std::vector<double>& natural) {
    std::vector<double> lp(natural.size());
    for (std::size_t j = 0; j < natural.size(); ++j) {
      const double magnitude = std::max(natural[j] * sign[j], 1e-12);
      lp[j] = std::log(magnitude);
    }
    return lp;
  };

  LMResult best;
  bool have_best = false;
  for (auto& candidate : starts) {
    const LMResult lm =
        levenberg_marquardt(residual_map, to_log(candidate), bounds);
    const bool better =
        !have_best || (lm.converged && !best.converged) ||
        (lm.converged == best.converged && lm.rmse < best.rmse);
    if (better) {
      best = lm;
      have_best = true;
    }
  }
  // polish: restart from the best point while it keeps improving
  for (int round = 0; round < 3 && !best.converged; ++round) {
    LMResult lm = levenberg_marquardt(residual_map, best.params, bounds);
    lm.iterations += best.iterations;
    if (lm.converged || lm.rmse < best.rmse)
      best = std::move(lm);
    else
      break;
  }

  FitResult fit = from_lm(best, family, verbatim);
  std::vector<double> natural(best.params.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    natural[j] = sign[j] * std::exp(best.params[j]);
    fit.params.emplace_back(names[j], natural[j]);
  }
  best.params = natural;

  switch (family) {
    case ModelFamily::LogGamma:
      fit.natural_params = {{"lambda", 1.0 / best.params[1]}};
      break;
    case ModelFamily::LogNegInvGamma:
      fit.natural_params = {{"b", std::exp(0.5 / best.params[0])},
                            {"beta", best.params[1]},
                            {"lambda", best.params[2] * best.params[2]}};
      break;
    case ModelFamily::EvenPower:
      if (best.params[0] < 0.0)
        fit.natural_params.emplace_back("b", std::exp2(-0.5 / best.params[0]));
      fit.natural_params.emplace_back("k", best.params[1]);
      fit.natural_params.emplace_back("k_round", std::round(best.params[1]));
      break;
    case ModelFamily::ChiSquareK:
      if (best.params[0] > 0.0)
        fit.natural_params.emplace_back("b", std::exp2(0.5 / best.params[0]));
      fit.natural_params.emplace_back("k", best.params[1]);
      fit.natural_params.emplace_back("k_round", std::round(best.params[1]));
      break;
    default: break;
  }
  return fit;
}

FitResult fit_family(const RenyiCurve& curve, ModelFamily family,
                     bool verbatim, std::span<const double> init,
                     int multi_starts) {
  if (family == ModelFamily::LogNormal || family == ModelFamily::ChiSquare)
    return fit_linear_family(curve, family);
  return fit_nonlinear_family(curve, family, verbatim, init, multi_starts);
}

}  // namespace srf
