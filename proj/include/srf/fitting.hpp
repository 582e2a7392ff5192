#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srf/models.hpp"

namespace srf {

struct LMOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  double gradient_tolerance = 1e-10;
  double fd_step = 1e-7;  // relative forward-difference step for the Jacobian
  double initial_damping = 1e-8;  // near-Gauss-Newton first step
};

/// Box constraints; empty vectors mean unconstrained.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct LMResult {
  std::vector<double> params;
  std::vector<double> residuals;
  double rmse = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

using ResidualMap =
    std::function<std::vector<double>(std::span<const double>)>;

/// Damped Gauss-Newton (Levenberg-Marquardt) with a numeric forward-difference
/// Jacobian and optional box projection. Non-finite residuals are reported as
/// non-convergence, never a crash.
LMResult levenberg_marquardt(const ResidualMap& residual_map,
                             std::vector<double> init,
                             const std::optional<Bounds>& bounds = {},
                             const LMOptions& options = {});

/// Fit of one family's reparameterized Renyi form to a sampled curve.
struct FitResult {
  ModelFamily family = ModelFamily::LogNormal;
  bool verbatim = false;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, double>> natural_params;
  double rmse = 0.0;
  std::vector<double> residuals;
  bool converged = false;
  int iterations = 0;
};

/// Closed-form no-intercept least squares of T(q) - q + 1 on the family
/// regressor. Families: LogNormal (parameter a) and ChiSquare (parameter A).
FitResult fit_linear_family(const RenyiCurve& curve, ModelFamily family);

/// Nonlinear least squares via levenberg_marquardt in the published
/// reparameterizations. Families: LogGamma (A, B), LogNegInvGamma (A, B, C),
/// EvenPower (A, k), ChiSquareK (A, k). `init` overrides the default start;
/// otherwise `multi_starts` log-spaced starts around the default are tried
/// and the best RMSE wins.
FitResult fit_nonlinear_family(const RenyiCurve& curve, ModelFamily family,
                               bool verbatim = false,
                               std::span<const double> init = {},
                               int multi_starts = 8);

/// Dispatches to the linear or nonlinear fitter for the family.
FitResult fit_family(const RenyiCurve& curve, ModelFamily family,
                     bool verbatim = false, std::span<const double> init = {},
                     int multi_starts = 8);

}  // namespace srf
