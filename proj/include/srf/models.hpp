#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace srf {

/// The mother-field families with explicit Renyi functions.
enum class ModelFamily {
  LogNormal,       // exp(Y - sigma_Y^2/2), Y Gaussian
  LogGamma,        // exp(Z - c_Z), Z gamma-correlated
  LogNegInvGamma,  // exp(U - c_U), U = -1/Z
  ChiSquare,       // Y^2, Y standard Gaussian
  EvenPower,       // Y^{2k}, Y Gaussian with normalizing variance
  ChiSquareK,      // (Z_1^2 + ... + Z_k^2)/k
  ChiSquareEps,    // (1-eps) Y^2 + eps
};

std::string family_name(ModelFamily family);

/// Parameters of one model family plus the cascade scaling factor b > 1.
/// EvenPower and ChiSquareK carry a "verbatim" switch: the default
/// normalized form keeps the mother mean at one, the verbatim form
/// reproduces the published display equations (which differ by a
/// deterministic factor); both coincide at k = 1.
struct ModelSpec {
  ModelFamily family = ModelFamily::LogNormal;
  double b = 2.0;
  double sigma2_Y = 1.0;  // LogNormal
  double lambda = 0.0;    // LogGamma, LogNegInvGamma
  double beta = 0.0;      // LogGamma, LogNegInvGamma
  int k = 1;              // EvenPower, ChiSquareK
  double eps = 0.0;       // ChiSquareEps
  bool verbatim = false;  // EvenPower, ChiSquareK only

  static ModelSpec log_normal(double b, double sigma2);
  static ModelSpec log_gamma(double b, double lambda, double beta);
  static ModelSpec log_neg_inv_gamma(double b, double lambda, double beta);
  static ModelSpec chi_square(double b);
  static ModelSpec even_power(double b, int k, bool verbatim = false);
  static ModelSpec chi_square_k(double b, int k, bool verbatim = false);
  static ModelSpec chi_square_eps(double b, double eps);

  std::string description() const;
};

/// Open moment domain (lo, hi) for q; renyi_T and moment_log require
/// lo < q < hi (q = 0 is always admitted and gives a zero moment log).
struct MomentDomain {
  double lo;
  double hi;
};
MomentDomain moment_domain(const ModelSpec& spec);

/// log_b E Lambda^q from the family's closed-form moments
/// (Gauss-Hermite quadrature for ChiSquareEps). Throws std::domain_error
/// outside the moment domain.
double moment_log(const ModelSpec& spec, double q);

/// Renyi function T(q) = q - 1 - (1/2) log_b E Lambda^q.
double renyi_T(const ModelSpec& spec, double q);

/// Singularity exponent alpha(q) = dT/dq (analytic per family) and the
/// spectrum value f = q * alpha - T(q).
struct SpectrumPoint {
  double alpha;
  double f;
};
SpectrumPoint spectrum_point(const ModelSpec& spec, double q);

/// Mother-field variance sigma_Lambda^2 of the family (normalized
/// forms); +inf when the family's second moment diverges.
double sigma_lambda_sq(const ModelSpec& spec);

/// One convergence-condition inequality, uniformly of the form
/// actual > required.
struct ConditionCheck {
  std::string name;
  double required;
  double actual;
  bool passed;
};

/// Outcome of the family-applicable convergence conditions. `checks` are the
/// theorem hypotheses (satisfied is their conjunction); `extensions` are
/// informational bounds for moment ranges beyond q in [1,2] and do not
/// affect `satisfied`.
struct ValidityReport {
  bool satisfied = false;
  std::vector<ConditionCheck> checks;
  std::vector<ConditionCheck> extensions;
};

/// Evaluates every family-applicable convergence inequality for the
/// covariance bound |rho(r)| <= C exp(-gamma r). Reports failures, never
/// throws on them.
ValidityReport check_conditions(const ModelSpec& spec, double C, double gamma);

/// Sampled Renyi function.
struct RenyiCurve {
  std::vector<double> q;
  std::vector<double> T;
  std::string provenance;
};

/// Sampled singularity spectrum; f[i] = q[i]*alpha[i] - T(q[i]).
struct SpectrumCurve {
  std::vector<double> q;
  std::vector<double> alpha;
  std::vector<double> f;
};

/// Element-wise renyi_T and spectrum_point over a strictly increasing grid.
std::pair<RenyiCurve, SpectrumCurve> evaluate_curves(
    const ModelSpec& spec, std::span<const double> q_grid);

}  // namespace srf
