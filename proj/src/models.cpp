#include "srf/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "srf/specfun.hpp"

namespace srf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double ln_b(const ModelSpec& spec) { return std::log(spec.b); }

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

// c_Z = -beta ln(1 - 1/lambda), the LogGamma mean-one shift.
double log_gamma_shift(const ModelSpec& spec) {
  return -spec.beta * std::log1p(-1.0 / spec.lambda);
}

// c_U = ln(2 lambda^{beta/2} K_beta(2 sqrt(lambda)) / Gamma(beta)).
double log_neg_inv_gamma_shift(const ModelSpec& spec) {
  return std::log(2.0) + 0.5 * spec.beta * std::log(spec.lambda) +
         std::log(bessel_k(spec.beta, 2.0 * std::sqrt(spec.lambda))) -
         ln_gamma(spec.beta);
}

// ln E exp(q U) with U = -1/Z, Z ~ Gamma(beta, lambda):
// ln(2 (q lambda)^{beta/2} K_beta(2 sqrt(q lambda)) / Gamma(beta)).
// Below z = 1e-6 the small-argument form K_beta(z) ~ Gamma(beta)/2 (z/2)^-beta
// makes the whole expression vanish, avoiding 0 * inf at q -> 0+.
double log_mgf_neg_inv_gamma(double beta, double q_lambda) {
  const double z = 2.0 * std::sqrt(q_lambda);
  if (z < 1e-6) return 0.0;
  return std::log(2.0) + 0.5 * beta * std::log(q_lambda) +
         std::log(bessel_k(beta, z)) - ln_gamma(beta);
}

const GaussLegendreRule& legendre_rule() {
  static const GaussLegendreRule rule = gauss_legendre(16);
  return rule;
}

// E Lambda^q and E Lambda^q ln Lambda for Lambda = (1-eps) Y^2 + eps,
// Y ~ N(0,1). Panel Gauss-Legendre over y >= 0 with panels refined
// geometrically toward the eps boundary layer at y ~ sqrt(eps), where the
// integrand's derivatives blow up as eps -> 0.
void chi_square_eps_moments(double eps, double q, double* moment,
                            double* moment_log_weighted) {
  const auto& rule = legendre_rule();
  const double layer = std::sqrt(eps / (1.0 - eps));
  const double y_max = std::sqrt(2.0 * std::max(std::fabs(q), 1.0)) + 12.0;

  std::vector<double> edges;
  edges.push_back(0.0);
  for (double e = layer / 16.0; e < 1.0; e *= 2.0) edges.push_back(e);
  for (double e = 1.0; e < y_max; e += 1.0) edges.push_back(e);
  edges.push_back(y_max);

  const double inv_sqrt_two_pi = 1.0 / std::sqrt(2.0 * kPi);
  double m = 0.0, ml = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double y = mid + half * rule.nodes[i];
      const double lam = (1.0 - eps) * y * y + eps;
      const double lam_q = std::pow(lam, q);
      const double w =
          2.0 * inv_sqrt_two_pi * std::exp(-0.5 * y * y) * half * rule.weights[i];
      m += w * lam_q;
      if (moment_log_weighted) ml += w * lam_q * std::log(lam);
    }
  }
  if (moment) *moment = m;
  if (moment_log_weighted) *moment_log_weighted = ml;
}

}  // namespace

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::LogNormal: return "lognormal";
    case ModelFamily::LogGamma: return "loggamma";
    case ModelFamily::LogNegInvGamma: return "logneginvgamma";
    case ModelFamily::ChiSquare: return "chisquare";
    case ModelFamily::EvenPower: return "evenpower";
    case ModelFamily::ChiSquareK: return "chisquarek";
    case ModelFamily::ChiSquareEps: return "chisquareeps";
  }
  return "unknown";
}

ModelSpec ModelSpec::log_normal(double b, double sigma2) {
  require(b > 1.0, "ModelSpec: scaling factor b must exceed 1");
  require(sigma2 > 0.0, "ModelSpec: sigma_Y^2 must be positive");
  ModelSpec s;
  s.family = ModelFamily::LogNormal;
  s.b = b;
  s.sigma2_Y = sigma2;
  return s;
}

ModelSpec ModelSpec::log_gamma(double b, double lambda, double beta) {
  require(b > 1.0, "ModelSpec: scaling factor b must exceed 1");
  require(lambda > 0.0 && beta > 0.0,
          "ModelSpec: lambda and beta must be positive");
  ModelSpec s;
  s.family = ModelFamily::LogGamma;
  s.b = b;
  s.lambda = lambda;
  s.beta = beta;
  return s;
}

ModelSpec ModelSpec::log_neg_inv_gamma(double b, double lambda, double beta) {
  ModelSpec s = log_gamma(b, lambda, beta);
  s.family = ModelFamily::LogNegInvGamma;
  return s;
}

ModelSpec ModelSpec::chi_square(double b) {
  require(b > 1.0, "ModelSpec: scaling factor b must exceed 1");
  ModelSpec s;
  s.family = ModelFamily::ChiSquare;
  s.b = b;
  return s;
}

ModelSpec ModelSpec::even_power(double b, int k, bool verbatim) {
  require(b > 1.0, "ModelSpec: scaling factor b must exceed 1");
  require(k >= 1, "ModelSpec: k must be a positive integer");
  ModelSpec s;
  s.family = ModelFamily::EvenPower;
  s.b = b;
  s.k = k;
  s.verbatim = verbatim;
  return s;
}

ModelSpec ModelSpec::chi_square_k(double b, int k, bool verbatim) {
  ModelSpec s = even_power(b, k, verbatim);
  s.family = ModelFamily::ChiSquareK;
  return s;
}

ModelSpec ModelSpec::chi_square_eps(double b, double eps) {
  require(b > 1.0, "ModelSpec: scaling factor b must exceed 1");
  require(eps > 0.0 && eps < 1.0, "ModelSpec: eps must lie in (0, 1)");
  ModelSpec s;
  s.family = ModelFamily::ChiSquareEps;
  s.b = b;
  s.eps = eps;
  return s;
}

std::string ModelSpec::description() const {
  std::ostringstream out;
  out << family_name(family) << "(b=" << b;
  switch (family) {
    case ModelFamily::LogNormal: out << ", sigma2=" << sigma2_Y; break;
    case ModelFamily::LogGamma:
    case ModelFamily::LogNegInvGamma:
      out << ", lambda=" << lambda << ", beta=" << beta;
      break;
    case ModelFamily::ChiSquare: break;
    case ModelFamily::EvenPower:
    case ModelFamily::ChiSquareK:
      out << ", k=" << k << (verbatim ? ", verbatim" : "");
      break;
    case ModelFamily::ChiSquareEps: out << ", eps=" << eps; break;
  }
  out << ")";
  return out.str();
}

MomentDomain moment_domain(const ModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::LogNormal: return {-kInf, kInf};
    case ModelFamily::LogGamma: return {-kInf, spec.lambda};
    case ModelFamily::LogNegInvGamma: return {0.0, kInf};
    case ModelFamily::ChiSquare: return {-0.5, kInf};
    case ModelFamily::EvenPower: return {-0.5 / spec.k, kInf};
    case ModelFamily::ChiSquareK: return {-0.5 * spec.k, kInf};
    case ModelFamily::ChiSquareEps: return {-kInf, kInf};
  }
  return {0.0, 0.0};
}

double moment_log(const ModelSpec& spec, double q) {
  if (q == 0.0) return 0.0;  // E Lambda^0 = 1 for every family
  const MomentDomain dom = moment_domain(spec);
  const bool lo_ok = (spec.family == ModelFamily::LogNegInvGamma) ? q >= dom.lo
                                                                  : q > dom.lo;
  if (!lo_ok || !(q < dom.hi)) {
    std::ostringstream msg;
    msg << "moment_log: q=" << q << " outside the moment domain of "
        << spec.description();
    throw std::domain_error(msg.str());
  }

  double ln_moment = 0.0;
  switch (spec.family) {
    case ModelFamily::LogNormal:
      ln_moment = 0.5 * spec.sigma2_Y * (q * q - q);
      break;
    case ModelFamily::LogGamma:
      // E e^{qZ} = (1 - q/lambda)^{-beta}, shifted by c_Z
      ln_moment = -q * log_gamma_shift(spec) -
                  spec.beta * std::log1p(-q / spec.lambda);
      break;
    case ModelFamily::LogNegInvGamma:
      ln_moment = -q * log_neg_inv_gamma_shift(spec) +
                  log_mgf_neg_inv_gamma(spec.beta, q * spec.lambda);
      break;
    case ModelFamily::ChiSquare:
      // E Y^{2q} = 2^q Gamma(q + 1/2) / sqrt(pi)
      ln_moment = q * std::log(2.0) + ln_gamma(q + 0.5) - 0.5 * std::log(kPi);
      break;
    case ModelFamily::EvenPower:
      if (spec.verbatim)
        ln_moment = spec.k * q * std::log(2.0) + ln_gamma(spec.k * q + 0.5) -
                    0.5 * std::log(kPi);
      else
        // sigma^{2k} = sqrt(pi) / (2^k Gamma(k+1/2)) makes E Lambda = 1
        ln_moment = ln_gamma(spec.k * q + 0.5) - q * ln_gamma(spec.k + 0.5) -
                    0.5 * (1.0 - q) * std::log(kPi);
      break;
    case ModelFamily::ChiSquareK: {
      // chi-square moment E W^q = 2^q Gamma(q + k/2) / Gamma(k/2)
      const double chi2 = q * std::log(2.0) + ln_gamma(q + 0.5 * spec.k) -
                          ln_gamma(0.5 * spec.k);
      // normalized: Lambda = W/k; verbatim: Lambda = (2/k) W per the display form
      const double scale = spec.verbatim ? 2.0 / spec.k : 1.0 / spec.k;
      ln_moment = q * std::log(scale) + chi2;
      break;
    }
    case ModelFamily::ChiSquareEps: {
      double m = 0.0;
      chi_square_eps_moments(spec.eps, q, &m, nullptr);
      ln_moment = std::log(m);
      break;
    }
  }
  return ln_moment / ln_b(spec);
}

double renyi_T(const ModelSpec& spec, double q) {
  return q - 1.0 - 0.5 * moment_log(spec, q);
}

SpectrumPoint spectrum_point(const ModelSpec& spec, double q) {
  const double lb = ln_b(spec);
  double alpha = 0.0;
  switch (spec.family) {
    case ModelFamily::LogNormal:
      alpha = 1.0 + spec.sigma2_Y / (4.0 * lb) -
              spec.sigma2_Y * q / (2.0 * lb);
      break;
    case ModelFamily::LogGamma:
      if (!(q < spec.lambda))
        throw std::domain_error("spectrum_point: q >= lambda for LogGamma");
      alpha = 1.0 - 0.5 * spec.beta * std::log1p(-1.0 / spec.lambda) / lb +
              spec.beta / (2.0 * lb * (q - spec.lambda));
      break;
    case ModelFamily::LogNegInvGamma: {
      if (!(q > 0.0))
        throw std::domain_error(
            "spectrum_point: q must be positive for LogNegInvGamma");
      // alpha via the identity K_beta'(z) = -(K_{beta-1} + K_{beta+1})/2
      const double z = 2.0 * std::sqrt(q * spec.lambda);
      const double k_b = bessel_k(spec.beta, z);
      const double k_m = bessel_k(std::fabs(spec.beta - 1.0), z);
      const double k_p = bessel_k(spec.beta + 1.0, z);
      alpha = 1.0 + log_neg_inv_gamma_shift(spec) / (2.0 * lb) -
              spec.beta / (4.0 * q * lb) +
              std::sqrt(spec.lambda) * (k_m + k_p) /
                  (4.0 * lb * std::sqrt(q) * k_b);
      break;
    }
    case ModelFamily::ChiSquare:
      alpha = 1.0 - (std::log(2.0) + digamma(q + 0.5)) / (2.0 * lb);
      break;
    case ModelFamily::EvenPower:
      if (spec.verbatim)
        alpha = 1.0 - spec.k * (std::log(2.0) + digamma(spec.k * q + 0.5)) /
                          (2.0 * lb);
      else
        alpha = 1.0 - (spec.k * digamma(spec.k * q + 0.5) +
                       0.5 * std::log(kPi) - ln_gamma(spec.k + 0.5)) /
                          (2.0 * lb);
      break;
    case ModelFamily::ChiSquareK: {
      const double scale = spec.verbatim ? 2.0 / spec.k : 1.0 / spec.k;
      alpha = 1.0 - (std::log(2.0 * scale) + digamma(q + 0.5 * spec.k)) /
                        (2.0 * lb);
      break;
    }
    case ModelFamily::ChiSquareEps: {
      double m = 0.0, ml = 0.0;
      chi_square_eps_moments(spec.eps, q, &m, &ml);
      alpha = 1.0 - ml / m / (2.0 * lb);
      break;
    }
  }
  const double T = renyi_T(spec, q);
  return SpectrumPoint{alpha, q * alpha - T};
}

double sigma_lambda_sq(const ModelSpec& spec) {
  switch (spec.family) {
    case ModelFamily::LogNormal:
      return std::expm1(spec.sigma2_Y);
    case ModelFamily::LogGamma: {
      if (!(spec.lambda > 2.0)) return kInf;
      // E Lambda^2 - 1 = (1-1/lambda)^{2 beta} (1-2/lambda)^{-beta} - 1
      return std::expm1(spec.beta *
                        (2.0 * std::log1p(-1.0 / spec.lambda) -
                         std::log1p(-2.0 / spec.lambda)));
    }
    case ModelFamily::LogNegInvGamma: {
      const double ln_e2 = -2.0 * log_neg_inv_gamma_shift(spec) +
                           log_mgf_neg_inv_gamma(spec.beta, 2.0 * spec.lambda);
      return std::expm1(ln_e2);
    }
    case ModelFamily::ChiSquare:
      return 2.0;
    case ModelFamily::EvenPower:
      // sqrt(pi) Gamma(2k + 1/2) / Gamma(k + 1/2)^2 - 1
      return std::expm1(0.5 * std::log(kPi) + ln_gamma(2.0 * spec.k + 0.5) -
                        2.0 * ln_gamma(spec.k + 0.5));
    case ModelFamily::ChiSquareK:
      return 2.0 / spec.k;
    case ModelFamily::ChiSquareEps:
      return 2.0 * (1.0 - spec.eps) * (1.0 - spec.eps);
  }
  return kInf;
}

namespace {

ConditionCheck make_check(std::string name, double required, double actual) {
  const bool passed = actual > required;
  return ConditionCheck{std::move(name), required, actual, passed};
}

// L_{beta,lambda} membership: lambda > 2 and
// b > (1 + lambda^{-2} / (1 - 2/lambda))^{beta/2}.
void append_l_set_checks(const ModelSpec& spec, ValidityReport& report) {
  report.checks.push_back(make_check("lambda > 2", 2.0, spec.lambda));
  double bound = kInf;
  if (spec.lambda > 2.0) {
    const double ratio =
        (1.0 / (spec.lambda * spec.lambda)) / (1.0 - 2.0 / spec.lambda);
    bound = std::pow(1.0 + ratio, 0.5 * spec.beta);
  }
  report.checks.push_back(
      make_check("b > (1 + lambda^-2/(1 - 2/lambda))^(beta/2)", bound, spec.b));
}

void append_general_bound(const ModelSpec& spec, double C,
                          ValidityReport& report) {
  const double var = sigma_lambda_sq(spec);
  report.checks.push_back(
      make_check("b > (1 + sigma_Lambda^2)^(1/3)", std::cbrt(1.0 + var),
                 spec.b));
  report.checks.push_back(make_check("b > exp(sigma_Lambda^2 C / 3)",
                                     std::exp(var * C / 3.0), spec.b));
}

}  // namespace

ValidityReport check_conditions(const ModelSpec& spec, double C,
                                double gamma) {
  require(C > 0.0 && gamma > 0.0,
          "check_conditions: covariance bound constants must be positive");

  ValidityReport report;
  switch (spec.family) {
    case ModelFamily::LogNormal:
      report.checks.push_back(make_check("b > exp(sigma_Y^2 / 3)",
                                         std::exp(spec.sigma2_Y / 3.0),
                                         spec.b));
      break;
    case ModelFamily::LogGamma:
      append_l_set_checks(spec, report);
      break;
    case ModelFamily::LogNegInvGamma: {
      append_l_set_checks(spec, report);
      // b > sqrt(Gamma(beta) 2^{beta/2 - 1} K_beta(2 sqrt(2 lambda)) /
      //          (lambda^{beta/2} K_beta(2 sqrt(lambda))^2))
      const double ln_bound2 =
          ln_gamma(spec.beta) + (0.5 * spec.beta - 1.0) * std::log(2.0) +
          std::log(bessel_k(spec.beta, 2.0 * std::sqrt(2.0 * spec.lambda))) -
          0.5 * spec.beta * std::log(spec.lambda) -
          2.0 * std::log(bessel_k(spec.beta, 2.0 * std::sqrt(spec.lambda)));
      report.checks.push_back(make_check(
          "b > sqrt(Gamma(beta) 2^(beta/2-1) K_beta(2 sqrt(2 lambda)) / "
          "(lambda^(beta/2) K_beta(2 sqrt(lambda))^2))",
          std::exp(0.5 * ln_bound2), spec.b));
      break;
    }
    case ModelFamily::ChiSquare: {
      append_general_bound(spec, C, report);
      // moment extension to q in [1,4]
      const double s = std::max(std::sqrt(sigma_lambda_sq(spec)) * C, 1.0);
      report.extensions.push_back(
          make_check("q in [1,4] extension: b > exp(max(sigma_Lambda C, 1)^4 / 3)",
                     std::exp(std::pow(s, 4.0) / 3.0), spec.b));
      break;
    }
    case ModelFamily::EvenPower:
    case ModelFamily::ChiSquareK:
    case ModelFamily::ChiSquareEps:
      append_general_bound(spec, C, report);
      break;
  }

  report.satisfied = true;
  for (const auto& check : report.checks) report.satisfied &= check.passed;
  return report;
}

std::pair<RenyiCurve, SpectrumCurve> evaluate_curves(
    const ModelSpec& spec, std::span<const double> q_grid) {
  for (std::size_t i = 1; i < q_grid.size(); ++i)
    require(q_grid[i] > q_grid[i - 1],
            "evaluate_curves: q grid must be strictly increasing");

  RenyiCurve renyi;
  SpectrumCurve spectrum;
  renyi.provenance = "theoretical " + spec.description();
  renyi.q.assign(q_grid.begin(), q_grid.end());
  spectrum.q = renyi.q;
  renyi.T.reserve(q_grid.size());
  spectrum.alpha.reserve(q_grid.size());
  spectrum.f.reserve(q_grid.size());
  for (const double q : q_grid) {
    renyi.T.push_back(renyi_T(spec, q));
    const SpectrumPoint p = spectrum_point(spec, q);
    spectrum.alpha.push_back(p.alpha);
    spectrum.f.push_back(p.f);
  }
  return {std::move(renyi), std::move(spectrum)};
}

}  // namespace srf
