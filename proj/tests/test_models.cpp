#include "srf/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "srf/specfun.hpp"

using srf::check_conditions;
using srf::evaluate_curves;
using srf::ModelFamily;
using srf::ModelSpec;
using srf::moment_log;
using srf::renyi_T;
using srf::spectrum_point;

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<ModelSpec> mean_one_specs() {
  std::vector<ModelSpec> specs;
  for (double b : {1.5, 2.0, 3.0}) {
    for (double s2 : {0.5, 1.0, 2.0})
      specs.push_back(ModelSpec::log_normal(b, s2));
    for (auto [lambda, beta] :
         {std::pair{3.0, 2.0}, {5.0, 1.0}, {8.0, 0.7}}) {
      specs.push_back(ModelSpec::log_gamma(b, lambda, beta));
      specs.push_back(ModelSpec::log_neg_inv_gamma(b, lambda, beta));
    }
    specs.push_back(ModelSpec::chi_square(b));
    for (int k : {1, 2, 3}) {
      specs.push_back(ModelSpec::even_power(b, k));
      specs.push_back(ModelSpec::chi_square_k(b, k));
    }
    for (double eps : {0.1, 0.5, 0.9})
      specs.push_back(ModelSpec::chi_square_eps(b, eps));
  }
  return specs;
}

// Central finite difference of renyi_T, the independent oracle for alpha.
double alpha_fd(const ModelSpec& spec, double q, double h = 1e-5) {
  return (renyi_T(spec, q + h) - renyi_T(spec, q - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("moment_log closed-form examples") {
  // E Lambda = 1 for the log-normal family
  CHECK(std::fabs(moment_log(ModelSpec::log_normal(2.0, 1.0), 1.0)) < 1e-15);

  // Gaussian fourth moment E Y^4 = 3
  CHECK(moment_log(ModelSpec::chi_square(2.0), 2.0) ==
        doctest::Approx(std::log2(3.0)).epsilon(1e-14));

  // gamma MGF oracle: E e^{qZ} = (1 - q/lambda)^{-beta}, shifted by c_Z
  const ModelSpec lg = ModelSpec::log_gamma(2.0, 3.0, 2.0);
  const double c_z = -2.0 * std::log(1.0 - 1.0 / 3.0);
  const double mgf_oracle =
      (-2.0 * c_z - 2.0 * std::log(1.0 - 2.0 / 3.0)) / kLn2;
  CHECK(moment_log(lg, 2.0) == doctest::Approx(mgf_oracle).epsilon(1e-13));
  // and the resulting T(2), cross-checked against the display-equation form
  CHECK(renyi_T(lg, 2.0) ==
        doctest::Approx(0.584962500721156).epsilon(1e-12));
  const double display = 2.0 * (1.0 - std::log2(2.0 / 3.0)) +
                         std::log2(1.0 / 3.0) - 1.0;
  CHECK(renyi_T(lg, 2.0) == doctest::Approx(display).epsilon(1e-13));
}

TEST_CASE("moment_log(spec, 0) is exactly zero for all families") {
  for (const auto& spec : mean_one_specs())
    CHECK(moment_log(spec, 0.0) == 0.0);
}

TEST_CASE("moment domain violations throw") {
  CHECK_THROWS_AS(moment_log(ModelSpec::log_gamma(2.0, 3.0, 2.0), 3.0),
                  std::domain_error);
  CHECK_THROWS_AS(moment_log(ModelSpec::log_gamma(2.0, 3.0, 2.0), 3.5),
                  std::domain_error);
  CHECK_THROWS_AS(moment_log(ModelSpec::chi_square(2.0), -0.5),
                  std::domain_error);
  CHECK_THROWS_AS(moment_log(ModelSpec::log_neg_inv_gamma(2.0, 3.0, 2.0), -0.1),
                  std::domain_error);
  CHECK_THROWS_AS(moment_log(ModelSpec::even_power(2.0, 2), -0.3),
                  std::domain_error);
  CHECK_THROWS_AS(moment_log(ModelSpec::chi_square_k(2.0, 2), -1.0),
                  std::domain_error);
}

TEST_CASE("renyi_T frozen values") {
  // closed form: T(2) = 1 - 2/(4 ln 2) for sigma^2 = 1, b = 2
  CHECK(renyi_T(ModelSpec::log_normal(2.0, 1.0), 2.0) ==
        doctest::Approx(0.278652479555518).epsilon(1e-14));
  CHECK(renyi_T(ModelSpec::log_normal(2.0, 1.0), 2.0) ==
        doctest::Approx(1.0 - 2.0 / (4.0 * kLn2)).epsilon(1e-14));

  // chi-square(k) verbatim display: T(2) = 2 - 1 - (1/2) log2 8 = -0.5
  CHECK(renyi_T(ModelSpec::chi_square_k(2.0, 2, true), 2.0) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  // and its T(1) = -(1/2) log2 2 = -0.5 as printed
  CHECK(renyi_T(ModelSpec::chi_square_k(2.0, 2, true), 1.0) ==
        doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("T(1) = 0 for every mean-one family over a parameter grid") {
  for (const auto& spec : mean_one_specs())
    CHECK(std::fabs(renyi_T(spec, 1.0)) < 1e-9);
}

TEST_CASE("T(q) -> -1 as q -> 0+ (Richardson-extrapolated at q = 1e-4)") {
  for (const auto& spec : mean_one_specs()) {
    // LogNegInvGamma approaches its limit only at rate q^beta (Bessel branch
    // at q = 0), so the extrapolation needs beta comfortably above 1.
    if (spec.family == ModelFamily::LogNegInvGamma && spec.beta <= 1.5)
      continue;
    const double extrapolated =
        2.0 * renyi_T(spec, 1e-4) - renyi_T(spec, 2e-4);
    CHECK(std::fabs(extrapolated + 1.0) < 1e-6);
  }
}

TEST_CASE("T is concave: second differences stay below 1e-10") {
  for (const auto& spec : mean_one_specs()) {
    const srf::MomentDomain dom = srf::moment_domain(spec);
    const double hi = std::min(3.0, dom.hi - 0.05);
    const double lo = 0.05;
    const int n = 200;
    const double h = (hi - lo) / n;
    for (int i = 1; i < n; ++i) {
      const double q = lo + i * h;
      const double dd = renyi_T(spec, q + h) - 2.0 * renyi_T(spec, q) +
                        renyi_T(spec, q - h);
      CHECK(dd <= 1e-10);
    }
  }
}

TEST_CASE("Jensen bound: T(q) <= q - 1 for q >= 1 when E Lambda = 1") {
  for (const auto& spec : mean_one_specs())
    for (double q : {1.0, 1.3, 1.7, 2.0, 2.5})
      CHECK(renyi_T(spec, q) <= q - 1.0 + 1e-12);
}

TEST_CASE("spectrum_point: analytic alpha matches finite differences") {
  for (const auto& spec : mean_one_specs()) {
    const srf::MomentDomain dom = srf::moment_domain(spec);
    for (double q : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
      if (q + 1e-4 >= dom.hi) continue;
      const double alpha = spectrum_point(spec, q).alpha;
      const double fd = alpha_fd(spec, q);
      CHECK(std::fabs(alpha - fd) <= 1e-5 * std::max(1.0, std::fabs(alpha)));
    }
  }
}

TEST_CASE("spectrum_point: Legendre identity f = q alpha - T") {
  for (const auto& spec : mean_one_specs())
    for (double q : {0.6, 1.0, 1.9}) {
      const auto p = spectrum_point(spec, q);
      CHECK(std::fabs(p.f + renyi_T(spec, q) - q * p.alpha) < 1e-12);
    }
}

TEST_CASE("spectrum_point frozen values") {
  // Model 1, q = 1: alpha = f = 1 - 1/(4 ln 2)
  const auto p = spectrum_point(ModelSpec::log_normal(2.0, 1.0), 1.0);
  CHECK(p.alpha == doctest::Approx(0.639326239777759).epsilon(1e-13));
  CHECK(p.f == doctest::Approx(0.639326239777759).epsilon(1e-13));

  // Model 4, q = 1: alpha = 1 - 1/2 - psi(3/2)/(2 ln 2) per the digamma
  // display with psi(3/2) = 2 - gamma - 2 ln 2; the finite-difference oracle
  // of T fixes the value at 0.4736780...
  const ModelSpec chi = ModelSpec::chi_square(2.0);
  const double psi_3_2 = 2.0 - std::numbers::egamma - 2.0 * kLn2;
  const double expected = 0.5 - psi_3_2 / (2.0 * kLn2);
  CHECK(spectrum_point(chi, 1.0).alpha ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(spectrum_point(chi, 1.0).alpha ==
        doctest::Approx(alpha_fd(chi, 1.0)).epsilon(1e-9));
  CHECK(spectrum_point(chi, 1.0).alpha ==
        doctest::Approx(0.473678047749470).epsilon(1e-10));
}

TEST_CASE("ChiSquare equals EvenPower with k = 1 in both modes") {
  const ModelSpec chi = ModelSpec::chi_square(2.0);
  const ModelSpec ep_norm = ModelSpec::even_power(2.0, 1, false);
  const ModelSpec ep_verb = ModelSpec::even_power(2.0, 1, true);
  for (double q = -0.4; q <= 3.0; q += 0.077) {
    CHECK(std::fabs(renyi_T(chi, q) - renyi_T(ep_norm, q)) < 1e-12);
    CHECK(std::fabs(renyi_T(chi, q) - renyi_T(ep_verb, q)) < 1e-12);
  }
}

TEST_CASE("ChiSquareEps converges to ChiSquare as eps -> 0") {
  const ModelSpec chi = ModelSpec::chi_square(2.0);
  const ModelSpec eps = ModelSpec::chi_square_eps(2.0, 1e-6);
  for (double q = 1.0; q <= 2.0; q += 0.1)
    CHECK(std::fabs(renyi_T(eps, q) - renyi_T(chi, q)) < 1e-4);
}

TEST_CASE("ChiSquareEps quadrature matches the exact q = 2 polynomial moment") {
  for (double eps : {0.01, 0.3, 0.9}) {
    const ModelSpec spec = ModelSpec::chi_square_eps(2.0, eps);
    // E ((1-eps) Y^2 + eps)^2 = 3 (1-eps)^2 + 2 eps (1-eps) + eps^2
    const double exact = 3.0 * (1.0 - eps) * (1.0 - eps) +
                         2.0 * eps * (1.0 - eps) + eps * eps;
    CHECK(moment_log(spec, 2.0) ==
          doctest::Approx(std::log2(exact)).epsilon(1e-12));
  }
}

TEST_CASE("LogNegInvGamma small-q path stays finite and tends to -q c_U") {
  const ModelSpec spec = ModelSpec::log_neg_inv_gamma(2.0, 3.0, 2.0);
  const double tiny = moment_log(spec, 1e-14);
  CHECK(std::isfinite(tiny));
  // below the K cutoff only the -q c_U / ln b term survives
  const double c_u = std::log(2.0 * 3.0 *
                              srf::bessel_k(2.0, 2.0 * std::sqrt(3.0))) -
                     srf::ln_gamma(2.0);
  CHECK(tiny == doctest::Approx(-1e-14 * c_u / kLn2).epsilon(1e-10));
}

TEST_CASE("check_conditions: theorem bounds on reference parameter sets") {
  // Model 1, b = 2, sigma^2 = 1: bound exp(1/3) = 1.3956 < 2
  const auto r1 = check_conditions(ModelSpec::log_normal(2.0, 1.0), 1.0, 1.0);
  CHECK(r1.satisfied);
  REQUIRE(r1.checks.size() == 1);
  CHECK(r1.checks[0].required ==
        doctest::Approx(std::exp(1.0 / 3.0)).epsilon(1e-14));

  // Model 2, b = 2, lambda = 3, beta = 2: L-set bound (1 + (1/9)/(1/3)) = 4/3
  const auto r2 =
      check_conditions(ModelSpec::log_gamma(2.0, 3.0, 2.0), 1.0, 1.0);
  CHECK(r2.satisfied);
  REQUIRE(r2.checks.size() == 2);
  CHECK(r2.checks[1].required == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  // lambda = 2 always fails the lambda > 2 hypothesis
  const auto r3 =
      check_conditions(ModelSpec::log_gamma(2.0, 2.0, 1.0), 1.0, 1.0);
  CHECK_FALSE(r3.satisfied);
  CHECK_FALSE(r3.checks[0].passed);
}

TEST_CASE("check_conditions: the general scaling-factor bound, hand-computed") {
  // Model 4: sigma_Lambda^2 = 2; with C = 1 the bound is
  // max(3^{1/3}, e^{2/3}) = max(1.44225, 1.94773)
  const auto chi = check_conditions(ModelSpec::chi_square(2.0), 1.0, 1.0);
  CHECK(chi.satisfied);
  REQUIRE(chi.checks.size() == 2);
  CHECK(chi.checks[0].required ==
        doctest::Approx(std::cbrt(3.0)).epsilon(1e-14));
  CHECK(chi.checks[1].required ==
        doctest::Approx(std::exp(2.0 / 3.0)).epsilon(1e-14));

  const auto tight = check_conditions(ModelSpec::chi_square(1.9), 1.0, 1.0);
  CHECK_FALSE(tight.satisfied);

  // Model 4': sigma_Lambda^2 = 2 (1 - eps)^2
  const auto eps =
      check_conditions(ModelSpec::chi_square_eps(2.0, 0.5), 1.0, 1.0);
  CHECK(eps.checks[0].required ==
        doctest::Approx(std::cbrt(1.5)).epsilon(1e-14));

  // Model 6 normalized: sigma_Lambda^2 = 2/k
  const auto csk = check_conditions(ModelSpec::chi_square_k(2.0, 4), 1.0, 1.0);
  CHECK(csk.checks[0].required ==
        doctest::Approx(std::cbrt(1.5)).epsilon(1e-14));

  // The q in [1,4] extension for Model 4 is reported but informational:
  // bound exp(max(sqrt(2), 1)^4 / 3) = exp(4/3)
  REQUIRE(chi.extensions.size() == 1);
  CHECK(chi.extensions[0].required ==
        doctest::Approx(std::exp(4.0 / 3.0)).epsilon(1e-14));
  CHECK_FALSE(chi.extensions[0].passed);  // 2 < 3.79
  CHECK(chi.satisfied);                   // unaffected

  CHECK_THROWS_AS(check_conditions(ModelSpec::chi_square(2.0), -1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("sigma_lambda_sq closed forms") {
  CHECK(srf::sigma_lambda_sq(ModelSpec::log_normal(2.0, 1.0)) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(srf::sigma_lambda_sq(ModelSpec::chi_square(2.0)) == 2.0);
  CHECK(srf::sigma_lambda_sq(ModelSpec::chi_square_eps(2.0, 0.25)) ==
        doctest::Approx(2.0 * 0.75 * 0.75).epsilon(1e-14));
  CHECK(srf::sigma_lambda_sq(ModelSpec::chi_square_k(2.0, 8)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // LogGamma: (1 - 1/3)^4 (1 - 2/3)^{-2} - 1 = (16/81)(9) - 1 = 7/9
  CHECK(srf::sigma_lambda_sq(ModelSpec::log_gamma(2.0, 3.0, 2.0)) ==
        doctest::Approx(7.0 / 9.0).epsilon(1e-13));
  // EvenPower k=1 must agree with ChiSquare
  CHECK(srf::sigma_lambda_sq(ModelSpec::even_power(2.0, 1)) ==
        doctest::Approx(2.0).epsilon(1e-13));
  // lambda <= 2 has a divergent second moment
  CHECK(std::isinf(srf::sigma_lambda_sq(ModelSpec::log_gamma(2.0, 2.0, 1.0))));
}

TEST_CASE("evaluate_curves: trivial grid and validation") {
  const std::vector<double> one{1.0};
  for (const auto& spec : mean_one_specs()) {
    const auto [renyi, spectrum] = evaluate_curves(spec, one);
    CHECK(std::fabs(renyi.T[0]) < 1e-9);
    CHECK(spectrum.f.size() == 1);
  }
  const std::vector<double> bad{1.0, 1.0};
  CHECK_THROWS_AS(evaluate_curves(ModelSpec::chi_square(2.0), bad),
                  std::invalid_argument);
}

TEST_CASE("evaluate_curves: reference grids are concave through T(1)=0") {
  std::vector<double> grid;
  for (double q = 0.01; q < 3.0; q += 0.01) grid.push_back(q);
  const ModelSpec specs[] = {
      ModelSpec::log_normal(2.0, 1.0), ModelSpec::chi_square(2.0),
      ModelSpec::even_power(2.0, 2), ModelSpec::chi_square_k(2.0, 2)};
  for (const auto& spec : specs) {
    const auto [renyi, spectrum] = evaluate_curves(spec, grid);
    for (std::size_t i = 1; i + 1 < renyi.T.size(); ++i)
      CHECK(renyi.T[i + 1] - 2.0 * renyi.T[i] + renyi.T[i - 1] <= 1e-10);
    // T passes through (1, 0)
    CHECK(std::fabs(renyi.T[99]) < 1e-9);
    CHECK(renyi.provenance.find("theoretical") == 0);
  }
  // LogGamma on a grid inside its domain (q < lambda = 3)
  const auto [lg, lg_spec] =
      evaluate_curves(ModelSpec::log_gamma(2.0, 3.0, 2.0), grid);
  for (std::size_t i = 1; i + 1 < lg.T.size(); ++i)
    CHECK(lg.T[i + 1] - 2.0 * lg.T[i] + lg.T[i - 1] <= 1e-10);
}

TEST_CASE("verbatim display modes: alpha matches finite differences too") {
  for (double b : {1.5, 2.0, 3.0})
    for (int k : {1, 2, 3})
      for (const ModelSpec& spec : {ModelSpec::even_power(b, k, true),
                                    ModelSpec::chi_square_k(b, k, true)}) {
        for (double q : {0.5, 1.0, 2.0, 3.0}) {
          if (q - 1e-4 <= srf::moment_domain(spec).lo) continue;
          const double alpha = spectrum_point(spec, q).alpha;
          const double fd = alpha_fd(spec, q);
          CHECK(std::fabs(alpha - fd) <=
                1e-5 * std::max(1.0, std::fabs(alpha)));
        }
        // verbatim curves are still concave
        for (double q = 0.3; q <= 2.8; q += 0.1) {
          const double dd = renyi_T(spec, q + 0.1) - 2.0 * renyi_T(spec, q) +
                            renyi_T(spec, q - 0.1);
          CHECK(dd <= 1e-10);
        }
      }
}

TEST_CASE("LogNegInvGamma: theorem bound squared equals 1 + sigma_Lambda^2") {
  // two independent formulas for E Lambda^2 must agree
  for (auto [lambda, beta] : {std::pair{3.0, 2.0}, {5.0, 1.0}, {8.0, 0.7}}) {
    const ModelSpec spec = ModelSpec::log_neg_inv_gamma(2.0, lambda, beta);
    const auto report = check_conditions(spec, 1.0, 1.0);
    const double bound = report.checks[2].required;
    const double second_moment = 1.0 + srf::sigma_lambda_sq(spec);
    CHECK(bound * bound == doctest::Approx(second_moment).epsilon(1e-11));
  }
}
