#include "srf/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace srf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;

[[noreturn]] void domain_fail(const char* fn, double x) {
  throw std::domain_error(std::string(fn) + ": argument " + std::to_string(x) +
                          " outside domain");
}

}  // namespace

// Lanczos approximation with g = 7 and a 9-term series. The relative error
// of the reconstructed Gamma is a few 1e-14 over the positive real axis,
// i.e. a few 1e-14 absolute in log space.
double ln_gamma(double x) {
  static const double coeff[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;

  if (!(x > 0.0)) domain_fail("ln_gamma", x);

  // Reflection keeps the series argument away from the pole at 0.
  if (x < 0.5)
    return std::log(kPi / std::sin(kPi * x)) - ln_gamma(1.0 - x);

  const double z = x - 1.0;
  double series = coeff[0];
  for (int i = 1; i < 9; ++i) series += coeff[i] / (z + i);
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t +
         std::log(series);
}

// Recurrence to push the argument above 10, then the Bernoulli-number
// asymptotic series; truncation error there is below 1e-15.
double digamma(double x) {
  if (!(x > 0.0)) domain_fail("digamma", x);

  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum B_{2n} / (2n x^{2n}), Horner in 1/x^2.
  const double tail =
      ((((((-1.0 / 12.0) * inv2 + 691.0 / 32760.0) * inv2 - 1.0 / 132.0) *
             inv2 + 1.0 / 240.0) * inv2 - 1.0 / 252.0) *
           inv2 + 1.0 / 120.0) * inv2 - 1.0 / 12.0;
  return result + std::log(x) - 0.5 * inv + tail * inv2;
}

namespace {

// 1/Gamma(1 +- mu) combinations used by the Temme series:
//   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// A short Taylor expansion takes over for tiny mu where the quotient
// cancels.
void temme_gammas(double mu, double& gam1, double& gam2, double& one_over_gamma_1p,
                  double& one_over_gamma_1m) {
  one_over_gamma_1p = std::exp(-ln_gamma(1.0 + mu));
  one_over_gamma_1m = std::exp(-ln_gamma(1.0 - mu));
  if (std::fabs(mu) < 1e-5) {
    // With f(mu) = 1/Gamma(1+mu) = 1 + g mu + a mu^2 + b mu^3 + O(mu^4),
    // gam1 = (f(-mu) - f(mu))/(2mu) = -g - b mu^2 where
    // b = g^3/6 - g pi^2/12 + zeta(3)/3 = -0.04200263...
    gam1 = -kEulerGamma + 0.0420026350340952355 * mu * mu;
  } else {
    gam1 = (one_over_gamma_1m - one_over_gamma_1p) / (2.0 * mu);
  }
  gam2 = 0.5 * (one_over_gamma_1m + one_over_gamma_1p);
}

// Temme's series for K_mu(x) and K_{mu+1}(x), |mu| <= 1/2, 0 < x <= 2.
void bessel_k_temme(double x, double mu, double& k_mu, double& k_mu1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_iter = 10000;

  const double half_x = 0.5 * x;
  const double mu2 = mu * mu;
  const double pi_mu = kPi * mu;
  const double fact =
      (std::fabs(pi_mu) < eps) ? 1.0 : pi_mu / std::sin(pi_mu);
  const double log_half_x = -std::log(half_x);
  const double e = mu * log_half_x;
  const double fact2 = (std::fabs(e) < eps) ? 1.0 : std::sinh(e) / e;

  double gam1, gam2, inv_gamma_1p, inv_gamma_1m;
  temme_gammas(mu, gam1, gam2, inv_gamma_1p, inv_gamma_1m);

  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * log_half_x);
  double sum = ff;
  const double ee = std::exp(e);
  double p = 0.5 * ee / inv_gamma_1p;
  double q = 0.5 / (ee * inv_gamma_1m);
  double c = 1.0;
  const double x2q = half_x * half_x;
  double sum1 = p;
  for (int i = 1; i <= max_iter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= x2q / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - i * ff);
    sum1 += del1;
    if (std::fabs(del) < std::fabs(sum) * eps) break;
  }
  k_mu = sum;
  k_mu1 = sum1 * (2.0 / x);
}

// Steed's continued fraction for K_mu(x) and K_{mu+1}(x), |mu| <= 1/2,
// x >= 2.
void bessel_k_steed(double x, double mu, double& k_mu, double& k_mu1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int max_iter = 10000;

  const double mu2 = mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i <= max_iter; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) <= eps) break;
  }
  h = a1 * h;
  k_mu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
}

}  // namespace

// Series (Temme) below x = 2, continued fraction (Steed) above, then the
// stable upward recurrence K_{nu+1} = K_{nu-1} + (2 nu / x) K_nu.
double bessel_k(double nu, double x) {
  if (!(x > 0.0)) domain_fail("bessel_k", x);
  if (nu < 0.0) domain_fail("bessel_k", nu);

  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;  // in [-1/2, 1/2]

  double k_mu, k_mu1;
  if (x < 2.0)
    bessel_k_temme(x, mu, k_mu, k_mu1);
  else
    bessel_k_steed(x, mu, k_mu, k_mu1);

  const double two_over_x = 2.0 / x;
  for (int j = 1; j <= nl; ++j) {
    const double k_next = (mu + j) * two_over_x * k_mu1 + k_mu;
    k_mu = k_mu1;
    k_mu1 = k_next;
  }
  return k_mu;
}

// Newton iteration on the (orthonormal) Hermite recurrence; nodes returned
// in increasing order. Initial guesses follow the classical asymptotics.
GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need n >= 1");
  constexpr double tol = 1e-15;
  constexpr int max_newton = 64;
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}

  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(n, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[n - 1];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[n - 2];
    else
      z = 2.0 * z - rule.nodes[n - i + 1];

    for (int iter = 0; iter < max_newton; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= tol) break;
    }
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[n - 1 - i] = 2.0 / (pp * pp);
    rule.weights[i] = rule.weights[n - 1 - i];
  }
  return rule;
}

// Newton iteration on the Legendre recurrence from cosine initial guesses.
GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  constexpr double tol = 1e-15;
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= tol) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

}  // namespace srf
