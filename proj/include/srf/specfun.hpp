#pragma once

#include <vector>

namespace srf {

/// Natural log of the gamma function, Lanczos approximation.
/// Domain: x > 0. Throws std::domain_error otherwise.
double ln_gamma(double x);

/// Digamma function psi(x) = Gamma'(x)/Gamma(x).
/// Domain: x > 0. Throws std::domain_error otherwise.
double digamma(double x);

/// Modified Bessel function of the second kind K_nu(x).
/// Domain: nu >= 0, x > 0 (use K_{-nu} = K_nu upstream for negative orders).
/// Accurate to better than 1e-10 relative for nu in [0, 20], x in (0, 100].
double bessel_k(double nu, double x);

/// Gauss-Hermite quadrature rule for weight exp(-x^2) on (-inf, inf):
/// integral e^{-x^2} f(x) dx ~= sum_i weights[i] * f(nodes[i]).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Hermite rule (Newton iteration
/// on the Hermite recurrence). Exact for polynomials of degree < 2n.
GaussHermiteRule gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1]: integral f(x) dx ~= sum w_i f(x_i).
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule.
GaussLegendreRule gauss_legendre(int n);

}  // namespace srf
