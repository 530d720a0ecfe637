#pragma once

#include <utility>
#include <vector>

namespace nlfd::special {

/// Hurwitz zeta zeta(s, a) for a > 0 and s != 1, analytically continued to s < 1.
double hurwitz_zeta(double s, double a);

/// Riemann zeta, valid for every real s != 1.
double riemann_zeta(double s);

/// Dirichlet beta function beta(s) = sum_k (-1)^k (2k+1)^{-s}.
double dirichlet_beta(double s);

/// Continued lattice sum Z_N(s) = sum over nonzero k in Z^N of |k|^{-s}, for N in {1, 2}.
double lattice_zeta(int dim, double s);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int points);

/// Integrates f over [a, b] with the given rule.
template <class F>
double integrate_rule(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

}  // namespace nlfd::special
