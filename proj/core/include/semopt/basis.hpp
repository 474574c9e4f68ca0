#pragma once

#include <vector>

#include "semopt/types.hpp"

namespace semopt {

struct LegendreEval {
  double value;       // P_n(x)
  double derivative;  // P_n'(x)
};

/// P_n(x) and P_n'(x) by the three-term recurrence.
LegendreEval legendre(int n, double x);

/// Gauss-Legendre-Lobatto rule and reference differentiation matrix on [-1, 1].
///
/// Nodes are ordered -1 = x_0 < ... < x_N = 1 and are exactly mirror
/// symmetric, as are the weights. `diff(i, j)` is the derivative of the j-th
/// Lagrange cardinal polynomial evaluated at node i.
struct SpectralBasis1D {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  Matrix diff;

  int size() const { return degree + 1; }
};

/// Builds the GLL rule of the given degree (N >= 1). Interior nodes are the
/// roots of P_N', located by damped Newton iterations started from the
/// Chebyshev-Gauss-Lobatto points.
SpectralBasis1D gll_rule(int degree);

/// Lagrange differentiation matrix on arbitrary distinct nodes, using
/// barycentric weights and the negative-sum diagonal (rows sum to zero).
Matrix diff_matrix(const std::vector<double>& nodes);
Matrix diff_matrix(const SpectralBasis1D& basis);

/// One affinely mapped element of length L.
struct ElementOperators1D {
  double length = 0.0;
  Vector mass;       // (L/2) * weights, the diagonal of M_e
  Matrix stiffness;  // (2/L) * D^T diag(weights) D
  Matrix diff;       // reference D, not scaled by the map
};

ElementOperators1D element_operators(const SpectralBasis1D& basis, double length);

}  // namespace semopt
