#pragma once

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "semopt/types.hpp"

namespace semopt::test {

inline Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline double relative(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

/// Gauss-Legendre nodes and weights from the Jacobi matrix eigenproblem.
struct GaussRule {
  Vector nodes;
  Vector weights;
};

inline GaussRule gauss_legendre(int n) {
  Matrix jac = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jac);
  GaussRule r;
  r.nodes = eig.eigenvalues();
  r.weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
  return r;
}

/// Derivative of the j-th Lagrange cardinal polynomial on `nodes` at x,
/// by the product rule.
template <class Nodes>
double lagrange_derivative(const Nodes& nodes, int j, double x) {
  const int n = static_cast<int>(nodes.size());
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    double term = 1.0 / (nodes[j] - nodes[k]);
    for (int m = 0; m < n; ++m) {
      if (m == j || m == k) continue;
      term *= (x - nodes[m]) / (nodes[j] - nodes[m]);
    }
    sum += term;
  }
  return sum;
}

template <class Nodes>
double lagrange(const Nodes& nodes, int j, double x) {
  double v = 1.0;
  for (int m = 0; m < static_cast<int>(nodes.size()); ++m) {
    if (m != j) v *= (x - nodes[m]) / (nodes[j] - nodes[m]);
  }
  return v;
}

}  // namespace semopt::test
