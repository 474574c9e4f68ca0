#include "semopt/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "semopt/error.hpp"

namespace semopt {

LegendreEval legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  double dp_prev = 0.0;
  double dp = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    // P'_{k+1} = P'_{k-1} + (2k+1) P_k
    const double dp_next = dp_prev + (2.0 * k + 1.0) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  return {p, dp};
}

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr double kNewtonTolerance = 1e-14;

// Root of P_N' near `guess`, kept inside (lo, hi).
double refine_lobatto_node(int n, double guess, double lo, double hi) {
  double x = guess;
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const auto [p, dp] = legendre(n, x);
    // Legendre ODE: (1 - x^2) P'' = 2x P' - n(n+1) P
    const double d2p = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
    double step = dp / d2p;
    double next = x - step;
    while (next <= lo || next >= hi) {
      step *= 0.5;
      next = x - step;
    }
    x = next;
    if (std::abs(step) <= kNewtonTolerance) return x;
  }
  fail(ErrorKind::NumericFailure,
       "GLL Newton iteration did not converge for degree " + std::to_string(n));
}

}  // namespace

Matrix diff_matrix(const std::vector<double>& nodes) {
  const auto n = static_cast<Index>(nodes.size());
  Vector bary = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) bary[i] *= nodes[i] - nodes[j];
    }
    bary[i] = 1.0 / bary[i];
  }
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;
  }
  return d;
}

Matrix diff_matrix(const SpectralBasis1D& basis) { return diff_matrix(basis.nodes); }

SpectralBasis1D gll_rule(int degree) {
  require(degree >= 1, "GLL degree must be >= 1, got " + std::to_string(degree));
  const int n = degree;
  SpectralBasis1D basis;
  basis.degree = n;
  basis.nodes.assign(n + 1, 0.0);
  basis.weights.assign(n + 1, 0.0);
  basis.nodes.front() = -1.0;
  basis.nodes.back() = 1.0;

  // Solve for the left half and mirror; the middle node of even degree is 0.
  double lo = -1.0;
  for (int i = 1; 2 * i < n; ++i) {
    const double guess = -std::cos(std::numbers::pi * i / n);
    const double x = refine_lobatto_node(n, guess, lo, 0.0);
    basis.nodes[i] = x;
    basis.nodes[n - i] = -x;
    lo = x;
  }
  if (n % 2 == 0) basis.nodes[n / 2] = 0.0;

  const double scale = 2.0 / (n * (n + 1.0));
  for (int i = 0; i <= n / 2; ++i) {
    const double p = legendre(n, basis.nodes[i]).value;
    basis.weights[i] = scale / (p * p);
    basis.weights[n - i] = basis.weights[i];
  }
  basis.diff = diff_matrix(basis.nodes);
  return basis;
}

ElementOperators1D element_operators(const SpectralBasis1D& basis, double length) {
  require(length > 0.0, "element length must be positive");
  const Index n = basis.size();
  ElementOperators1D ops;
  ops.length = length;
  ops.diff = basis.diff;
  const Vector rho = Eigen::Map<const Vector>(basis.weights.data(), n);
  ops.mass = 0.5 * length * rho;
  ops.stiffness = (2.0 / length) * (basis.diff.transpose() * rho.asDiagonal() * basis.diff);
  return ops;
}

}  // namespace semopt
