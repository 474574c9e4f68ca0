#include "semopt/krylov.hpp"

#include <cmath>
#include <vector>

#include "semopt/error.hpp"

namespace semopt {

GmresResult gmres(const LinearMap& a, const Vector& b, const Vector& x0, const GmresOptions& opts) {
  require(opts.restart >= 1 && opts.max_iters >= 0 && opts.tol > 0.0, "invalid GMRES options");
  const Index n = b.size();
  GmresResult res;
  res.x = x0.size() == 0 ? Vector::Zero(n) : x0;
  require(res.x.size() == n, "GMRES initial guess has wrong size");

  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  const double target = opts.tol * bnorm;
  const int m = opts.restart;

  std::vector<Vector> v(m + 1);
  Matrix h = Matrix::Zero(m + 1, m);
  Vector cs(m), sn(m), g(m + 1);

  while (true) {
    Vector r = b - a(res.x);
    double beta = r.norm();
    res.residual = beta;
    if (!std::isfinite(beta)) return res;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= opts.max_iters) return res;

    v[0] = r / beta;
    g.setZero();
    g[0] = beta;
    h.setZero();
    int k = 0;
    for (; k < m && res.iterations < opts.max_iters; ++k) {
      Vector w = a(v[k]);
      ++res.iterations;
      for (int i = 0; i <= k; ++i) {
        h(i, k) = w.dot(v[i]);
        w -= h(i, k) * v[i];
      }
      h(k + 1, k) = w.norm();
      const bool breakdown = h(k + 1, k) <= 1e-300;
      if (!breakdown) v[k + 1] = w / h(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = h(k, k) / denom;
      sn[k] = h(k + 1, k) / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= target || breakdown) {
        ++k;
        break;
      }
    }
    // Back substitution for the k x k upper-triangular system.
    Vector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) res.x += y[i] * v[i];
  }
}

}  // namespace semopt
