#pragma once

#include <functional>

#include "semopt/types.hpp"

namespace semopt {

using LinearMap = std::function<Vector(const Vector&)>;

struct GmresOptions {
  double tol = 1e-10;  // relative to the norm of the right-hand side
  int max_iters = 200;
  int restart = 30;
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // final residual norm (true residual at the last restart)
  bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations,
/// unpreconditioned. Starts from x0 (zero when empty).
GmresResult gmres(const LinearMap& a, const Vector& b, const Vector& x0, const GmresOptions& opts);

}  // namespace semopt
