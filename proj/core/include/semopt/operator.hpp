#pragma once

#include <array>
#include <memory>
#include <vector>

#include "semopt/grid.hpp"
#include "semopt/ode.hpp"

namespace semopt {

enum class Advection { Burgers, Linear, None };

const char* to_string(Advection a);

struct PdeCoefficients {
  double nu = 0.0;
  Advection advection = Advection::Burgers;
  /// Constant velocity per direction, used only with Advection::Linear.
  std::array<double, 3> velocity{0.0, 0.0, 0.0};
};

/// Semi-discrete spectral-element right-hand side
///
///     du/dt = f(u) = M^-1 gather( P_e(scatter u) ),
///     P_e[u_i] = -nu sum_j D_j^T W D_j u_i - W (sum_j c_j o D_j u_i),
///
/// where W holds the element quadrature weights, D_j is the element
/// derivative along axis j and c_j is u_j (Burgers), a_j (linear) or absent.
/// Everything is applied element by element with small dense contractions.
/// On Dirichlet grids inputs and outputs are masked.
class SemOperator final : public OdeSystem {
 public:
  SemOperator(std::shared_ptr<const Grid> grid, PdeCoefficients coef);

  using OdeSystem::jacobian;
  using OdeSystem::jacobian_transpose;

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const PdeCoefficients& coefficients() const { return coef_; }

  Index size() const override { return grid_->nglobal(); }
  Vector rhs(const Vector& u) const override;
  std::unique_ptr<const Linearization> linearize(const Vector& u) const override;
  std::pair<Vector, std::unique_ptr<const Linearization>> rhs_and_linearize(
      const Vector& u) const override;
  Vector jacobian(const Linearization& lin, const Vector& w) const override;
  Vector jacobian_transpose(const Linearization& lin, const Vector& z) const override;
  void project(Vector& v) const override { grid_->mask(v); }

  /// Largest dense matrix held by the operator, in entries. It is (N+1)^2
  /// regardless of the number of elements or the dimension.
  std::size_t largest_dense_block() const;

  /// Element-local residual P_e on one element's local block (ncomp * nloc
  /// entries). Exposed for kernel benchmarks.
  void element_rhs(const double* u_elem, double* out_elem) const;
  /// Element-local transpose product, given the element's state and
  /// (already scattered) adjoint block.
  void element_jacobian_transpose(const double* u_elem, const double* z_elem,
                                  double* out_elem) const;

 private:
  struct Scratch;
  class State;
  struct BufferPool;

  void check_input(const Vector& v, const char* what) const;
  Vector finish(const std::vector<double>& local) const;
  void rhs_kernel(const double* ue, double* grad, double* out, Scratch& s) const;
  void jacobian_kernel(const double* ue, const double* grad, const double* we, double* out,
                       Scratch& s) const;
  void transpose_kernel(const double* ue, const double* grad, const double* ze, double* out,
                        Scratch& s) const;
  void gradients(const double* ue, double* grad) const;
  const State& state_of(const Linearization& lin) const;

  std::shared_ptr<const Grid> grid_;
  PdeCoefficients coef_;
  int n1_ = 0;
  int dim_ = 0;
  int ncomp_ = 0;
  int nloc_ = 0;
  std::vector<std::vector<double>> diff_;    // physical D_j, row-major
  std::vector<std::vector<double>> diff_t_;  // D_j^T, row-major
  std::vector<double> weights_;              // element quadrature weights
  Vector inv_mass_;
  std::shared_ptr<BufferPool> pool_;
};

/// Dense Jacobian of a system at u, built column by column from Jacobian
/// products. For tests on small grids only.
Matrix densify(const OdeSystem& system, const Vector& u);

}  // namespace semopt
