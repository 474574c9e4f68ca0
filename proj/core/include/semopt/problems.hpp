#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semopt/adjoint.hpp"
#include "semopt/operator.hpp"

namespace semopt {

enum class ProblemKind { Burgers1D, AdvDiff1D, Burgers3D, PureDiffusion1D };

const char* to_string(ProblemKind k);
/// Accepts "burgers1d", "advdiff1d", "burgers3d" and "diffusion1d".
ProblemKind parse_problem(const std::string& name);

/// u = 2 nu pi sin(pi x) e^{-nu t pi^2} / (2 + e^{-nu t pi^2} cos(pi x)).
double burgers1d_exact(double x, double t, double nu);
/// Exact initial state plus the bump e^{-4 (x - center)^2}.
double burgers1d_guess(double x, double nu, double center = 2.0);

inline constexpr int kAdvDiffModes = 5;

/// Mode amplitudes drawn from U[0.9, 1] with a 64-bit Mersenne twister.
std::array<double, kAdvDiffModes> advdiff_amplitudes(std::uint64_t seed);
/// sum_j a_j sin(2 pi j (x - a t)) e^{-nu 4 pi^2 j^2 t}, j = 1..5.
double advdiff_exact(double x, double t, const std::array<double, kAdvDiffModes>& amplitudes,
                     double nu, double velocity);

/// u_1 = sin(pi x1 / 2) cos(pi x2 / 2) cos(pi x3 / 2) and cyclic rotations.
std::array<double, 3> burgers3d_initial(double x1, double x2, double x3);

/// sin(2 pi x) e^{-4 pi^2 nu t} + cos(4 pi x) e^{-16 pi^2 nu t}.
double diffusion1d_exact(double x, double t, double nu);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Burgers1D;
  int elements = 5;  // per axis
  int degree = 8;
  double nu = 0.001;
  double velocity = 0.0;  // linear advection speed (advdiff1d)
  double horizon = 4.0;
  double dt = 0.01;       // suggested fixed step
  std::uint64_t seed = 0;        // reference amplitudes (advdiff1d)
  std::uint64_t guess_seed = 1;  // initial-guess amplitudes (advdiff1d)
  double gaussian_center = 2.0;  // burgers1d perturbation
  double reference_time = 3.0;   // diffusion1d: reference is the solution at this time

  /// Defaults for each kind: burgers1d on [-2,2] with nu = 1e-3, T = 4;
  /// advdiff1d on [0,1] with nu = 1e-5, a = 0.1, T = 0.01; burgers3d on
  /// [-2,2]^3 with nu = 0.01; diffusion1d on [0,1] with nu = 1e-3, T = 1.
  static ProblemSpec defaults(ProblemKind kind);
  void validate() const;
};

/// A fully set-up assimilation experiment.
struct Problem {
  ProblemSpec spec;
  std::shared_ptr<const Grid> grid;
  PdeCoefficients coefficients;
  std::shared_ptr<const SemOperator> op;
  Vector reference;      // desired terminal state u_d
  Vector guess;          // starting initial state for optimization
  Vector exact_initial;  // initial state that reproduces the reference, if known (else empty)

  TerminalMisfit misfit() const { return {reference, grid->mass()}; }
  bool has_exact_initial() const { return exact_initial.size() > 0; }
};

Problem make_problem(const ProblemSpec& spec);

/// Evaluates a scalar function of x at every node of a 1D grid.
template <class F>
Vector sample_1d(const Grid& grid, F&& f) {
  const Matrix xs = node_coordinates(grid);
  Vector v(grid.nglobal());
  for (Index i = 0; i < v.size(); ++i) v[i] = f(xs(i, 0));
  grid.mask(v);
  return v;
}

/// L2 distance between the piecewise polynomial held by `field` on a 1D grid
/// and the function f, integrated with a GLL rule of degree `quad_degree` per
/// element.
double l2_error_1d(const Grid& grid, const Vector& field, const std::function<double(double)>& f,
                   int quad_degree = 24);

/// Initial field of the 3D problem on a grid, scaled by `factor`.
Vector burgers3d_field(const Grid& grid, double factor = 1.0);

/// Legendre coefficients of the polynomial interpolating nodal values at the
/// GLL nodes of `basis`, by discrete projection (exact for degree <= N).
Vector legendre_coefficients(const SpectralBasis1D& basis, const Vector& nodal);

struct SpectralErrorReport {
  std::vector<double> error;                // eps_e per element
  std::vector<double> leading_coefficient;  // |a_N| per element
  std::vector<double> scale;                // fitted c
  std::vector<double> decay;                // fitted sigma
  std::vector<bool> under_resolved;         // sigma <= 0
  std::vector<bool> resolved;               // spectrum below the noise floor
  double max_error = 0.0;
};

/// Per-element a-posteriori truncation estimate eps_e = a_N^2 / ((2N+2)/2)
/// with a_N = c e^{-sigma N} fitted by least squares to log |a_k| over the
/// modes k = min(ceil(N/2), N-3)..N. Vector fields use the shell spectrum
/// max_{max(k1,k2,k3)=k} |a_k| and sum over components. Requires N >= 5.
SpectralErrorReport spectral_error_estimate(const Grid& grid, const Vector& field);

}  // namespace semopt
