#pragma once

#include <cstdint>

#include "semopt/checkpoint.hpp"
#include "semopt/timeloop.hpp"

namespace semopt {

/// J(u_N) = (u_N - u_d)^T W (u_N - u_d) with a positive diagonal weight W
/// (the assembled mass matrix for spectral-element fields).
struct TerminalMisfit {
  Vector reference;
  Vector weights;

  double value(const Vector& u_final) const;
  /// Euclidean gradient 2 W (u_N - u_d).
  Vector gradient(const Vector& u_final) const;
};

/// lambda_N = 2 W (u_N - u_d).
Vector adjoint_terminal(const Vector& u_final, const Vector& reference, const Vector& weights);

/// lambda_n = lambda + dt J(u_n)^T lambda.
Vector adjoint_step_euler(const OdeSystem& sys, const Vector& u_n, const Vector& lambda, double dt);

/// Transpose of one Kutta-3 step linearized at u_n. The stage states are
/// recomputed from u_n.
Vector adjoint_step_rk3(const OdeSystem& sys, const Vector& u_n, const Vector& lambda, double dt);

/// Transpose of one Crank-Nicolson step from u_n to u_next: solves
/// (I - dt/2 J(u_next))^T mu = lambda by GMRES, then returns
/// mu + dt/2 J(u_n)^T mu.
Vector adjoint_step_cn(const OdeSystem& sys, const Vector& u_n, const Vector& u_next,
                       const Vector& lambda, double dt, const TsConfig& cfg,
                       SolverStats* stats = nullptr);

/// Backward step for cfg.scheme; u_next is used by Crank-Nicolson only.
Vector adjoint_step(const OdeSystem& sys, const Vector& u_n, const Vector& u_next,
                    const Vector& lambda, double dt, const TsConfig& cfg,
                    SolverStats* stats = nullptr);

struct AdjointResult {
  Vector gradient;  // lambda_0 = dJ/du_0
  SolverStats stats;
};

/// Backward sweep over a stored trajectory, starting from lambda_N.
AdjointResult adjoint_sweep(const OdeSystem& sys, const TsConfig& cfg, const Trajectory& traj,
                            const Vector& lambda_final);

enum class Storage { StoreAll, Binomial };

struct CheckpointPolicy {
  Storage storage = Storage::StoreAll;
  int slots = 10;  // used by Storage::Binomial
};

struct GradientEvaluation {
  double value = 0.0;
  Vector gradient;
  Vector final_state;
  int steps = 0;
  std::int64_t forward_steps = 0;  // including recomputation
  SolverStats forward_stats;
  SolverStats adjoint_stats;
  double forward_seconds = 0.0;
  double adjoint_seconds = 0.0;  // for Binomial this includes recomputation
};

/// Objective value and gradient with respect to u0: one forward run, one
/// backward sweep. Adaptive runs first integrate once to fix the step sizes.
GradientEvaluation evaluate_gradient(const OdeSystem& sys, const TsConfig& cfg, const Vector& u0,
                                     const TerminalMisfit& misfit,
                                     const CheckpointPolicy& policy = {});

/// Runs a reversal schedule over the given step sizes: forward steps,
/// restores and backward steps, starting from u0. The terminal adjoint comes
/// from `misfit`.
GradientEvaluation scheduled_sweep(const OdeSystem& sys, const TsConfig& cfg, const Vector& u0,
                                   const std::vector<double>& step_sizes,
                                   const Schedule& schedule, const TerminalMisfit& misfit);

}  // namespace semopt
