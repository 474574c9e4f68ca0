#include "semopt/adjoint.hpp"

#include <chrono>

#include "semopt/error.hpp"

namespace semopt {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double TerminalMisfit::value(const Vector& u_final) const {
  require(u_final.size() == reference.size() && weights.size() == reference.size(),
          "misfit: size mismatch");
  const Vector diff = u_final - reference;
  return diff.dot(weights.cwiseProduct(diff));
}

Vector TerminalMisfit::gradient(const Vector& u_final) const {
  return adjoint_terminal(u_final, reference, weights);
}

Vector adjoint_terminal(const Vector& u_final, const Vector& reference, const Vector& weights) {
  require(u_final.size() == reference.size() && weights.size() == reference.size(),
          "misfit: size mismatch");
  return 2.0 * weights.cwiseProduct(u_final - reference);
}

Vector adjoint_step_euler(const OdeSystem& sys, const Vector& u_n, const Vector& lambda, double dt) {
  return lambda + dt * sys.jacobian_transpose(u_n, lambda);
}

Vector adjoint_step_rk3(const OdeSystem& sys, const Vector& u_n, const Vector& lambda, double dt) {
  auto [k1, lin1] = sys.rhs_and_linearize(u_n);
  auto [k2, lin2] = sys.rhs_and_linearize(u_n + (0.5 * dt) * k1);
  const auto lin3 = sys.linearize(u_n - dt * k1 + (2.0 * dt) * k2);

  const Vector l3 = dt * sys.jacobian_transpose(*lin3, (1.0 / 6.0) * lambda);
  const Vector l2 = dt * sys.jacobian_transpose(*lin2, (2.0 / 3.0) * lambda + 2.0 * l3);
  const Vector l1 = dt * sys.jacobian_transpose(*lin1, (1.0 / 6.0) * lambda + 0.5 * l2 - l3);
  return lambda + l1 + l2 + l3;
}

Vector adjoint_step_cn(const OdeSystem& sys, const Vector& u_n, const Vector& u_next,
                       const Vector& lambda, double dt, const TsConfig& cfg, SolverStats* stats) {
  const auto lin_next = sys.linearize(u_next);
  const LinearMap transposed = [&](const Vector& w) -> Vector {
    return w - (0.5 * dt) * sys.jacobian_transpose(*lin_next, w);
  };
  GmresResult g = gmres(transposed, lambda, Vector(), cfg.gmres);
  if (stats) {
    stats->krylov_iterations += g.iterations;
    stats->linear_solves += 1;
  }
  if (!g.converged) {
    throw StepFailure("GMRES did not converge in the adjoint Crank-Nicolson solve", 0,
                      g.iterations, g.residual);
  }
  return g.x + (0.5 * dt) * sys.jacobian_transpose(u_n, g.x);
}

Vector adjoint_step(const OdeSystem& sys, const Vector& u_n, const Vector& u_next,
                    const Vector& lambda, double dt, const TsConfig& cfg, SolverStats* stats) {
  switch (cfg.scheme) {
    case Scheme::Euler: return adjoint_step_euler(sys, u_n, lambda, dt);
    case Scheme::RK3: return adjoint_step_rk3(sys, u_n, lambda, dt);
    case Scheme::CN: return adjoint_step_cn(sys, u_n, u_next, lambda, dt, cfg, stats);
  }
  fail(ErrorKind::InvalidArgument, "unknown scheme");
}

AdjointResult adjoint_sweep(const OdeSystem& sys, const TsConfig& cfg, const Trajectory& traj,
                            const Vector& lambda_final) {
  if (traj.scheme() && *traj.scheme() != cfg.scheme) {
    fail(ErrorKind::InvalidArgument, std::string("trajectory was produced by ") +
                                         to_string(*traj.scheme()) + ", backward sweep uses " +
                                         to_string(cfg.scheme));
  }
  const int m = traj.steps();
  if (m < 1) fail(ErrorKind::CheckpointMiss, "trajectory holds no steps");
  require(lambda_final.size() == sys.size(), "terminal adjoint has wrong size");
  AdjointResult res;
  Vector lambda = lambda_final;
  sys.project(lambda);
  for (int n = m - 1; n >= 0; --n) {
    const StepRecord& rec = traj[n];
    if (rec.state.size() != sys.size()) {
      fail(ErrorKind::CheckpointMiss, "forward state " + std::to_string(n) + " is missing");
    }
    lambda = adjoint_step(sys, rec.state, traj[n + 1].state, lambda, traj[n + 1].dt, cfg,
                          &res.stats);
  }
  res.gradient = std::move(lambda);
  return res;
}

namespace {

class SweepHandler final : public ScheduleHandler {
 public:
  SweepHandler(const OdeSystem& sys, const TsConfig& cfg, const Vector& u0,
               const std::vector<double>& dts, int slots, const TerminalMisfit& misfit,
               GradientEvaluation& out)
      : sys_(sys), cfg_(cfg), dts_(dts), slots_(static_cast<std::size_t>(slots)), misfit_(misfit),
        out_(out), working_(u0) {}

  void store(int slot, int) override { slots_[slot] = working_; }
  void restore(int slot, int) override { working_ = slots_[slot]; }

  void advance(int from, int to, bool final_step) override {
    for (int n = from; n < to; ++n) {
      Vector next = semopt::advance(sys_, working_, dts_[n], cfg_, &out_.forward_stats);
      ++out_.forward_steps;
      if (final_step && n == to - 1) {
        terminal_ = std::move(next);
      } else {
        working_ = std::move(next);
      }
    }
  }

  void adjoint_step(int step) override {
    if (lambda_.size() == 0) {
      out_.final_state = terminal_;
      out_.value = misfit_.value(terminal_);
      lambda_ = misfit_.gradient(terminal_);
      sys_.project(lambda_);
      next_ = terminal_;
    }
    lambda_ = semopt::adjoint_step(sys_, working_, next_, lambda_, dts_[step], cfg_,
                                   &out_.adjoint_stats);
    next_ = working_;
  }

  Vector& lambda() { return lambda_; }

 private:
  const OdeSystem& sys_;
  const TsConfig& cfg_;
  const std::vector<double>& dts_;
  std::vector<Vector> slots_;
  const TerminalMisfit& misfit_;
  GradientEvaluation& out_;
  Vector working_;
  Vector terminal_;
  Vector next_;
  Vector lambda_;
};

}  // namespace

GradientEvaluation scheduled_sweep(const OdeSystem& sys, const TsConfig& cfg, const Vector& u0,
                                   const std::vector<double>& step_sizes,
                                   const Schedule& schedule, const TerminalMisfit& misfit) {
  require(schedule.m == static_cast<int>(step_sizes.size()),
          "schedule length does not match the number of steps");
  require(u0.size() == sys.size(), "initial state has wrong size");
  GradientEvaluation out;
  out.steps = schedule.m;
  const auto start = std::chrono::steady_clock::now();
  SweepHandler handler(sys, cfg, u0, step_sizes, schedule.s, misfit, out);
  replay(schedule, &handler);
  out.gradient = std::move(handler.lambda());
  out.adjoint_seconds = seconds_since(start);
  return out;
}

GradientEvaluation evaluate_gradient(const OdeSystem& sys, const TsConfig& cfg, const Vector& u0,
                                     const TerminalMisfit& misfit, const CheckpointPolicy& policy) {
  require(misfit.reference.size() == sys.size(), "reference field has wrong size");
  if (policy.storage == Storage::StoreAll) {
    GradientEvaluation out;
    Trajectory traj;
    auto start = std::chrono::steady_clock::now();
    IntegrationResult fwd = integrate(sys, u0, cfg, &traj);
    out.forward_seconds = seconds_since(start);
    out.steps = fwd.steps;
    out.forward_steps = fwd.steps;
    out.forward_stats = fwd.stats;
    out.final_state = std::move(fwd.final_state);
    out.value = misfit.value(out.final_state);
    start = std::chrono::steady_clock::now();
    AdjointResult adj = adjoint_sweep(sys, cfg, traj, misfit.gradient(out.final_state));
    out.adjoint_seconds = seconds_since(start);
    out.gradient = std::move(adj.gradient);
    out.adjoint_stats = adj.stats;
    return out;
  }
  if (policy.slots < 1) fail(ErrorKind::UnsupportedConfiguration, "binomial checkpointing needs slots >= 1");
  std::vector<double> dts;
  double first_pass = 0.0;
  if (cfg.adaptive) {
    const auto start = std::chrono::steady_clock::now();
    dts = integrate(sys, u0, cfg).step_sizes;
    first_pass = seconds_since(start);
  } else {
    dts = fixed_step_sizes(cfg);
  }
  const Schedule schedule = plan_binomial(static_cast<int>(dts.size()), policy.slots);
  GradientEvaluation out = scheduled_sweep(sys, cfg, u0, dts, schedule, misfit);
  out.forward_seconds = first_pass;
  return out;
}

}  // namespace semopt
