#include "semopt/timeloop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semopt/error.hpp"

namespace semopt {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Euler: return "euler";
    case Scheme::RK3: return "rk3";
    case Scheme::CN: return "cn";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "rk3") return Scheme::RK3;
  if (name == "cn") return Scheme::CN;
  fail(ErrorKind::InvalidArgument, "unknown scheme '" + name + "' (expected euler, rk3 or cn)");
}

void TsConfig::validate() const {
  require(T > t0, "final time must exceed the initial time");
  require(dt > 0.0, "time step must be positive");
  require(alpha_min > 0.0 && alpha_min < 1.0 && alpha_max > 1.0,
          "controller bounds must satisfy 0 < alpha_min < 1 < alpha_max");
  require(beta > 0.0 && beta < 1.0, "controller safety factor must lie in (0, 1)");
  require(tol_a >= 0.0 && tol_r >= 0.0 && tol_a + tol_r > 0.0, "tolerances must be non-negative");
  require(max_steps >= 1, "max_steps must be positive");
  require(newton_tol > 0.0 && newton_max >= 1, "invalid Newton settings");
  require(gmres.tol > 0.0 && gmres.max_iters >= 1 && gmres.restart >= 1, "invalid GMRES settings");
  require(max_halvings >= 0, "max_halvings must be non-negative");
  if (adaptive && scheme != Scheme::RK3) {
    fail(ErrorKind::UnsupportedConfiguration, "adaptive stepping needs the rk3 embedded pair");
  }
}

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) fail(ErrorKind::NumericFailure, std::string(what) + " is not finite");
}

}  // namespace

Vector step_euler(const OdeSystem& sys, const Vector& u, double dt) {
  Vector next = u + dt * sys.rhs(u);
  require_finite(next, "Euler step result");
  return next;
}

Rk3Result step_rk3(const OdeSystem& sys, const Vector& u, double dt) {
  const Vector k1 = sys.rhs(u);
  const Vector k2 = sys.rhs(u + (0.5 * dt) * k1);
  const Vector k3 = sys.rhs(u - dt * k1 + (2.0 * dt) * k2);
  Rk3Result r;
  r.u = u + (dt / 6.0) * (k1 + 4.0 * k2 + k3);
  r.embedded = u + dt * k2;
  r.error = r.u - r.embedded;
  require_finite(r.u, "RK3 step result");
  return r;
}

Vector step_cn(const OdeSystem& sys, const Vector& u, double dt, const TsConfig& cfg,
               SolverStats* stats) {
  const Vector fu = sys.rhs(u);
  const Vector base = u + (0.5 * dt) * fu;
  const double target = cfg.newton_tol * (1.0 + u.norm());
  Vector v = u;
  SolverStats local;
  for (int it = 0;; ++it) {
    auto [fv, lin] = sys.rhs_and_linearize(v);
    const Vector residual = v - base - (0.5 * dt) * fv;
    const double rnorm = residual.norm();
    if (!std::isfinite(rnorm)) {
      if (stats) *stats += local;
      throw StepFailure("Crank-Nicolson residual is not finite", it,
                        static_cast<int>(local.krylov_iterations), rnorm);
    }
    if (rnorm <= target) break;
    if (it >= cfg.newton_max) {
      if (stats) *stats += local;
      throw StepFailure("Newton iteration did not converge", it,
                        static_cast<int>(local.krylov_iterations), rnorm);
    }
    const Linearization& jl = *lin;
    const LinearMap newton_matrix = [&](const Vector& w) -> Vector {
      return w - (0.5 * dt) * sys.jacobian(jl, w);
    };
    GmresResult g = gmres(newton_matrix, -residual, Vector(), cfg.gmres);
    local.krylov_iterations += g.iterations;
    local.linear_solves += 1;
    local.newton_iterations += 1;
    if (!g.converged) {
      if (stats) *stats += local;
      throw StepFailure("GMRES did not converge inside Newton", it + 1,
                        static_cast<int>(local.krylov_iterations), g.residual);
    }
    v += g.x;
  }
  if (stats) *stats += local;
  return v;
}

Vector advance(const OdeSystem& sys, const Vector& u, double dt, const TsConfig& cfg,
               SolverStats* stats) {
  switch (cfg.scheme) {
    case Scheme::Euler: return step_euler(sys, u, dt);
    case Scheme::RK3: return step_rk3(sys, u, dt).u;
    case Scheme::CN: return step_cn(sys, u, dt, cfg, stats);
  }
  fail(ErrorKind::InvalidArgument, "unknown scheme");
}

double weighted_error(const Vector& err, const Vector& u, const Vector& uhat, const TsConfig& cfg) {
  const Index n = err.size();
  require(n > 0 && u.size() == n && uhat.size() == n, "error estimate size mismatch");
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double tol = cfg.tol_a + std::max(std::abs(u[i]), std::abs(uhat[i])) * cfg.tol_r;
    const double r = std::abs(err[i]) / tol;
    if (cfg.wlte_max_norm) {
      acc = std::max(acc, r);
    } else {
      acc += r * r;
    }
  }
  return cfg.wlte_max_norm ? acc : std::sqrt(acc / static_cast<double>(n));
}

StepDecision control_step(double wlte, double dt_old, const TsConfig& cfg) {
  StepDecision d;
  d.accept = wlte <= 1.0;
  double factor = cfg.alpha_max;
  if (wlte > 0.0) {
    factor = std::min(cfg.alpha_max, std::max(cfg.alpha_min, cfg.beta * std::cbrt(1.0 / wlte)));
  }
  if (!std::isfinite(wlte)) factor = cfg.alpha_min;
  d.dt_new = dt_old * factor;
  return d;
}

std::vector<double> fixed_step_sizes(const TsConfig& cfg) {
  cfg.validate();
  std::vector<double> out;
  double t = cfg.t0;
  while (true) {
    const double remaining = cfg.T - t;
    if (remaining <= 0.0) break;
    require(static_cast<int>(out.size()) < cfg.max_steps, "max_steps too small for the horizon");
    double h = cfg.dt;
    const bool last = h >= remaining * (1.0 - 1e-10);
    if (last) h = remaining;
    out.push_back(h);
    t = last ? cfg.T : t + h;
  }
  return out;
}

void Trajectory::begin(Scheme scheme) {
  records_.clear();
  scheme_ = scheme;
}

void Trajectory::record(int step, double t, double dt, const Vector& u) {
  require(step == static_cast<int>(records_.size()), "trajectory steps must be recorded in order");
  records_.push_back({step, t, dt, u});
}

std::vector<double> Trajectory::step_sizes() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < records_.size(); ++i) out.push_back(records_[i].dt);
  return out;
}

IntegrationResult integrate(const OdeSystem& sys, const Vector& u0, const TsConfig& cfg,
                            Recorder* recorder, const StepLog& log) {
  cfg.validate();
  require(u0.size() == sys.size(), "initial state has wrong size");
  require_finite(u0, "initial state");

  IntegrationResult res;
  Vector u = u0;
  double t = cfg.t0;
  if (recorder) {
    recorder->begin(cfg.scheme);
    recorder->record(0, t, 0.0, u);
  }

  const double span = cfg.T - cfg.t0;
  double h_next = std::min(cfg.dt, span);
  while (true) {
    const double remaining = cfg.T - t;
    if (remaining <= 0.0) break;
    if (res.steps >= cfg.max_steps) {
      fail(ErrorKind::StepFailure, "max_steps (" + std::to_string(cfg.max_steps) +
                                       ") exceeded at t = " + std::to_string(t));
    }
    double h = cfg.adaptive ? h_next : cfg.dt;
    int halvings = 0;
    while (true) {
      bool last = false;
      if (h >= remaining * (1.0 - 1e-10)) {
        h = remaining;
        last = true;
      }
      StepLogRow row{res.steps + 1, t, h, 0.0, true};
      try {
        Vector next;
        if (cfg.adaptive) {
          Rk3Result r = step_rk3(sys, u, h);
          const double wlte = weighted_error(r.error, r.u, r.embedded, cfg);
          const StepDecision d = control_step(wlte, h, cfg);
          row.wlte = wlte;
          row.accepted = d.accept;
          if (log) log(row);
          if (!d.accept) {
            ++res.rejected;
            h = d.dt_new;
            if (h < 1e-14 * span) fail(ErrorKind::StepFailure, "step size underflow");
            continue;
          }
          h_next = d.dt_new;
          next = std::move(r.u);
        } else {
          next = advance(sys, u, h, cfg, &res.stats);
          if (log) log(row);
        }
        u = std::move(next);
        t = last ? cfg.T : t + h;
        ++res.steps;
        res.step_sizes.push_back(h);
        if (recorder) recorder->record(res.steps, t, h, u);
        break;
      } catch (const Error& e) {
        const bool retryable = e.kind() == ErrorKind::StepFailure || e.kind() == ErrorKind::NumericFailure;
        if (!retryable || halvings >= cfg.max_halvings) throw;
        if (log) log({res.steps + 1, t, h, std::numeric_limits<double>::infinity(), false});
        ++halvings;
        ++res.rejected;
        h *= 0.5;
      }
    }
  }
  res.final_state = std::move(u);
  return res;
}

IntegrationResult integrate_steps(const OdeSystem& sys, const Vector& u0,
                                  const std::vector<double>& step_sizes, const TsConfig& cfg,
                                  Recorder* recorder) {
  require(u0.size() == sys.size(), "initial state has wrong size");
  IntegrationResult res;
  Vector u = u0;
  double t = cfg.t0;
  if (recorder) {
    recorder->begin(cfg.scheme);
    recorder->record(0, t, 0.0, u);
  }
  for (std::size_t n = 0; n < step_sizes.size(); ++n) {
    const double h = step_sizes[n];
    u = advance(sys, u, h, cfg, &res.stats);
    t = n + 1 == step_sizes.size() ? cfg.T : t + h;
    ++res.steps;
    res.step_sizes.push_back(h);
    if (recorder) recorder->record(res.steps, t, h, u);
  }
  res.final_state = std::move(u);
  return res;
}

}  // namespace semopt
