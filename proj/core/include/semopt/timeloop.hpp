#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semopt/krylov.hpp"
#include "semopt/ode.hpp"

namespace semopt {

enum class Scheme { Euler, RK3, CN };

const char* to_string(Scheme s);
/// Accepts "euler", "rk3" and "cn".
Scheme parse_scheme(const std::string& name);

struct TsConfig {
  Scheme scheme = Scheme::RK3;
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-2;
  bool adaptive = false;
  double tol_a = 1e-6;
  double tol_r = 1e-6;
  double alpha_min = 0.1;
  double alpha_max = 5.0;
  double beta = 0.9;
  /// Max-norm weighted error instead of the root-mean-square one.
  bool wlte_max_norm = false;
  int max_steps = 1000000;
  double newton_tol = 1e-10;
  int newton_max = 25;
  GmresOptions gmres{};
  /// Step-size halvings attempted after a failed step before giving up.
  int max_halvings = 3;

  void validate() const;
};

/// Work counters for implicit solves.
struct SolverStats {
  long newton_iterations = 0;
  long krylov_iterations = 0;
  long linear_solves = 0;

  SolverStats& operator+=(const SolverStats& o) {
    newton_iterations += o.newton_iterations;
    krylov_iterations += o.krylov_iterations;
    linear_solves += o.linear_solves;
    return *this;
  }
};

Vector step_euler(const OdeSystem& sys, const Vector& u, double dt);

struct Rk3Result {
  Vector u;         // third-order solution
  Vector embedded;  // second-order midpoint solution
  Vector error;     // u - embedded
};

/// Kutta's third-order method, c = (0, 1/2, 1), b = (1/6, 2/3, 1/6), with the
/// midpoint rule as embedded second-order companion.
Rk3Result step_rk3(const OdeSystem& sys, const Vector& u, double dt);

/// Crank-Nicolson step. Newton iterations start from u; each linear system
/// (I - dt/2 J(v)) d = -G(v) is solved matrix-free by GMRES.
Vector step_cn(const OdeSystem& sys, const Vector& u, double dt, const TsConfig& cfg,
               SolverStats* stats = nullptr);

/// One step of the configured scheme (no error estimate).
Vector advance(const OdeSystem& sys, const Vector& u, double dt, const TsConfig& cfg,
               SolverStats* stats = nullptr);

/// Weighted local truncation error with Tol_i = tol_a + max(|u_i|, |uhat_i|) tol_r.
double weighted_error(const Vector& err, const Vector& u, const Vector& uhat, const TsConfig& cfg);

struct StepDecision {
  bool accept = false;
  double dt_new = 0.0;
};

/// Step-size controller for an embedded pair of order 2:
/// dt_new = dt_old * min(alpha_max, max(alpha_min, beta * wlte^(-1/3))).
StepDecision control_step(double wlte, double dt_old, const TsConfig& cfg);

/// Step sizes a fixed-step run of cfg takes (the last one clipped to end at T).
std::vector<double> fixed_step_sizes(const TsConfig& cfg);

/// Receives every accepted state. Step 0 is the initial state with dt = 0;
/// step n carries the size of the step that produced it.
class Recorder {
 public:
  virtual ~Recorder() = default;
  /// Called once before step 0 is recorded.
  virtual void begin(Scheme scheme) { (void)scheme; }
  virtual void record(int step, double t, double dt, const Vector& u) = 0;
};

struct StepRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  Vector state;
};

/// Recorder keeping every state in memory.
class Trajectory final : public Recorder {
 public:
  void begin(Scheme scheme) override;
  void record(int step, double t, double dt, const Vector& u) override;

  /// Scheme of the run that filled the trajectory, if known.
  const std::optional<Scheme>& scheme() const { return scheme_; }
  const std::vector<StepRecord>& records() const { return records_; }
  int steps() const { return static_cast<int>(records_.size()) - 1; }
  const StepRecord& operator[](int n) const { return records_.at(n); }
  /// Step sizes dt_1..dt_m of the recorded steps.
  std::vector<double> step_sizes() const;
  void clear() {
    records_.clear();
    scheme_.reset();
  }

 private:
  std::vector<StepRecord> records_;
  std::optional<Scheme> scheme_;
};

struct StepLogRow {
  int step = 0;  // index of the step being attempted (1-based)
  double t = 0.0;
  double dt = 0.0;
  double wlte = 0.0;  // 0 when no error estimate is available
  bool accepted = true;
};

using StepLog = std::function<void(const StepLogRow&)>;

struct IntegrationResult {
  Vector final_state;
  int steps = 0;
  int rejected = 0;
  std::vector<double> step_sizes;
  SolverStats stats;
};

/// Integrates from cfg.t0 to cfg.T. Fixed-step runs take steps of cfg.dt and
/// clip the last one so the final time is exactly T; adaptive runs (RK3 only)
/// use the embedded error estimate.
IntegrationResult integrate(const OdeSystem& sys, const Vector& u0, const TsConfig& cfg,
                            Recorder* recorder = nullptr, const StepLog& log = {});

/// Replays a known step-size sequence; no controller, no failure retries.
IntegrationResult integrate_steps(const OdeSystem& sys, const Vector& u0,
                                  const std::vector<double>& step_sizes, const TsConfig& cfg,
                                  Recorder* recorder = nullptr);

}  // namespace semopt
