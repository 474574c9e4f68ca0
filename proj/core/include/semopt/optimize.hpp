#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "semopt/adjoint.hpp"

namespace semopt {

struct LineSearchParams {
  double c1 = 1e-4;
  double c2 = 0.9;
  double tau_init = 1.0;
  int max_evals = 25;
  double tau_min = 1e-12;
  double tau_max = 1e10;

  void validate() const;
};

struct PhiValue {
  double value = 0.0;
  double slope = 0.0;
};

/// phi(tau) = f(x + tau d) and its derivative. May throw Error with kind
/// EvaluationFailure (or a numeric/step failure), which the search treats as
/// "tau too large".
using Phi = std::function<PhiValue(double tau)>;

enum class LineSearchStatus { Converged, MaxEvals, Failed };

const char* to_string(LineSearchStatus s);

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::Failed;
  double tau = 0.0;
  PhiValue at;
  int evals = 0;
};

/// Strong-Wolfe line search: bracketing by doubling, then a zoom phase with
/// safeguarded cubic interpolation. When the evaluation budget runs out the
/// best trial with sufficient decrease is returned with status MaxEvals;
/// Failed means no acceptable point was found.
LineSearchResult line_search(const Phi& phi, PhiValue at0, const LineSearchParams& params);

/// Limited-memory inverse-BFGS approximation applied by the two-loop
/// recursion, scaled by gamma = s^T y / y^T y of the newest pair.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity = 5);

  /// Stores (s, y) unless s^T y <= 1e-14 |s| |y|. Returns whether it was kept.
  bool update(const Vector& s, const Vector& y);
  /// -H g; equals -g while the memory is empty.
  Vector direction(const Vector& g) const;
  void clear() { pairs_.clear(); }
  int size() const { return static_cast<int>(pairs_.size()); }
  int capacity() const { return capacity_; }
  double gamma() const;

 private:
  struct Pair {
    Vector s;
    Vector y;
    double rho;
  };
  int capacity_;
  std::deque<Pair> pairs_;
};

/// Smooth objective with gradient.
class Objective {
 public:
  struct Result {
    double value = 0.0;
    Vector gradient;
  };
  virtual ~Objective() = default;
  virtual Index size() const = 0;
  virtual Result evaluate(const Vector& x) = 0;
};

struct OptimConfig {
  int max_iters = 50;
  double gtol = 1e-6;  // stop when |g| <= gtol * max(1, |g_0|)
  double ftol = 0.0;   // stop when f_prev - f <= ftol * |f_prev|
  int memory = 5;
  LineSearchParams line_search{};

  void validate() const;
};

enum class StopReason { GradientTolerance, FunctionTolerance, MaxIterations, LineSearchFailure };

const char* to_string(StopReason r);

struct IterationRecord {
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int fevals = 0;  // cumulative objective evaluations
  double wall_time = 0.0;
  bool line_search_flagged = false;  // accepted with sufficient decrease only
};

struct OptimResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  StopReason reason = StopReason::MaxIterations;
  bool converged = false;
  std::vector<IterationRecord> log;
  int fevals = 0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// L-BFGS with strong-Wolfe line search.
OptimResult minimize(Objective& objective, const Vector& x0, const OptimConfig& cfg,
                     const IterationCallback& on_iteration = {});

/// Terminal-misfit objective over the initial state of an ODE system: every
/// evaluation runs one forward integration and one backward sweep.
class AssimilationObjective final : public Objective {
 public:
  AssimilationObjective(const OdeSystem& sys, TsConfig cfg, TerminalMisfit misfit,
                        CheckpointPolicy policy = {});

  Index size() const override { return sys_.size(); }
  Result evaluate(const Vector& x) override;

  const GradientEvaluation& last() const { return last_; }
  int evaluations() const { return evaluations_; }

 private:
  const OdeSystem& sys_;
  TsConfig cfg_;
  TerminalMisfit misfit_;
  CheckpointPolicy policy_;
  GradientEvaluation last_;
  int evaluations_ = 0;
};

}  // namespace semopt
