#include "semopt/optimize.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "semopt/error.hpp"

namespace semopt {

void LineSearchParams::validate() const {
  require(c1 > 0.0 && c1 < c2 && c2 < 1.0, "line search needs 0 < c1 < c2 < 1");
  require(tau_init > 0.0 && tau_min > 0.0 && tau_max >= tau_init, "invalid line search step bounds");
  require(max_evals >= 1, "line search needs at least one evaluation");
}

const char* to_string(LineSearchStatus s) {
  switch (s) {
    case LineSearchStatus::Converged: return "converged";
    case LineSearchStatus::MaxEvals: return "max_evals";
    case LineSearchStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

bool is_evaluation_failure(const Error& e) {
  return e.kind() == ErrorKind::EvaluationFailure || e.kind() == ErrorKind::NumericFailure ||
         e.kind() == ErrorKind::StepFailure;
}

struct Trial {
  double tau = 0.0;
  PhiValue at;
};

// Minimizer of the cubic interpolating values and slopes at a and b, clamped
// to [lower, upper]; the midpoint when the cubic is unusable.
double cubic_step(const Trial& a, const Trial& b, double lower, double upper) {
  const double mid = 0.5 * (lower + upper);
  const double d1 = a.at.slope + b.at.slope - 3.0 * (a.at.value - b.at.value) / (a.tau - b.tau);
  const double disc = d1 * d1 - a.at.slope * b.at.slope;
  if (!(disc >= 0.0)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.tau - a.tau);
  const double denom = b.at.slope - a.at.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double t = b.tau - (b.tau - a.tau) * (b.at.slope + d2 - d1) / denom;
  if (!std::isfinite(t)) return mid;
  return std::min(upper, std::max(lower, t));
}

}  // namespace

LineSearchResult line_search(const Phi& phi, PhiValue at0, const LineSearchParams& p) {
  p.validate();
  require(at0.slope < 0.0, "line search needs a descent direction");
  const double f0 = at0.value;
  const double d0 = at0.slope;

  LineSearchResult res;
  std::optional<Trial> best;
  auto sufficient = [&](const Trial& t) { return t.at.value <= f0 + p.c1 * t.tau * d0; };
  auto curvature = [&](const Trial& t) { return std::abs(t.at.slope) <= -p.c2 * d0; };
  auto evaluate = [&](double tau, Trial& out) {
    ++res.evals;
    out.tau = tau;
    try {
      out.at = phi(tau);
    } catch (const Error& e) {
      if (!is_evaluation_failure(e)) throw;
      return false;
    }
    if (!std::isfinite(out.at.value) || !std::isfinite(out.at.slope)) return false;
    if (sufficient(out) && (!best || out.at.value < best->at.value)) best = out;
    return true;
  };
  auto accept = [&](const Trial& t) {
    res.status = LineSearchStatus::Converged;
    res.tau = t.tau;
    res.at = t.at;
    return res;
  };
  auto exhausted = [&]() {
    if (best) {
      res.status = LineSearchStatus::MaxEvals;
      res.tau = best->tau;
      res.at = best->at;
    } else {
      res.status = LineSearchStatus::Failed;
    }
    return res;
  };

  Trial prev{0.0, at0};
  Trial lo;
  Trial hi;
  double tau = p.tau_init;
  while (true) {
    if (res.evals >= p.max_evals) return exhausted();
    if (tau < p.tau_min) return exhausted();
    Trial cur;
    if (!evaluate(tau, cur)) {
      tau = prev.tau + 0.5 * (tau - prev.tau);
      continue;
    }
    if (!sufficient(cur) || (prev.tau > 0.0 && cur.at.value >= prev.at.value)) {
      lo = prev;
      hi = cur;
      break;
    }
    if (curvature(cur)) return accept(cur);
    if (cur.at.slope >= 0.0) {
      lo = cur;
      hi = prev;
      break;
    }
    prev = cur;
    if (tau >= p.tau_max) return exhausted();
    tau = std::min(2.0 * tau, p.tau_max);
  }

  while (true) {
    if (res.evals >= p.max_evals) return exhausted();
    const double width = std::abs(hi.tau - lo.tau);
    if (width < p.tau_min) return exhausted();
    const double left = std::min(lo.tau, hi.tau);
    const double lower = left + 0.1 * width;
    const double upper = left + 0.9 * width;
    Trial cur;
    const double t = std::isfinite(hi.at.value) ? cubic_step(lo, hi, lower, upper)
                                                : 0.5 * (lo.tau + hi.tau);
    if (!evaluate(t, cur)) {
      hi = Trial{t, {std::numeric_limits<double>::infinity(), 0.0}};
      continue;
    }
    if (!sufficient(cur) || cur.at.value >= lo.at.value) {
      hi = cur;
    } else {
      if (curvature(cur)) return accept(cur);
      if (cur.at.slope * (hi.tau - lo.tau) >= 0.0) hi = lo;
      lo = cur;
    }
  }
}

LbfgsMemory::LbfgsMemory(int capacity) : capacity_(capacity) {
  require(capacity >= 1, "L-BFGS memory needs capacity >= 1");
}

bool LbfgsMemory::update(const Vector& s, const Vector& y) {
  require(s.size() == y.size(), "L-BFGS pair size mismatch");
  const double sy = s.dot(y);
  if (!(sy > 1e-14 * s.norm() * y.norm())) return false;
  if (!pairs_.empty() && pairs_.front().s.size() != s.size()) pairs_.clear();
  if (static_cast<int>(pairs_.size()) == capacity_) pairs_.pop_front();
  pairs_.push_back({s, y, 1.0 / sy});
  return true;
}

double LbfgsMemory::gamma() const {
  if (pairs_.empty()) return 1.0;
  const Pair& p = pairs_.back();
  return p.s.dot(p.y) / p.y.squaredNorm();
}

Vector LbfgsMemory::direction(const Vector& g) const {
  Vector q = g;
  std::vector<double> alpha(pairs_.size());
  for (int i = size() - 1; i >= 0; --i) {
    alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
    q -= alpha[i] * pairs_[i].y;
  }
  q *= gamma();
  for (int i = 0; i < size(); ++i) {
    const double b = pairs_[i].rho * pairs_[i].y.dot(q);
    q += (alpha[i] - b) * pairs_[i].s;
  }
  return -q;
}

void OptimConfig::validate() const {
  require(max_iters >= 0, "max_iters must be non-negative");
  require(gtol >= 0.0 && ftol >= 0.0, "tolerances must be non-negative");
  require(memory >= 1, "L-BFGS memory must be at least 1");
  line_search.validate();
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gtol";
    case StopReason::FunctionTolerance: return "ftol";
    case StopReason::MaxIterations: return "max_iters";
    case StopReason::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

OptimResult minimize(Objective& objective, const Vector& x0, const OptimConfig& cfg,
                     const IterationCallback& on_iteration) {
  cfg.validate();
  require(x0.size() == objective.size(), "initial iterate has wrong size");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  OptimResult res;
  res.x = x0;
  Objective::Result cur = objective.evaluate(res.x);
  res.fevals = 1;
  auto emit = [&](int iter, double step, bool flagged) {
    IterationRecord rec{iter, cur.value, cur.gradient.norm(), step, res.fevals, elapsed(), flagged};
    res.log.push_back(rec);
    if (on_iteration) on_iteration(rec);
  };
  emit(0, 0.0, false);

  const double threshold = cfg.gtol * std::max(1.0, cur.gradient.norm());
  LbfgsMemory memory(cfg.memory);
  res.reason = StopReason::MaxIterations;
  if (cur.gradient.norm() <= threshold) {
    res.reason = StopReason::GradientTolerance;
    res.converged = true;
  }
  for (int iter = 1; !res.converged && iter <= cfg.max_iters; ++iter) {
    Vector d = memory.direction(cur.gradient);
    double slope = cur.gradient.dot(d);
    if (!(slope < 0.0) || !d.allFinite()) {
      memory.clear();
      d = -cur.gradient;
      slope = cur.gradient.dot(d);
    }
    std::vector<std::pair<double, Objective::Result>> trials;
    const Phi phi = [&](double tau) {
      Objective::Result r = objective.evaluate(res.x + tau * d);
      ++res.fevals;
      const PhiValue v{r.value, r.gradient.dot(d)};
      trials.emplace_back(tau, std::move(r));
      return v;
    };
    const LineSearchResult ls = line_search(phi, {cur.value, slope}, cfg.line_search);
    if (ls.status == LineSearchStatus::Failed) {
      res.reason = StopReason::LineSearchFailure;
      break;
    }
    Objective::Result next;
    for (auto& [tau, r] : trials) {
      if (tau == ls.tau) next = std::move(r);
    }
    const Vector s = ls.tau * d;
    memory.update(s, next.gradient - cur.gradient);
    const double previous = cur.value;
    res.x += s;
    cur = std::move(next);
    emit(iter, ls.tau, ls.status == LineSearchStatus::MaxEvals);
    if (cur.gradient.norm() <= threshold) {
      res.reason = StopReason::GradientTolerance;
      res.converged = true;
    } else if (cfg.ftol > 0.0 && previous - cur.value <= cfg.ftol * std::abs(previous)) {
      res.reason = StopReason::FunctionTolerance;
      res.converged = true;
    }
  }
  res.value = cur.value;
  res.gradient = std::move(cur.gradient);
  return res;
}

AssimilationObjective::AssimilationObjective(const OdeSystem& sys, TsConfig cfg,
                                             TerminalMisfit misfit, CheckpointPolicy policy)
    : sys_(sys), cfg_(cfg), misfit_(std::move(misfit)), policy_(policy) {
  cfg_.validate();
  require(misfit_.reference.size() == sys_.size() && misfit_.weights.size() == sys_.size(),
          "misfit does not conform to the system");
}

Objective::Result AssimilationObjective::evaluate(const Vector& x) {
  ++evaluations_;
  Vector u0 = x;
  sys_.project(u0);
  try {
    last_ = evaluate_gradient(sys_, cfg_, u0, misfit_, policy_);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::StepFailure || e.kind() == ErrorKind::NumericFailure) {
      throw Error(ErrorKind::EvaluationFailure, e.what());
    }
    throw;
  }
  if (!std::isfinite(last_.value) || !last_.gradient.allFinite()) {
    throw Error(ErrorKind::EvaluationFailure, "objective or gradient is not finite");
  }
  return {last_.value, last_.gradient};
}

}  // namespace semopt
