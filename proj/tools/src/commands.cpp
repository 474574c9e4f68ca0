#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>

#include "semopt/checkpoint.hpp"
#include "semopt/error.hpp"
#include "semopt/parallel.hpp"
#include "semopt/snapshot.hpp"

namespace semopt::cli {

namespace {

using Clock = std::chrono::steady_clock;

// CSV destination: the `output` file when set, stdout otherwise.
class Sink {
 public:
  explicit Sink(const RunConfig& cfg) {
    if (cfg.has("output")) {
      file_.open(cfg.str("output"));
      if (!file_) fail(ErrorKind::Io, "cannot write " + cfg.str("output"));
    }
    out().precision(17);
    cfg.write_header(out());
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void apply_threads(const RunConfig& cfg) {
  const int n = cfg.integer("threads");
  require(n >= 0, "threads must be non-negative");
  set_num_threads(n);
}

// Analytic solution t time units after the exact initial state, when known.
std::optional<std::function<double(double)>> analytic(const ProblemSpec& spec, double t) {
  const double nu = spec.nu;
  switch (spec.kind) {
    case ProblemKind::Burgers1D:
      return [=](double x) { return burgers1d_exact(x, t, nu); };
    case ProblemKind::AdvDiff1D: {
      const auto amp = advdiff_amplitudes(spec.seed);
      const double vel = spec.velocity;
      return [=](double x) { return advdiff_exact(x, t, amp, nu, vel); };
    }
    case ProblemKind::PureDiffusion1D: {
      const double start = spec.reference_time - spec.horizon;
      return [=](double x) { return diffusion1d_exact(x, start + t, nu); };
    }
    case ProblemKind::Burgers3D:
      return std::nullopt;
  }
  return std::nullopt;
}

Vector load_field(const std::string& path, const Grid& grid) {
  const Snapshot snap = read_snapshot(path);
  require(snap.values.size() == grid.nglobal() && snap.ncomp == grid.ncomp() &&
              snap.grid.degree == grid.spec().degree &&
              snap.grid.axes.size() == grid.spec().axes.size(),
          "snapshot " + path + " does not match the configured grid");
  for (std::size_t a = 0; a < snap.grid.axes.size(); ++a) {
    require(snap.grid.axes[a].elements == grid.spec().axes[a].elements,
            "snapshot " + path + " does not match the configured grid");
  }
  return snap.values;
}

Vector starting_state(const std::string& start, const Problem& p) {
  if (start == "guess" || (start == "auto" && !p.has_exact_initial())) return p.guess;
  if (start == "auto") return p.exact_initial;
  if (start == "exact") {
    if (!p.has_exact_initial()) {
      fail(ErrorKind::UnsupportedConfiguration,
           std::string("no exact initial state for ") + to_string(p.spec.kind));
    }
    return p.exact_initial;
  }
  return load_field(start, *p.grid);
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cxx = sxx - sx * sx / n;
  const double cxy = sxy - sx * sy / n;
  const double cyy = syy - sy * sy / n;
  LineFit f;
  f.slope = cxy / cxx;
  f.r2 = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
  return f;
}

double terminal_value(const Problem& p, const TsConfig& ts, const Vector& u0) {
  return p.misfit().value(integrate(*p.op, u0, ts).final_state);
}

}  // namespace

int run_forward(const RunConfig& cfg) {
  const ProblemSpec spec = cfg.problem();
  const TsConfig ts = cfg.time_stepping(spec);
  const std::string start = cfg.str("start");
  apply_threads(cfg);
  const Problem p = make_problem(spec);
  const Vector u0 = starting_state(start, p);

  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << "step,t,dt,wlte,accepted\n";
  const IntegrationResult r = integrate(*p.op, u0, ts, nullptr, [&](const StepLogRow& row) {
    out << row.step << ',' << row.t << ',' << row.dt << ',' << row.wlte << ','
        << (row.accepted ? 1 : 0) << '\n';
  });
  if (!r.final_state.allFinite()) fail(ErrorKind::NumericFailure, "final state is not finite");
  if (cfg.has("snapshot")) write_snapshot(cfg.str("snapshot"), *p.grid, r.final_state);

  out << "# steps = " << r.steps << "\n# rejected = " << r.rejected << '\n';
  out << "# terminal_misfit = " << p.misfit().value(r.final_state) << '\n';
  if (start == "exact" || (start == "auto" && p.has_exact_initial())) {
    if (const auto f = analytic(spec, ts.T)) {
      out << "# terminal_l2_error = " << l2_error_1d(*p.grid, r.final_state, *f) << '\n';
    }
  }
  return kExitOk;
}

int run_gradcheck(const RunConfig& cfg) {
  const ProblemSpec spec = cfg.problem();
  const TsConfig ts = cfg.time_stepping(spec);
  const CheckpointPolicy policy = cfg.checkpointing();
  const std::vector<double> eps = cfg.real_list("eps");
  require(!eps.empty(), "eps needs at least one value");
  for (double e : eps) require(e > 0.0, "eps values must be positive");
  const int ndirs = cfg.integer("directions");
  require(ndirs >= 1, "directions must be at least 1");
  const int dir_seed = cfg.integer("direction-seed");
  apply_threads(cfg);
  const Problem p = make_problem(spec);

  std::vector<Vector> dirs;
  if (cfg.has("direction")) {
    Vector d = load_field(cfg.str("direction"), *p.grid);
    p.op->project(d);
    require(d.norm() > 0.0, "direction is zero on the admissible subspace");
    dirs.push_back(d / d.norm());
  } else {
    std::mt19937_64 rng(static_cast<std::uint64_t>(dir_seed));
    std::normal_distribution<double> normal;
    for (int k = 0; k < ndirs; ++k) {
      Vector d(p.op->size());
      for (Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
      p.op->project(d);
      dirs.push_back(d / d.norm());
    }
  }

  const Vector& u0 = p.guess;
  const GradientEvaluation g = evaluate_gradient(*p.op, ts, u0, p.misfit(), policy);
  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << "direction,eps,finite_difference,adjoint,relative_error\n";
  double worst = 0.0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const double adj = g.gradient.dot(dirs[k]);
    for (double e : eps) {
      const double fd = (terminal_value(p, ts, u0 + e * dirs[k]) - terminal_value(p, ts, u0 - e * dirs[k])) /
                        (2.0 * e);
      const double rel = std::abs(fd - adj) / std::max(std::abs(adj), std::numeric_limits<double>::min());
      if (!std::isfinite(rel)) fail(ErrorKind::NumericFailure, "finite difference is not finite");
      worst = std::max(worst, rel);
      out << k << ',' << e << ',' << fd << ',' << adj << ',' << rel << '\n';
    }
  }
  out << "# objective = " << g.value << "\n# max_relative_error = " << worst << '\n';
  return kExitOk;
}

int run_optimize(const RunConfig& cfg) {
  const ProblemSpec spec = cfg.problem();
  const TsConfig ts = cfg.time_stepping(spec);
  const CheckpointPolicy policy = cfg.checkpointing();
  const OptimConfig oc = cfg.optimizer();
  const std::string start = cfg.str("start");
  apply_threads(cfg);
  const Problem p = make_problem(spec);
  const Vector x0 = starting_state(start, p);

  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << "iter,J,grad_norm,step,fevals,line_search_flagged\n";
  AssimilationObjective objective(*p.op, ts, p.misfit(), policy);
  const OptimResult r = minimize(objective, x0, oc, [&](const IterationRecord& rec) {
    out << rec.iter << ',' << rec.value << ',' << rec.grad_norm << ',' << rec.step << ','
        << rec.fevals << ',' << (rec.line_search_flagged ? 1 : 0) << std::endl;
  });
  if (cfg.has("snapshot")) write_snapshot(cfg.str("snapshot"), *p.grid, r.x);

  out << "# stop_reason = " << to_string(r.reason) << '\n';
  out << "# converged = " << (r.converged ? "true" : "false") << '\n';
  if (r.log.size() > 5) {
    out << "# relative_decrease_after_5 = " << r.log[5].value / r.log[0].value << '\n';
  }
  if (p.spec.kind != ProblemKind::Burgers3D) {
    if (const auto f = analytic(spec, 0.0)) {
      out << "# initial_condition_l2_error = " << l2_error_1d(*p.grid, r.x, *f) << '\n';
    }
  }
  return r.converged ? kExitOk : kExitNotConverged;
}

int run_convergence(const RunConfig& cfg) {
  const std::string mode = cfg.str("mode");
  require(mode == "h" || mode == "p", "mode must be h or p");
  const std::vector<int> sweep = cfg.int_list("sweep");
  require(sweep.size() >= 3, "a convergence sweep needs at least 3 points");
  const ProblemSpec base = cfg.problem();
  if (base.kind == ProblemKind::Burgers3D) {
    fail(ErrorKind::UnsupportedConfiguration, "convergence sweeps need a 1D problem with a known solution");
  }
  const TsConfig ts = cfg.time_stepping(base);
  const OptimConfig oc = cfg.optimizer();
  std::vector<ProblemSpec> specs;
  for (int v : sweep) {
    ProblemSpec s = base;
    (mode == "h" ? s.elements : s.degree) = v;
    s.validate();
    specs.push_back(s);
  }
  apply_threads(cfg);

  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << "elements,degree,h,l2_error\n";
  std::vector<double> xs, logs;
  for (const ProblemSpec& s : specs) {
    const Problem p = make_problem(s);
    AssimilationObjective objective(*p.op, ts, p.misfit());
    const OptimResult r = minimize(objective, p.exact_initial, oc);
    const double err = l2_error_1d(*p.grid, r.x, *analytic(s, 0.0));
    const Axis& ax = p.grid->spec().axes[0];
    const double h = ax.element_length();
    out << s.elements << ',' << s.degree << ',' << h << ',' << err << '\n';
    xs.push_back(mode == "h" ? std::log(h) : static_cast<double>(s.degree));
    logs.push_back(std::log(err));
  }
  const LineFit fit = fit_line(xs, logs);
  if (mode == "h") {
    out << "# fitted_rate = " << fit.slope << '\n';
  } else {
    out << "# log_error_slope_per_degree = " << fit.slope << '\n';
  }
  out << "# fit_r2 = " << fit.r2 << '\n';
  return kExitOk;
}

int run_schedule(const RunConfig& cfg) {
  const int m = cfg.integer("steps");
  const int s = cfg.integer("checkpoint-slots");
  require(m >= 1, "steps must be at least 1");
  require(s >= 0, "checkpoint-slots must be non-negative");
  const Schedule plan = s == 0 ? plan_store_all(m) : plan_binomial(m, s);

  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << schedule_csv(plan);
  out << "# recomputed = " << plan.recomputed << '\n';
  out << "# forward_evaluations = " << simulate_schedule(plan) << '\n';
  return kExitOk;
}

int run_bench(const RunConfig& cfg) {
  const int elements = cfg.integer("elements");
  const std::vector<int> degrees = cfg.int_list("degrees");
  const int steps = cfg.integer("steps");
  const int reps = cfg.integer("reps");
  const double dt = cfg.real("dt");
  const double nu = cfg.real("nu");
  require(elements >= 1, "elements must be at least 1");
  require(!degrees.empty(), "degrees needs at least one value");
  for (int n : degrees) require(n >= 1, "degrees must be at least 1");
  require(steps >= 1 && reps >= 1, "steps and reps must be at least 1");
  require(dt > 0.0 && nu >= 0.0, "dt must be positive and nu non-negative");
  TsConfig ts;
  ts.scheme = Scheme::RK3;
  ts.dt = dt;
  ts.T = dt * steps;
  ts.validate();
  apply_threads(cfg);

  Sink sink(cfg);
  std::ostream& out = sink.out();
  out << "degree,unknowns,rhs_seconds,transpose_seconds,forward_seconds,adjoint_seconds,adjoint_ratio\n";
  auto best_of = [&](const std::function<void()>& run) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
      const auto t0 = Clock::now();
      run();
      best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
  };
  std::vector<double> log_n, log_rhs, log_tr;
  for (int n : degrees) {
    const Axis ax{-2.0, 2.0, elements, Boundary::Periodic};
    auto grid = Grid::build({ax, ax, ax}, n);
    const SemOperator op(grid, {nu, Advection::Burgers, {0.0, 0.0, 0.0}});
    const Vector u0 = burgers3d_field(*grid);
    const auto lin = op.linearize(u0);
    Vector sink_v;
    const double t_rhs = best_of([&] { sink_v = op.rhs(u0); });
    const double t_tr = best_of([&] { sink_v = op.jacobian_transpose(*lin, u0); });
    Trajectory traj;
    const double t_fwd = best_of([&] {
      traj.clear();
      integrate(op, u0, ts, &traj);
    });
    const Vector seed = traj[traj.steps()].state;
    const double t_adj = best_of([&] { sink_v = adjoint_sweep(op, ts, traj, seed).gradient; });
    out << n << ',' << op.size() << ',' << t_rhs << ',' << t_tr << ',' << t_fwd << ',' << t_adj << ','
        << t_adj / t_fwd << '\n';
    log_n.push_back(std::log(n));
    log_rhs.push_back(std::log(t_rhs));
    log_tr.push_back(std::log(t_tr));
  }
  if (degrees.size() >= 2) {
    out << "# rhs_exponent = " << fit_line(log_n, log_rhs).slope << '\n';
    out << "# transpose_exponent = " << fit_line(log_n, log_tr).slope << '\n';
  }
  return kExitOk;
}

int run_command(const RunConfig& cfg) {
  const std::string& c = cfg.command();
  if (c == "forward") return run_forward(cfg);
  if (c == "gradcheck") return run_gradcheck(cfg);
  if (c == "optimize") return run_optimize(cfg);
  if (c == "convergence") return run_convergence(cfg);
  if (c == "schedule") return run_schedule(cfg);
  if (c == "bench") return run_bench(cfg);
  fail(ErrorKind::InvalidArgument, "unknown command '" + c + "'");
}

}  // namespace semopt::cli
