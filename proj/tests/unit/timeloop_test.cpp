#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "semopt/error.hpp"
#include "semopt/krylov.hpp"
#include "semopt/operator.hpp"
#include "semopt/problems.hpp"
#include "semopt/timeloop.hpp"
#include "support.hpp"

using namespace semopt;

namespace {

LinearOdeSystem scalar(double lambda) { return LinearOdeSystem(Matrix::Constant(1, 1, lambda)); }

Vector one() { return Vector::Ones(1); }

TsConfig fixed(Scheme s, double T, double dt) {
  TsConfig c;
  c.scheme = s;
  c.T = T;
  c.dt = dt;
  return c;
}

std::shared_ptr<const Grid> line(double a, double b, int e, int n, Boundary bc) {
  return Grid::build({Axis{a, b, e, bc}}, n);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

class Tape final : public Recorder {
 public:
  void record(int step, double t, double dt, const Vector& u) override {
    rows.push_back({step, t, dt, u});
  }
  std::vector<StepRecord> rows;
};

}  // namespace

TEST(Euler, ZeroOperatorKeepsState) {
  SemOperator op(line(0, 1, 3, 4, Boundary::Periodic), {0.0, Advection::None, {0, 0, 0}});
  std::mt19937_64 rng(1);
  const Vector u = test::random_vector(op.size(), rng);
  EXPECT_EQ((step_euler(op, u, 0.3) - u).norm(), 0.0);
}

TEST(Euler, ScalarDecay) { EXPECT_NEAR(step_euler(scalar(-1), one(), 0.1)[0], 0.9, 1e-15); }

TEST(Euler, StepIsExactlyUPlusDtF) {
  SemOperator op(line(0, 1, 3, 5, Boundary::Dirichlet0), {0.1, Advection::None, {0, 0, 0}});
  std::mt19937_64 rng(2);
  Vector u = test::random_vector(op.size(), rng);
  op.project(u);
  const Vector next = step_euler(op, u, 0.01);
  const Vector direct = u + 0.01 * op.rhs(u);
  EXPECT_LE((next - direct).norm(), 1e-15 * direct.norm());
}

TEST(Rk3, ZeroOperatorHasZeroError) {
  const Rk3Result r = step_rk3(scalar(0), one(), 0.5);
  EXPECT_EQ(r.u[0], 1.0);
  EXPECT_EQ(r.embedded[0], 1.0);
  EXPECT_EQ(r.error[0], 0.0);
}

TEST(Rk3, ScalarDecayMatchesTaylorToFourthOrder) {
  const Rk3Result r = step_rk3(scalar(-1), one(), 0.1);
  EXPECT_LE(std::abs(r.u[0] - std::exp(-0.1)), 5e-6);
  // 1 - h + h^2/2 - h^3/6
  EXPECT_NEAR(r.u[0], 1 - 0.1 + 0.005 - 0.1 * 0.1 * 0.1 / 6, 1e-15);
  EXPECT_NEAR(r.embedded[0], 1 - 0.1 + 0.005, 1e-15);
}

TEST(Rk3, LinearSystemStepIsLinear) {
  std::mt19937_64 rng(3);
  const Matrix a = test::random_vector(36, rng).reshaped(6, 6);
  LinearOdeSystem sys(a);
  const Vector x = test::random_vector(6, rng);
  const Vector y = test::random_vector(6, rng);
  const Vector lhs = step_rk3(sys, 2 * x + y, 0.05).u;
  const Vector rhs = 2 * step_rk3(sys, x, 0.05).u + step_rk3(sys, y, 0.05).u;
  EXPECT_LE((lhs - rhs).norm(), 1e-14 * rhs.norm());
}

TEST(CrankNicolson, ZeroOperatorNeedsNoNewtonIteration) {
  SolverStats stats;
  const Vector r = step_cn(scalar(0), one(), 0.1, TsConfig{}, &stats);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(stats.newton_iterations, 0);
}

TEST(CrankNicolson, ScalarClosedForm) {
  const Vector r = step_cn(scalar(-1), one(), 0.1, TsConfig{});
  EXPECT_NEAR(r[0], 0.95 / 1.05, 1e-12);
}

TEST(CrankNicolson, MatchesDenseSolveOnDiffusion) {
  SemOperator op(line(0, 1, 3, 5, Boundary::Dirichlet0), {0.05, Advection::None, {0, 0, 0}});
  std::mt19937_64 rng(4);
  Vector u = test::random_vector(op.size(), rng);
  op.project(u);
  const double dt = 0.01;
  const Matrix a = densify(op, u);
  const Index n = op.size();
  const Matrix lhs = Matrix::Identity(n, n) - 0.5 * dt * a;
  const Vector expected = lhs.partialPivLu().solve(u + 0.5 * dt * a * u);
  const Vector got = step_cn(op, u, dt, TsConfig{});
  EXPECT_LE((got - expected).norm(), 1e-9 * expected.norm());
}

TEST(CrankNicolson, NonlinearResidualMeetsTolerance) {
  SemOperator op(line(-2, 2, 4, 6, Boundary::Periodic), {0.01, Advection::Burgers, {0, 0, 0}});
  std::mt19937_64 rng(5);
  const Vector u = 0.5 * test::random_vector(op.size(), rng);
  TsConfig cfg;
  SolverStats stats;
  const double dt = 0.01;
  const Vector v = step_cn(op, u, dt, cfg, &stats);
  const Vector residual = v - u - 0.5 * dt * (op.rhs(u) + op.rhs(v));
  EXPECT_LE(residual.norm(), cfg.newton_tol * (1 + u.norm()));
  EXPECT_GE(stats.newton_iterations, 1);
  EXPECT_EQ(stats.linear_solves, stats.newton_iterations);
}

TEST(CrankNicolson, NewtonFailureCarriesDiagnostics) {
  SemOperator op(line(-2, 2, 4, 6, Boundary::Periodic), {0.01, Advection::Burgers, {0, 0, 0}});
  std::mt19937_64 rng(6);
  const Vector u = 0.5 * test::random_vector(op.size(), rng);
  TsConfig cfg;
  cfg.newton_max = 1;
  cfg.newton_tol = 1e-15;
  try {
    step_cn(op, u, 0.05, cfg);
    FAIL();
  } catch (const StepFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepFailure);
    EXPECT_GE(e.newton_iterations(), 1);
    EXPECT_GT(e.krylov_iterations(), 0);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Controller, Examples) {
  TsConfig cfg;
  StepDecision d = control_step(1.0, 2.0, cfg);
  EXPECT_TRUE(d.accept);
  EXPECT_NEAR(d.dt_new, 1.8, 1e-15);
  d = control_step(1e-9, 2.0, cfg);
  EXPECT_TRUE(d.accept);
  EXPECT_NEAR(d.dt_new, 10.0, 1e-15);
  d = control_step(8.0, 2.0, cfg);
  EXPECT_FALSE(d.accept);
  EXPECT_NEAR(d.dt_new, 0.9, 1e-14);
  d = control_step(0.0, 2.0, cfg);
  EXPECT_NEAR(d.dt_new, 10.0, 1e-15);
}

TEST(Controller, FactorStaysWithinBounds) {
  TsConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logw(-12, 12);
  for (int t = 0; t < 1000; ++t) {
    const double w = std::pow(10.0, logw(rng));
    const StepDecision d = control_step(w, 0.3, cfg);
    EXPECT_GE(d.dt_new, cfg.alpha_min * 0.3 * (1 - 1e-15));
    EXPECT_LE(d.dt_new, cfg.alpha_max * 0.3 * (1 + 1e-15));
    EXPECT_EQ(d.accept, w <= 1.0);
  }
}

TEST(WeightedError, RmsAndMaxForms) {
  TsConfig cfg;
  cfg.tol_a = 1.0;
  cfg.tol_r = 0.0;
  const Vector err = (Vector(2) << 3.0, 4.0).finished();
  const Vector zero = Vector::Zero(2);
  EXPECT_NEAR(weighted_error(err, zero, zero, cfg), std::sqrt(12.5), 1e-14);
  cfg.wlte_max_norm = true;
  EXPECT_NEAR(weighted_error(err, zero, zero, cfg), 4.0, 1e-14);
  cfg.wlte_max_norm = false;
  cfg.tol_a = 0.0;
  cfg.tol_r = 0.5;
  const Vector u = (Vector(2) << 2.0, -1.0).finished();
  const Vector uh = (Vector(2) << 1.0, -8.0).finished();
  // Tol = (1, 4)
  EXPECT_NEAR(weighted_error(err, u, uh, cfg), std::sqrt(0.5 * (9.0 + 1.0)), 1e-14);
}

TEST(TsConfigValidation, RejectsBadSettings) {
  auto bad = [](auto mutate) {
    TsConfig c;
    mutate(c);
    return kind_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](TsConfig& c) { c.T = 0.0; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(bad([](TsConfig& c) { c.dt = 0.0; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(bad([](TsConfig& c) { c.alpha_max = 0.5; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(bad([](TsConfig& c) { c.beta = 1.0; }), ErrorKind::InvalidArgument);
  EXPECT_EQ(bad([](TsConfig& c) {
              c.adaptive = true;
              c.scheme = Scheme::CN;
            }),
            ErrorKind::UnsupportedConfiguration);
  EXPECT_EQ(kind_of([] { parse_scheme("rk4"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(parse_scheme("cn"), Scheme::CN);
}

TEST(Integrate, FixedStepsDividingHorizonGiveExactCount) {
  Tape tape;
  const IntegrationResult r = integrate(scalar(-1), one(), fixed(Scheme::RK3, 1.0, 0.125), &tape);
  EXPECT_EQ(r.steps, 8);
  ASSERT_EQ(tape.rows.size(), 9u);
  EXPECT_EQ(tape.rows.front().dt, 0.0);
  EXPECT_EQ(tape.rows.back().t, 1.0);
}

TEST(Integrate, LastStepIsClippedToHorizon) {
  Trajectory traj;
  const IntegrationResult r = integrate(scalar(-1), one(), fixed(Scheme::Euler, 1.0, 0.3), &traj);
  EXPECT_EQ(r.steps, 4);
  EXPECT_EQ(traj[4].t, 1.0);
  EXPECT_NEAR(traj[4].dt, 0.1, 1e-15);
  for (int n = 1; n <= traj.steps(); ++n) EXPECT_GT(traj[n].t, traj[n - 1].t);
  const std::vector<double> planned = fixed_step_sizes(fixed(Scheme::Euler, 1.0, 0.3));
  EXPECT_EQ(planned, traj.step_sizes());
}

TEST(Integrate, AdaptiveStepsTelescopeToHorizon) {
  SemOperator op(line(-2, 2, 5, 8, Boundary::Periodic), {0.05, Advection::Burgers, {0, 0, 0}});
  const Vector u0 = sample_1d(op.grid(), [](double x) { return 0.5 * std::sin(0.5 * std::numbers::pi * x); });
  TsConfig cfg = fixed(Scheme::RK3, 2.0, 1e-3);
  cfg.adaptive = true;
  cfg.tol_a = 1e-7;
  cfg.tol_r = 1e-7;
  Trajectory traj;
  std::vector<StepLogRow> log;
  const IntegrationResult r = integrate(op, u0, cfg, &traj, [&](const StepLogRow& row) { log.push_back(row); });
  double sum = 0.0;
  for (double h : traj.step_sizes()) sum += h;
  EXPECT_NEAR(sum, 2.0, 1e-12);
  EXPECT_EQ(traj[traj.steps()].t, 2.0);
  EXPECT_EQ(static_cast<int>(log.size()), r.steps + r.rejected);
  for (const StepLogRow& row : log) EXPECT_EQ(row.accepted, row.wlte <= 1.0);
}

TEST(Integrate, MaxStepsIsEnforced) {
  TsConfig cfg = fixed(Scheme::Euler, 1.0, 0.01);
  cfg.max_steps = 10;
  EXPECT_EQ(kind_of([&] { integrate(scalar(-1), one(), cfg); }), ErrorKind::StepFailure);
  EXPECT_EQ(kind_of([&] { fixed_step_sizes(cfg); }), ErrorKind::InvalidArgument);
  cfg.adaptive = true;
  cfg.scheme = Scheme::RK3;
  cfg.tol_a = cfg.tol_r = 1e-14;
  EXPECT_EQ(kind_of([&] { integrate(scalar(-1), one(), cfg); }), ErrorKind::StepFailure);
}

TEST(Integrate, FixedStepReplayIsBitwiseDeterministic) {
  SemOperator op(Grid::build(std::vector<Axis>(3, Axis{-2, 2, 2, Boundary::Periodic}), 4),
                 {0.01, Advection::Burgers, {0, 0, 0}});
  const Vector u0 = burgers3d_field(op.grid());
  for (Scheme s : {Scheme::RK3, Scheme::CN}) {
    Trajectory a;
    Trajectory b;
    integrate(op, u0, fixed(s, 0.05, 0.01), &a);
    integrate(op, u0, fixed(s, 0.05, 0.01), &b);
    ASSERT_EQ(a.steps(), b.steps());
    for (int n = 0; n <= a.steps(); ++n) {
      EXPECT_EQ(std::memcmp(a[n].state.data(), b[n].state.data(), sizeof(double) * a[n].state.size()), 0);
    }
  }
}

TEST(Integrate, TemporalOrdersOnAdvectionDiffusion) {
  ProblemSpec spec = ProblemSpec::defaults(ProblemKind::AdvDiff1D);
  spec.degree = 16;
  spec.horizon = 1.0;
  const Problem p = make_problem(spec);
  const struct {
    Scheme s;
    double min_order;
  } expected[] = {{Scheme::Euler, 0.95}, {Scheme::RK3, 2.9}, {Scheme::CN, 1.95}};
  for (const auto& e : expected) {
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025}) {
      const Vector uT = integrate(*p.op, p.exact_initial, fixed(e.s, 1.0, dt)).final_state;
      err.push_back(l2_norm(*p.grid, uT - p.reference));
    }
    for (std::size_t k = 1; k < err.size(); ++k) {
      EXPECT_GE(std::log2(err[k - 1] / err[k]), e.min_order) << to_string(e.s);
    }
  }
}

TEST(Integrate, BurgersAnalyticSolutionIsTracked) {
  const double nu = 0.001;
  SemOperator op(line(-2, 2, 10, 8, Boundary::Periodic), {nu, Advection::Burgers, {0, 0, 0}});
  const Vector u0 = sample_1d(op.grid(), [&](double x) { return burgers1d_exact(x, 0.0, nu); });
  const Vector ref = sample_1d(op.grid(), [&](double x) { return burgers1d_exact(x, 4.0, nu); });
  const Vector uT = integrate(op, u0, fixed(Scheme::RK3, 4.0, 0.005)).final_state;
  EXPECT_LE(l2_norm(op.grid(), uT - ref), 1e-9);
}

TEST(Gmres, SolvesNonsymmetricSystem) {
  std::mt19937_64 rng(9);
  const Index n = 40;
  const Matrix a = Matrix::Identity(n, n) * 4 + 0.3 * test::random_vector(n * n, rng).reshaped(n, n);
  const Vector b = test::random_vector(n, rng);
  GmresOptions opts;
  opts.restart = 10;
  opts.max_iters = 500;
  const GmresResult r = gmres([&](const Vector& x) -> Vector { return a * x; }, b, Vector(), opts);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((a * r.x - b).norm(), 1e-9 * b.norm());
  EXPECT_LE(r.residual, opts.tol * b.norm() * 1.01);
}

TEST(Gmres, ZeroRightHandSideConvergesImmediately) {
  const GmresResult r = gmres([](const Vector& x) -> Vector { return x; }, Vector::Zero(5), Vector(), {});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Gmres, ReportsNonConvergence) {
  std::mt19937_64 rng(10);
  const Index n = 30;
  const Matrix a = test::random_vector(n * n, rng).reshaped(n, n);
  GmresOptions opts;
  opts.restart = 2;
  opts.max_iters = 4;
  const GmresResult r = gmres([&](const Vector& x) -> Vector { return a * x; }, test::random_vector(n, rng), Vector(), opts);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 4);
}
