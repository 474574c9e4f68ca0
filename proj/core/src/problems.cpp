#include "semopt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "semopt/error.hpp"
#include "semopt/tensor.hpp"

namespace semopt {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Burgers1D: return "burgers1d";
    case ProblemKind::AdvDiff1D: return "advdiff1d";
    case ProblemKind::Burgers3D: return "burgers3d";
    case ProblemKind::PureDiffusion1D: return "diffusion1d";
  }
  return "?";
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "burgers1d") return ProblemKind::Burgers1D;
  if (name == "advdiff1d") return ProblemKind::AdvDiff1D;
  if (name == "burgers3d") return ProblemKind::Burgers3D;
  if (name == "diffusion1d") return ProblemKind::PureDiffusion1D;
  fail(ErrorKind::InvalidArgument,
       "unknown problem '" + name + "' (expected burgers1d, advdiff1d, burgers3d or diffusion1d)");
}

double burgers1d_exact(double x, double t, double nu) {
  const double decay = std::exp(-nu * t * kPi * kPi);
  return 2.0 * nu * kPi * std::sin(kPi * x) * decay / (2.0 + decay * std::cos(kPi * x));
}

double burgers1d_guess(double x, double nu, double center) {
  const double d = x - center;
  return burgers1d_exact(x, 0.0, nu) + std::exp(-4.0 * d * d);
}

std::array<double, kAdvDiffModes> advdiff_amplitudes(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.9, 1.0);
  std::array<double, kAdvDiffModes> a{};
  for (double& v : a) v = dist(rng);
  return a;
}

double advdiff_exact(double x, double t, const std::array<double, kAdvDiffModes>& amplitudes,
                     double nu, double velocity) {
  double sum = 0.0;
  for (int j = 1; j <= kAdvDiffModes; ++j) {
    const double k = 2.0 * kPi * j;
    sum += amplitudes[j - 1] * std::sin(k * (x - velocity * t)) * std::exp(-nu * k * k * t);
  }
  return sum;
}

std::array<double, 3> burgers3d_initial(double x1, double x2, double x3) {
  const double h = 0.5 * kPi;
  return {std::sin(h * x1) * std::cos(h * x2) * std::cos(h * x3),
          std::sin(h * x2) * std::cos(h * x3) * std::cos(h * x1),
          std::sin(h * x3) * std::cos(h * x1) * std::cos(h * x2)};
}

double diffusion1d_exact(double x, double t, double nu) {
  return std::sin(2.0 * kPi * x) * std::exp(-4.0 * kPi * kPi * nu * t) +
         std::cos(4.0 * kPi * x) * std::exp(-16.0 * kPi * kPi * nu * t);
}

ProblemSpec ProblemSpec::defaults(ProblemKind kind) {
  ProblemSpec s;
  s.kind = kind;
  switch (kind) {
    case ProblemKind::Burgers1D:
      s.elements = 5;
      s.degree = 8;
      s.nu = 0.001;
      s.horizon = 4.0;
      s.dt = 0.005;
      break;
    case ProblemKind::AdvDiff1D:
      s.elements = 4;
      s.degree = 8;
      s.nu = 1e-5;
      s.velocity = 0.1;
      s.horizon = 0.01;
      s.dt = 1e-4;
      break;
    case ProblemKind::Burgers3D:
      s.elements = 4;
      s.degree = 8;
      s.nu = 0.01;
      s.horizon = 0.5;
      s.dt = 0.01;
      break;
    case ProblemKind::PureDiffusion1D:
      s.elements = 5;
      s.degree = 8;
      s.nu = 0.001;
      s.horizon = 1.0;
      s.dt = 0.01;
      s.reference_time = 3.0;
      break;
  }
  return s;
}

void ProblemSpec::validate() const {
  require(elements >= 1, "elements must be at least 1");
  require(degree >= 1, "degree must be at least 1");
  require(nu >= 0.0, "viscosity must be non-negative");
  require(horizon > 0.0, "horizon must be positive");
  require(dt > 0.0, "time step must be positive");
  if (kind == ProblemKind::PureDiffusion1D) {
    require(reference_time >= horizon, "reference time must not precede the horizon");
  }
}

double l2_error_1d(const Grid& grid, const Vector& field, const std::function<double(double)>& f,
                   int quad_degree) {
  require(grid.dim() == 1, "l2_error_1d needs a 1D grid");
  require(field.size() == grid.nglobal(), "field does not conform to the grid");
  require(quad_degree >= 1, "quadrature degree must be positive");
  const SpectralBasis1D& basis = grid.basis();
  const SpectralBasis1D quad = gll_rule(quad_degree);
  const int n = basis.size();
  // Lagrange interpolation matrix from the element nodes to the quadrature points.
  Matrix interp(quad.size(), n);
  for (int k = 0; k < quad.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      double l = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) l *= (quad.nodes[k] - basis.nodes[j]) / (basis.nodes[i] - basis.nodes[j]);
      }
      interp(k, i) = l;
    }
  }
  const Axis& axis = grid.axis(0);
  const double len = axis.element_length();
  const Vector local = grid.maps().scatter(field);
  double sum = 0.0;
  for (int e = 0; e < grid.num_elements(); ++e) {
    const Vector at = interp * local.segment(static_cast<Index>(e) * n, n);
    for (int k = 0; k < quad.size(); ++k) {
      const double x = axis.x_a + len * (e + 0.5 * (quad.nodes[k] + 1.0));
      const double d = at[k] - f(x);
      sum += 0.5 * len * quad.weights[k] * d * d;
    }
  }
  return std::sqrt(sum);
}

Vector burgers3d_field(const Grid& grid, double factor) {
  require(grid.dim() == 3 && grid.ncomp() == 3, "burgers3d field needs a 3D vector grid");
  const Matrix xs = node_coordinates(grid);
  const Index ns = grid.nscalar();
  Vector v(grid.nglobal());
  for (Index i = 0; i < ns; ++i) {
    const auto u = burgers3d_initial(xs(i, 0), xs(i, 1), xs(i, 2));
    for (int c = 0; c < 3; ++c) v[c * ns + i] = factor * u[c];
  }
  return v;
}

Problem make_problem(const ProblemSpec& spec) {
  spec.validate();
  Problem p;
  p.spec = spec;
  p.coefficients.nu = spec.nu;
  switch (spec.kind) {
    case ProblemKind::Burgers1D: {
      p.grid = Grid::build({Axis{-2.0, 2.0, spec.elements, Boundary::Periodic}}, spec.degree);
      p.coefficients.advection = Advection::Burgers;
      const double nu = spec.nu;
      const double T = spec.horizon;
      p.reference = sample_1d(*p.grid, [&](double x) { return burgers1d_exact(x, T, nu); });
      p.exact_initial = sample_1d(*p.grid, [&](double x) { return burgers1d_exact(x, 0.0, nu); });
      p.guess = sample_1d(*p.grid,
                          [&](double x) { return burgers1d_guess(x, nu, spec.gaussian_center); });
      break;
    }
    case ProblemKind::AdvDiff1D: {
      p.grid = Grid::build({Axis{0.0, 1.0, spec.elements, Boundary::Periodic}}, spec.degree);
      p.coefficients.advection = Advection::Linear;
      p.coefficients.velocity = {spec.velocity, 0.0, 0.0};
      const auto a_ref = advdiff_amplitudes(spec.seed);
      const auto a_guess = advdiff_amplitudes(spec.guess_seed);
      const double nu = spec.nu;
      const double vel = spec.velocity;
      const double T = spec.horizon;
      p.reference = sample_1d(*p.grid, [&](double x) { return advdiff_exact(x, T, a_ref, nu, vel); });
      p.exact_initial =
          sample_1d(*p.grid, [&](double x) { return advdiff_exact(x, 0.0, a_ref, nu, vel); });
      p.guess = sample_1d(*p.grid, [&](double x) { return advdiff_exact(x, 0.0, a_guess, nu, vel); });
      break;
    }
    case ProblemKind::Burgers3D: {
      const Axis ax{-2.0, 2.0, spec.elements, Boundary::Periodic};
      p.grid = Grid::build({ax, ax, ax}, spec.degree);
      p.coefficients.advection = Advection::Burgers;
      p.reference = burgers3d_field(*p.grid, std::exp(-spec.nu * spec.horizon));
      p.guess = burgers3d_field(*p.grid);
      break;
    }
    case ProblemKind::PureDiffusion1D: {
      p.grid = Grid::build({Axis{0.0, 1.0, spec.elements, Boundary::Periodic}}, spec.degree);
      p.coefficients.advection = Advection::None;
      const double nu = spec.nu;
      const double ta = spec.reference_time;
      const double back = spec.reference_time - spec.horizon;
      p.reference = sample_1d(*p.grid, [&](double x) { return diffusion1d_exact(x, ta, nu); });
      p.exact_initial = sample_1d(*p.grid, [&](double x) { return diffusion1d_exact(x, back, nu); });
      p.guess = sample_1d(*p.grid, [&](double x) { return diffusion1d_exact(x, 0.0, nu); });
      break;
    }
  }
  p.op = std::make_shared<const SemOperator>(p.grid, p.coefficients);
  return p;
}

namespace {

// Row k holds w_l P_k(x_l) / gamma_k, where gamma_N = 2/N is the discrete
// norm of P_N under the Lobatto rule.
Matrix projection_matrix(const SpectralBasis1D& basis) {
  const int n = basis.size();
  const int N = basis.degree;
  Matrix t(n, n);
  for (int k = 0; k < n; ++k) {
    const double gamma = k < N ? 2.0 / (2.0 * k + 1.0) : 2.0 / N;
    for (int l = 0; l < n; ++l) {
      t(k, l) = basis.weights[l] * legendre(k, basis.nodes[l]).value / gamma;
    }
  }
  return t;
}

struct Fit {
  double error = 0.0;
  double leading = 0.0;
  double scale = 0.0;
  double decay = 0.0;
  bool under_resolved = false;
  bool resolved = false;
};

Fit fit_spectrum(const std::vector<double>& spectrum, int N) {
  Fit f;
  double top = 0.0;
  for (double a : spectrum) top = std::max(top, a);
  const double noise = std::max(1e-13 * top, 1e-300);
  const int k0 = std::min((N + 1) / 2, N - 3);
  std::vector<double> ks;
  std::vector<double> logs;
  double window_max = 0.0;
  for (int k = k0; k <= N; ++k) {
    window_max = std::max(window_max, spectrum[k]);
    if (spectrum[k] > noise) {
      ks.push_back(k);
      logs.push_back(std::log(spectrum[k]));
    }
  }
  if (ks.empty()) {
    f.resolved = true;
    return f;
  }
  if (ks.size() == 1) {
    f.leading = window_max;
    f.scale = window_max;
    f.error = window_max * window_max / (N + 1.0);
    return f;
  }
  const double n = static_cast<double>(ks.size());
  double sk = 0.0, sl = 0.0, skk = 0.0, skl = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sk += ks[i];
    sl += logs[i];
    skk += ks[i] * ks[i];
    skl += ks[i] * logs[i];
  }
  const double slope = (n * skl - sk * sl) / (n * skk - sk * sk);
  const double intercept = (sl - slope * sk) / n;
  f.decay = -slope;
  f.scale = std::exp(intercept);
  f.leading = std::exp(intercept + slope * N);
  f.error = f.leading * f.leading / (N + 1.0);
  f.under_resolved = f.decay <= 0.0;
  return f;
}

}  // namespace

Vector legendre_coefficients(const SpectralBasis1D& basis, const Vector& nodal) {
  require(nodal.size() == basis.size(), "nodal values do not match the basis");
  return projection_matrix(basis) * nodal;
}

SpectralErrorReport spectral_error_estimate(const Grid& grid, const Vector& field) {
  require(field.size() == grid.nglobal(), "field does not conform to the grid");
  const int N = grid.degree();
  require(N >= 5, "spectral error estimate needs degree >= 5");
  const int n = N + 1;
  const int dim = grid.dim();
  const int nloc = grid.nloc();
  const int ncomp = grid.ncomp();
  const Matrix t = projection_matrix(grid.basis());
  std::vector<double> trow(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) trow[static_cast<std::size_t>(r) * n + c] = t(r, c);

  const Vector local = grid.maps().scatter(field);
  SpectralErrorReport rep;
  std::vector<double> a(nloc), b(nloc);
  for (int e = 0; e < grid.num_elements(); ++e) {
    Fit total;
    total.resolved = true;
    for (int c = 0; c < ncomp; ++c) {
      const double* ue = local.data() + (static_cast<std::size_t>(e) * ncomp + c) * nloc;
      std::copy(ue, ue + nloc, a.begin());
      for (int axis = 0; axis < dim; ++axis) {
        tensor::apply_axis<false>(trow.data(), n, dim, axis, a.data(), b.data());
        std::swap(a, b);
      }
      std::vector<double> spectrum(n, 0.0);
      for (int l = 0; l < nloc; ++l) {
        int k = 0;
        int rest = l;
        for (int axis = 0; axis < dim; ++axis) {
          k = std::max(k, rest % n);
          rest /= n;
        }
        spectrum[k] = std::max(spectrum[k], std::abs(a[l]));
      }
      const Fit f = fit_spectrum(spectrum, N);
      total.error += f.error;
      if (f.leading >= total.leading) {
        total.leading = f.leading;
        total.scale = f.scale;
        total.decay = f.decay;
      }
      total.under_resolved = total.under_resolved || f.under_resolved;
      total.resolved = total.resolved && f.resolved;
    }
    rep.error.push_back(total.error);
    rep.leading_coefficient.push_back(total.leading);
    rep.scale.push_back(total.scale);
    rep.decay.push_back(total.decay);
    rep.under_resolved.push_back(total.under_resolved);
    rep.resolved.push_back(total.resolved);
    rep.max_error = std::max(rep.max_error, total.error);
  }
  return rep;
}

}  // namespace semopt
