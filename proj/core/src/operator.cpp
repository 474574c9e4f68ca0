#include "semopt/operator.hpp"

#include <algorithm>
#include <mutex>

#include "semopt/error.hpp"
#include "semopt/tensor.hpp"

namespace semopt {

const char* to_string(Advection a) {
  switch (a) {
    case Advection::Burgers: return "burgers";
    case Advection::Linear: return "linear";
    case Advection::None: return "none";
  }
  return "?";
}

struct SemOperator::Scratch {
  explicit Scratch(const SemOperator& op)
      : grad(static_cast<std::size_t>(op.ncomp_) * op.dim_ * op.nloc_),
        t(op.nloc_),
        tmp(op.nloc_) {}
  std::vector<double> grad;
  std::vector<double> t;
  std::vector<double> tmp;
};

/// Recycles the large buffers of released linearizations.
struct SemOperator::BufferPool {
  std::mutex mutex;
  std::vector<std::vector<double>> free;

  std::vector<double> take(std::size_t n) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      for (auto it = free.begin(); it != free.end(); ++it) {
        if (it->capacity() >= n) {
          std::vector<double> v = std::move(*it);
          free.erase(it);
          v.resize(n);
          return v;
        }
      }
    }
    return std::vector<double>(n);
  }

  void give(std::vector<double>&& v) {
    if (v.capacity() == 0) return;
    std::lock_guard<std::mutex> lock(mutex);
    if (free.size() < 16) free.push_back(std::move(v));
  }
};

/// Scattered state and its element gradients D_j u_i, laid out per element as
/// grad[((e * ncomp + i) * dim + j) * nloc + l].
class SemOperator::State final : public Linearization {
 public:
  ~State() override {
    if (pool) {
      pool->give(std::move(u_local));
      pool->give(std::move(grad));
    }
  }

  const SemOperator* owner = nullptr;
  std::shared_ptr<BufferPool> pool;
  std::vector<double> u_local;
  std::vector<double> grad;
};

SemOperator::SemOperator(std::shared_ptr<const Grid> grid, PdeCoefficients coef)
    : grid_(std::move(grid)), coef_(coef), pool_(std::make_shared<BufferPool>()) {
  require(grid_ != nullptr, "SemOperator needs a grid");
  require(coef_.nu >= 0.0, "viscosity must be non-negative");
  n1_ = grid_->basis().size();
  dim_ = grid_->dim();
  ncomp_ = grid_->ncomp();
  nloc_ = grid_->nloc();
  require(ncomp_ == 1 || ncomp_ == dim_, "unsupported component count");
  const Matrix& dref = grid_->basis().diff;
  for (int j = 0; j < dim_; ++j) {
    const double scale = 2.0 / grid_->axis(j).element_length();
    std::vector<double> d(static_cast<std::size_t>(n1_) * n1_);
    std::vector<double> dt(d.size());
    for (int r = 0; r < n1_; ++r) {
      for (int c = 0; c < n1_; ++c) {
        d[static_cast<std::size_t>(r) * n1_ + c] = scale * dref(r, c);
        dt[static_cast<std::size_t>(c) * n1_ + r] = scale * dref(r, c);
      }
    }
    diff_.push_back(std::move(d));
    diff_t_.push_back(std::move(dt));
  }
  const Vector& w = grid_->element_weights();
  weights_.assign(w.data(), w.data() + w.size());
  inv_mass_ = grid_->mass().cwiseInverse();
}

std::size_t SemOperator::largest_dense_block() const {
  return static_cast<std::size_t>(n1_) * n1_;
}

void SemOperator::check_input(const Vector& v, const char* what) const {
  if (v.size() != size()) fail(ErrorKind::InvalidArgument, std::string(what) + " has wrong size");
  if (!v.allFinite()) fail(ErrorKind::NumericFailure, std::string(what) + " is not finite");
}

void SemOperator::gradients(const double* ue, double* grad) const {
  for (int i = 0; i < ncomp_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      tensor::apply_axis<false>(diff_[j].data(), n1_, dim_, j, ue + i * nloc_,
                                grad + (i * dim_ + j) * nloc_);
    }
  }
}

void SemOperator::rhs_kernel(const double* ue, double* grad, double* out, Scratch& s) const {
  gradients(ue, grad);
  const double* w = weights_.data();
  const double nu = coef_.nu;
  const Advection adv = coef_.advection;
  const int nloc = nloc_;
  double* t = s.t.data();
  for (int i = 0; i < ncomp_; ++i) {
    double* oi = out + i * nloc;
    std::fill(oi, oi + nloc, 0.0);
    if (nu != 0.0) {
      for (int j = 0; j < dim_; ++j) {
        const double* g = grad + (i * dim_ + j) * nloc;
        for (int l = 0; l < nloc; ++l) t[l] = nu * w[l] * g[l];
        tensor::apply_axis<true>(diff_t_[j].data(), n1_, dim_, j, t, oi);
      }
    }
    if (adv == Advection::Burgers) {
      for (int j = 0; j < dim_; ++j) {
        const double* g = grad + (i * dim_ + j) * nloc;
        const double* uj = ue + j * nloc;
        for (int l = 0; l < nloc; ++l) oi[l] += w[l] * uj[l] * g[l];
      }
    } else if (adv == Advection::Linear) {
      for (int j = 0; j < dim_; ++j) {
        const double a = coef_.velocity[j];
        const double* g = grad + (i * dim_ + j) * nloc;
        for (int l = 0; l < nloc; ++l) oi[l] += a * w[l] * g[l];
      }
    }
    for (int l = 0; l < nloc; ++l) oi[l] = -oi[l];
  }
}

void SemOperator::jacobian_kernel(const double* ue, const double* grad, const double* we,
                                  double* out, Scratch& s) const {
  double* sg = s.grad.data();
  gradients(we, sg);
  const double* w = weights_.data();
  for (int i = 0; i < ncomp_; ++i) {
    double* oi = out + i * nloc_;
    std::fill(oi, oi + nloc_, 0.0);
    if (coef_.nu != 0.0) {
      for (int j = 0; j < dim_; ++j) {
        const double* g = sg + (i * dim_ + j) * nloc_;
        for (int l = 0; l < nloc_; ++l) s.t[l] = w[l] * g[l];
        tensor::apply_axis<true>(diff_t_[j].data(), n1_, dim_, j, s.t.data(), oi);
      }
      for (int l = 0; l < nloc_; ++l) oi[l] *= -coef_.nu;
    }
    if (coef_.advection == Advection::Burgers) {
      for (int j = 0; j < dim_; ++j) {
        const double* gu = grad + (i * dim_ + j) * nloc_;
        const double* gw = sg + (i * dim_ + j) * nloc_;
        const double* uj = ue + j * nloc_;
        const double* wj = we + j * nloc_;
        for (int l = 0; l < nloc_; ++l) oi[l] -= w[l] * (wj[l] * gu[l] + uj[l] * gw[l]);
      }
    } else if (coef_.advection == Advection::Linear) {
      for (int j = 0; j < dim_; ++j) {
        const double a = coef_.velocity[j];
        const double* g = sg + (i * dim_ + j) * nloc_;
        for (int l = 0; l < nloc_; ++l) oi[l] -= a * w[l] * g[l];
      }
    }
  }
}

void SemOperator::transpose_kernel(const double* ue, const double* grad, const double* ze,
                                   double* out, Scratch& s) const {
  const double* w = weights_.data();
  const double nu = coef_.nu;
  const bool diffusive = nu != 0.0;
  const Advection adv = coef_.advection;
  const int nloc = nloc_;
  double* t = s.t.data();
  double* tmp = s.tmp.data();
  for (int i = 0; i < ncomp_; ++i) {
    double* oi = out + i * nloc;
    const double* zi = ze + i * nloc;
    std::fill(oi, oi + nloc, 0.0);
    for (int j = 0; j < dim_; ++j) {
      if (diffusive) tensor::apply_axis<false>(diff_[j].data(), n1_, dim_, j, zi, tmp);
      if (adv == Advection::Burgers) {
        const double* uj = ue + j * nloc;
        if (diffusive) {
          for (int l = 0; l < nloc; ++l) t[l] = w[l] * (nu * tmp[l] + uj[l] * zi[l]);
        } else {
          for (int l = 0; l < nloc; ++l) t[l] = w[l] * uj[l] * zi[l];
        }
      } else if (adv == Advection::Linear) {
        const double a = coef_.velocity[j];
        if (diffusive) {
          for (int l = 0; l < nloc; ++l) t[l] = w[l] * (nu * tmp[l] + a * zi[l]);
        } else {
          for (int l = 0; l < nloc; ++l) t[l] = a * w[l] * zi[l];
        }
      } else if (diffusive) {
        for (int l = 0; l < nloc; ++l) t[l] = nu * w[l] * tmp[l];
      } else {
        continue;
      }
      tensor::apply_axis<true>(diff_t_[j].data(), n1_, dim_, j, t, oi);
    }
    if (adv == Advection::Burgers) {
      // Output component i collects z_m o D_i u_m over all components m.
      for (int m = 0; m < ncomp_; ++m) {
        const double* zm = ze + m * nloc;
        const double* g = grad + (m * dim_ + i) * nloc;
        for (int l = 0; l < nloc; ++l) oi[l] += w[l] * zm[l] * g[l];
      }
    }
    for (int l = 0; l < nloc; ++l) oi[l] = -oi[l];
  }
}

Vector SemOperator::finish(const std::vector<double>& local) const {
  Vector out = grid_->maps().gather(local);
  out.array() *= inv_mass_.array();
  grid_->mask(out);
  return out;
}

namespace {

void scatter_masked(const Grid& grid, const Vector& v, std::vector<double>& local) {
  if (grid.has_dirichlet()) {
    Vector masked = v;
    grid.mask(masked);
    grid.maps().scatter(masked, local);
  } else {
    grid.maps().scatter(v, local);
  }
}

std::vector<double> scatter_masked(const Grid& grid, const Vector& v) {
  std::vector<double> local(static_cast<std::size_t>(grid.maps().local_size()));
  scatter_masked(grid, v, local);
  return local;
}

}  // namespace

Vector SemOperator::rhs(const Vector& u) const {
  check_input(u, "state");
  const std::vector<double> ul = scatter_masked(*grid_, u);
  std::vector<double> out(ul.size());
  const int nelem = grid_->num_elements();
  const std::size_t block = static_cast<std::size_t>(ncomp_) * nloc_;
#pragma omp parallel
  {
    Scratch s(*this);
    std::vector<double> grad(s.grad.size());
#pragma omp for schedule(static)
    for (int e = 0; e < nelem; ++e) {
      rhs_kernel(ul.data() + e * block, grad.data(), out.data() + e * block, s);
    }
  }
  return finish(out);
}

std::pair<Vector, std::unique_ptr<const Linearization>> SemOperator::rhs_and_linearize(
    const Vector& u) const {
  check_input(u, "state");
  auto state = std::make_unique<State>();
  state->owner = this;
  state->pool = pool_;
  state->u_local = pool_->take(static_cast<std::size_t>(grid_->maps().local_size()));
  scatter_masked(*grid_, u, state->u_local);
  std::vector<double> out(state->u_local.size());
  const int nelem = grid_->num_elements();
  const std::size_t block = static_cast<std::size_t>(ncomp_) * nloc_;
  const std::size_t gblock = block * dim_;
  state->grad = pool_->take(gblock * nelem);
#pragma omp parallel
  {
    Scratch s(*this);
#pragma omp for schedule(static)
    for (int e = 0; e < nelem; ++e) {
      rhs_kernel(state->u_local.data() + e * block, state->grad.data() + e * gblock,
                 out.data() + e * block, s);
    }
  }
  return {finish(out), std::move(state)};
}

std::unique_ptr<const Linearization> SemOperator::linearize(const Vector& u) const {
  check_input(u, "state");
  auto state = std::make_unique<State>();
  state->owner = this;
  if (coef_.advection != Advection::Burgers) return state;
  state->pool = pool_;
  state->u_local = pool_->take(static_cast<std::size_t>(grid_->maps().local_size()));
  scatter_masked(*grid_, u, state->u_local);
  const int nelem = grid_->num_elements();
  const std::size_t block = static_cast<std::size_t>(ncomp_) * nloc_;
  const std::size_t gblock = block * dim_;
  state->grad = pool_->take(gblock * nelem);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < nelem; ++e) {
    gradients(state->u_local.data() + e * block, state->grad.data() + e * gblock);
  }
  return state;
}

const SemOperator::State& SemOperator::state_of(const Linearization& lin) const {
  const auto* state = dynamic_cast<const State*>(&lin);
  if (state == nullptr || state->owner != this) {
    fail(ErrorKind::InvalidArgument, "linearization was not produced by this operator");
  }
  if (coef_.advection == Advection::Burgers && state->grad.empty()) {
    fail(ErrorKind::InvalidArgument, "linearization carries no state");
  }
  return *state;
}

Vector SemOperator::jacobian(const Linearization& lin, const Vector& w) const {
  const State& state = state_of(lin);
  check_input(w, "direction");
  const std::vector<double> wl = scatter_masked(*grid_, w);
  std::vector<double> out(wl.size());
  const int nelem = grid_->num_elements();
  const std::size_t block = static_cast<std::size_t>(ncomp_) * nloc_;
  const std::size_t gblock = block * dim_;
  const bool nonlinear = coef_.advection == Advection::Burgers;
#pragma omp parallel
  {
    Scratch s(*this);
#pragma omp for schedule(static)
    for (int e = 0; e < nelem; ++e) {
      const double* ue = nonlinear ? state.u_local.data() + e * block : nullptr;
      const double* ge = nonlinear ? state.grad.data() + e * gblock : nullptr;
      jacobian_kernel(ue, ge, wl.data() + e * block, out.data() + e * block, s);
    }
  }
  return finish(out);
}

Vector SemOperator::jacobian_transpose(const Linearization& lin, const Vector& z) const {
  const State& state = state_of(lin);
  check_input(z, "adjoint vector");
  Vector zm = z.cwiseProduct(inv_mass_);
  const std::vector<double> zl = scatter_masked(*grid_, zm);
  std::vector<double> out(zl.size());
  const int nelem = grid_->num_elements();
  const std::size_t block = static_cast<std::size_t>(ncomp_) * nloc_;
  const std::size_t gblock = block * dim_;
  const bool nonlinear = coef_.advection == Advection::Burgers;
#pragma omp parallel
  {
    Scratch s(*this);
#pragma omp for schedule(static)
    for (int e = 0; e < nelem; ++e) {
      const double* ue = nonlinear ? state.u_local.data() + e * block : nullptr;
      const double* ge = nonlinear ? state.grad.data() + e * gblock : nullptr;
      transpose_kernel(ue, ge, zl.data() + e * block, out.data() + e * block, s);
    }
  }
  Vector result = grid_->maps().gather(out);
  grid_->mask(result);
  return result;
}

void SemOperator::element_rhs(const double* u_elem, double* out_elem) const {
  Scratch s(*this);
  std::vector<double> grad(s.grad.size());
  rhs_kernel(u_elem, grad.data(), out_elem, s);
}

void SemOperator::element_jacobian_transpose(const double* u_elem, const double* z_elem,
                                             double* out_elem) const {
  Scratch s(*this);
  std::vector<double> grad(s.grad.size());
  gradients(u_elem, grad.data());
  transpose_kernel(u_elem, grad.data(), z_elem, out_elem, s);
}

Matrix densify(const OdeSystem& system, const Vector& u) {
  const Index n = system.size();
  if (n > 5000) fail(ErrorKind::InvalidArgument, "densify refused: more than 5000 unknowns");
  const auto lin = system.linearize(u);
  Matrix dense(n, n);
  Vector e = Vector::Zero(n);
  for (Index k = 0; k < n; ++k) {
    e[k] = 1.0;
    dense.col(k) = system.jacobian(*lin, e);
    e[k] = 0.0;
  }
  return dense;
}

}  // namespace semopt
