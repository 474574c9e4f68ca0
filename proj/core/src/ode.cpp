#include "semopt/ode.hpp"

#include "semopt/error.hpp"

namespace semopt {

LinearOdeSystem::LinearOdeSystem(Matrix a) : a_(std::move(a)) {
  require(a_.rows() == a_.cols(), "LinearOdeSystem needs a square matrix");
}

Vector LinearOdeSystem::rhs(const Vector& u) const {
  require(u.size() == size(), "LinearOdeSystem: state has wrong size");
  return a_ * u;
}

std::unique_ptr<const Linearization> LinearOdeSystem::linearize(const Vector& u) const {
  require(u.size() == size(), "LinearOdeSystem: state has wrong size");
  return std::make_unique<const Linearization>();
}

Vector LinearOdeSystem::jacobian(const Linearization&, const Vector& w) const {
  require(w.size() == size(), "LinearOdeSystem: direction has wrong size");
  return a_ * w;
}

Vector LinearOdeSystem::jacobian_transpose(const Linearization&, const Vector& z) const {
  require(z.size() == size(), "LinearOdeSystem: adjoint vector has wrong size");
  return a_.transpose() * z;
}

}  // namespace semopt
