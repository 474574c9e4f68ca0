#pragma once

#include <memory>
#include <utility>

#include "semopt/types.hpp"

namespace semopt {

/// State-dependent data captured once so that repeated Jacobian products at
/// the same state do not recompute it.
class Linearization {
 public:
  virtual ~Linearization() = default;
};

/// Autonomous system du/dt = f(u) with matrix-free Jacobian products.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual Index size() const = 0;
  virtual Vector rhs(const Vector& u) const = 0;
  virtual std::unique_ptr<const Linearization> linearize(const Vector& u) const = 0;
  virtual Vector jacobian(const Linearization& lin, const Vector& w) const = 0;
  virtual Vector jacobian_transpose(const Linearization& lin, const Vector& z) const = 0;

  /// f(u) and the linearization at u in one pass. Implementations override
  /// this when the two share work.
  virtual std::pair<Vector, std::unique_ptr<const Linearization>> rhs_and_linearize(
      const Vector& u) const {
    return {rhs(u), linearize(u)};
  }

  /// Projects a state-space vector onto the admissible subspace (for example
  /// zeroing pinned boundary entries). Identity by default.
  virtual void project(Vector& v) const { (void)v; }

  Vector jacobian(const Vector& u, const Vector& w) const { return jacobian(*linearize(u), w); }
  Vector jacobian_transpose(const Vector& u, const Vector& z) const {
    return jacobian_transpose(*linearize(u), z);
  }
};

/// f(u) = A u for a dense A. Used for scalar surrogates and dense oracles.
class LinearOdeSystem final : public OdeSystem {
 public:
  explicit LinearOdeSystem(Matrix a);

  using OdeSystem::jacobian;
  using OdeSystem::jacobian_transpose;

  const Matrix& matrix() const { return a_; }
  Index size() const override { return a_.rows(); }
  Vector rhs(const Vector& u) const override;
  std::unique_ptr<const Linearization> linearize(const Vector& u) const override;
  Vector jacobian(const Linearization& lin, const Vector& w) const override;
  Vector jacobian_transpose(const Linearization& lin, const Vector& z) const override;

 private:
  Matrix a_;
};

/// Forwards to another system and counts every call.
class CountingSystem final : public OdeSystem {
 public:
  struct Counts {
    long rhs = 0;
    long linearize = 0;
    long jacobian = 0;
    long jacobian_transpose = 0;
  };

  explicit CountingSystem(const OdeSystem& inner) : inner_(inner) {}

  using OdeSystem::jacobian;
  using OdeSystem::jacobian_transpose;

  const Counts& counts() const { return counts_; }
  void reset() { counts_ = {}; }

  Index size() const override { return inner_.size(); }
  Vector rhs(const Vector& u) const override {
    ++counts_.rhs;
    return inner_.rhs(u);
  }
  std::unique_ptr<const Linearization> linearize(const Vector& u) const override {
    ++counts_.linearize;
    return inner_.linearize(u);
  }
  std::pair<Vector, std::unique_ptr<const Linearization>> rhs_and_linearize(
      const Vector& u) const override {
    ++counts_.rhs;
    ++counts_.linearize;
    return inner_.rhs_and_linearize(u);
  }
  Vector jacobian(const Linearization& lin, const Vector& w) const override {
    ++counts_.jacobian;
    return inner_.jacobian(lin, w);
  }
  Vector jacobian_transpose(const Linearization& lin, const Vector& z) const override {
    ++counts_.jacobian_transpose;
    return inner_.jacobian_transpose(lin, z);
  }
  void project(Vector& v) const override { inner_.project(v); }

 private:
  const OdeSystem& inner_;
  mutable Counts counts_;
};

}  // namespace semopt
