#pragma once

#include <memory>
#include <span>
#include <vector>

#include "semopt/basis.hpp"
#include "semopt/types.hpp"

namespace semopt {

enum class Boundary { Periodic, Dirichlet0 };

const char* to_string(Boundary bc);

/// One direction of a uniform tensor-product mesh.
struct Axis {
  double x_a = 0.0;
  double x_b = 1.0;
  int elements = 1;
  Boundary bc = Boundary::Periodic;

  double element_length() const { return (x_b - x_a) / elements; }
  /// E*N for periodic axes, E*N + 1 otherwise.
  int global_nodes(int degree) const {
    return bc == Boundary::Periodic ? elements * degree : elements * degree + 1;
  }
};

struct GridSpec {
  std::vector<Axis> axes;
  int degree = 1;
};

/// Local <-> global maps for continuous Galerkin assembly.
///
/// Element-local storage is laid out element by element, then component by
/// component, then tensor index with axis 0 fastest:
/// `local[(e * ncomp + c) * nloc + l]`. Global vectors are component-major.
/// Gather sums the contributing local copies of each global node in a fixed
/// (element, local index) order, so the result does not depend on how the
/// work is split across threads.
class GatherScatter {
 public:
  GatherScatter() = default;
  GatherScatter(std::vector<Index> local_to_global, int num_elements, int nloc, Index nscalar,
                int ncomp);

  int num_elements() const { return num_elements_; }
  int nloc() const { return nloc_; }
  int ncomp() const { return ncomp_; }
  Index nscalar() const { return nscalar_; }
  Index nglobal() const { return nscalar_ * ncomp_; }
  Index local_size() const { return static_cast<Index>(num_elements_) * ncomp_ * nloc_; }

  std::span<const Index> element_nodes(int e) const {
    return {l2g_.data() + static_cast<std::size_t>(e) * nloc_, static_cast<std::size_t>(nloc_)};
  }

  void scatter(const Vector& global, std::span<double> local) const;
  Vector scatter(const Vector& global) const;
  void gather(std::span<const double> local, Vector& global) const;
  Vector gather(std::span<const double> local) const;
  Vector gather(const Vector& local) const {
    return gather(std::span<const double>(local.data(), static_cast<std::size_t>(local.size())));
  }

  /// Number of element-local copies of every global entry (length nglobal).
  const Vector& multiplicity() const { return multiplicity_; }

 private:
  int num_elements_ = 0;
  int nloc_ = 0;
  int ncomp_ = 1;
  Index nscalar_ = 0;
  std::vector<Index> l2g_;
  // CSR inverse map: local copies (e * nloc + l) contributing to each scalar node.
  std::vector<Index> inv_offsets_;
  std::vector<Index> inv_entries_;
  Vector multiplicity_;
};

/// Uniform tensor-product spectral-element mesh in 1D (scalar unknown) or 3D
/// (three-component vector unknown, periodic on every axis).
class Grid {
 public:
  static std::shared_ptr<const Grid> build(const GridSpec& spec);
  static std::shared_ptr<const Grid> build(std::vector<Axis> axes, int degree) {
    return build(GridSpec{std::move(axes), degree});
  }

  const GridSpec& spec() const { return spec_; }
  int dim() const { return static_cast<int>(spec_.axes.size()); }
  int degree() const { return spec_.degree; }
  int ncomp() const { return ncomp_; }
  const Axis& axis(int a) const { return spec_.axes[a]; }
  int global_nodes(int a) const { return spec_.axes[a].global_nodes(spec_.degree); }
  int num_elements() const { return maps_.num_elements(); }
  int nloc() const { return maps_.nloc(); }
  Index nscalar() const { return maps_.nscalar(); }
  Index nglobal() const { return maps_.nglobal(); }

  const SpectralBasis1D& basis() const { return basis_; }
  const GatherScatter& maps() const { return maps_; }

  /// Assembled diagonal mass matrix, length nglobal, strictly positive.
  const Vector& mass() const { return mass_; }
  /// Element-local quadrature weights (identical for every element).
  const Vector& element_weights() const { return element_weights_; }

  /// Scalar global indices pinned by homogeneous Dirichlet conditions.
  const std::vector<Index>& boundary_nodes() const { return boundary_; }
  bool has_dirichlet() const { return !boundary_.empty(); }
  /// Zeroes every Dirichlet boundary entry (all components).
  void mask(Vector& global) const;

  /// Element multi-index (per-axis element numbers) of element e.
  std::vector<int> element_coords(int e) const;

 private:
  Grid() = default;

  GridSpec spec_;
  int ncomp_ = 1;
  SpectralBasis1D basis_;
  GatherScatter maps_;
  Vector mass_;
  Vector element_weights_;
  std::vector<Index> boundary_;
};

/// Node positions along one axis (length global_nodes(a)).
std::vector<double> axis_coordinates(const Grid& grid, int a);

/// Physical coordinates of every scalar global node, one row per node.
Matrix node_coordinates(const Grid& grid);

/// Discrete L2 norm sqrt(v^T M v) with the assembled mass matrix.
double l2_norm(const Grid& grid, const Vector& v);

}  // namespace semopt
