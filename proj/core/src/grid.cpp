#include "semopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semopt/error.hpp"

namespace semopt {

const char* to_string(Boundary bc) {
  return bc == Boundary::Periodic ? "periodic" : "dirichlet0";
}

GatherScatter::GatherScatter(std::vector<Index> local_to_global, int num_elements, int nloc,
                             Index nscalar, int ncomp)
    : num_elements_(num_elements),
      nloc_(nloc),
      ncomp_(ncomp),
      nscalar_(nscalar),
      l2g_(std::move(local_to_global)) {
  std::vector<Index> counts(static_cast<std::size_t>(nscalar), 0);
  for (const Index g : l2g_) ++counts[g];
  inv_offsets_.assign(static_cast<std::size_t>(nscalar) + 1, 0);
  for (Index g = 0; g < nscalar; ++g) inv_offsets_[g + 1] = inv_offsets_[g] + counts[g];
  inv_entries_.resize(l2g_.size());
  std::vector<Index> fill(inv_offsets_.begin(), inv_offsets_.end() - 1);
  // Entries hold the offset of component 0 in the local vector.
  for (std::size_t k = 0; k < l2g_.size(); ++k) {
    const Index e = static_cast<Index>(k) / nloc_;
    const Index l = static_cast<Index>(k) - e * nloc_;
    inv_entries_[fill[l2g_[k]]++] = e * ncomp_ * nloc_ + l;
  }

  multiplicity_.resize(nglobal());
  for (int c = 0; c < ncomp_; ++c) {
    for (Index g = 0; g < nscalar; ++g) {
      multiplicity_[c * nscalar + g] = static_cast<double>(counts[g]);
    }
  }
}

void GatherScatter::scatter(const Vector& global, std::span<double> local) const {
  require(global.size() == nglobal(), "scatter: global vector has wrong size");
  require(static_cast<Index>(local.size()) == local_size(), "scatter: local buffer has wrong size");
#pragma omp parallel for schedule(static) if (num_elements_ >= 16)
  for (int e = 0; e < num_elements_; ++e) {
    const Index* nodes = l2g_.data() + static_cast<std::size_t>(e) * nloc_;
    for (int c = 0; c < ncomp_; ++c) {
      double* out = local.data() + (static_cast<std::size_t>(e) * ncomp_ + c) * nloc_;
      const double* in = global.data() + c * nscalar_;
      for (int l = 0; l < nloc_; ++l) out[l] = in[nodes[l]];
    }
  }
}

Vector GatherScatter::scatter(const Vector& global) const {
  Vector local(local_size());
  scatter(global, {local.data(), static_cast<std::size_t>(local.size())});
  return local;
}

void GatherScatter::gather(std::span<const double> local, Vector& global) const {
  require(static_cast<Index>(local.size()) == local_size(), "gather: local buffer has wrong size");
  global.resize(nglobal());
  for (int c = 0; c < ncomp_; ++c) {
    double* out = global.data() + c * nscalar_;
    const double* in = local.data() + static_cast<std::size_t>(c) * nloc_;
#pragma omp parallel for schedule(static) if (nscalar_ >= 4096)
    for (Index g = 0; g < nscalar_; ++g) {
      double sum = 0.0;
      for (Index k = inv_offsets_[g]; k < inv_offsets_[g + 1]; ++k) sum += in[inv_entries_[k]];
      out[g] = sum;
    }
  }
}

Vector GatherScatter::gather(std::span<const double> local) const {
  Vector global;
  gather(local, global);
  return global;
}

std::shared_ptr<const Grid> Grid::build(const GridSpec& spec) {
  const int dim = static_cast<int>(spec.axes.size());
  require(dim == 1 || dim == 3, "grid dimension must be 1 or 3, got " + std::to_string(dim));
  require(spec.degree >= 1, "polynomial degree must be >= 1");
  for (const Axis& ax : spec.axes) {
    require(ax.elements >= 1, "every axis needs at least one element");
    require(ax.x_b > ax.x_a, "axis extent must satisfy x_b > x_a");
    if (ax.bc == Boundary::Periodic) {
      require(ax.elements * spec.degree >= 2,
              "periodic axis needs E*N >= 2 (a single wrapped node is degenerate)");
    }
    if (dim == 3 && ax.bc != Boundary::Periodic) {
      fail(ErrorKind::UnsupportedConfiguration, "3D grids require periodic boundaries on all axes");
    }
  }

  auto grid = std::shared_ptr<Grid>(new Grid());
  grid->spec_ = spec;
  grid->ncomp_ = dim == 3 ? 3 : 1;
  grid->basis_ = gll_rule(spec.degree);

  const int n1 = spec.degree + 1;
  int nloc = 1;
  int num_elements = 1;
  Index nscalar = 1;
  std::vector<int> nodes_per_axis(dim);
  for (int a = 0; a < dim; ++a) {
    nloc *= n1;
    num_elements *= spec.axes[a].elements;
    nodes_per_axis[a] = spec.axes[a].global_nodes(spec.degree);
    nscalar *= nodes_per_axis[a];
  }

  std::vector<Index> l2g(static_cast<std::size_t>(num_elements) * nloc);
  for (int e = 0; e < num_elements; ++e) {
    const std::vector<int> ec = grid->element_coords(e);
    for (int l = 0; l < nloc; ++l) {
      Index g = 0;
      Index stride = 1;
      int rem = l;
      for (int a = 0; a < dim; ++a) {
        const int la = rem % n1;
        rem /= n1;
        int ga = ec[a] * spec.degree + la;
        if (spec.axes[a].bc == Boundary::Periodic) ga %= nodes_per_axis[a];
        g += ga * stride;
        stride *= nodes_per_axis[a];
      }
      l2g[static_cast<std::size_t>(e) * nloc + l] = g;
    }
  }
  grid->maps_ = GatherScatter(std::move(l2g), num_elements, nloc, nscalar, grid->ncomp_);

  // Element weights: tensor product of (L_a / 2) * rho.
  Vector w = Vector::Ones(nloc);
  for (int l = 0; l < nloc; ++l) {
    int rem = l;
    for (int a = 0; a < dim; ++a) {
      const int la = rem % n1;
      rem /= n1;
      w[l] *= 0.5 * spec.axes[a].element_length() * grid->basis_.weights[la];
    }
  }
  grid->element_weights_ = w;

  Vector local(grid->maps_.local_size());
  for (int e = 0; e < num_elements; ++e) {
    for (int c = 0; c < grid->ncomp_; ++c) {
      local.segment((static_cast<Index>(e) * grid->ncomp_ + c) * nloc, nloc) = w;
    }
  }
  grid->mass_ = grid->maps_.gather(local);

  for (Index g = 0; g < nscalar; ++g) {
    Index rem = g;
    bool on_boundary = false;
    for (int a = 0; a < dim; ++a) {
      const Index ga = rem % nodes_per_axis[a];
      rem /= nodes_per_axis[a];
      if (spec.axes[a].bc == Boundary::Dirichlet0 && (ga == 0 || ga == nodes_per_axis[a] - 1)) {
        on_boundary = true;
      }
    }
    if (on_boundary) grid->boundary_.push_back(g);
  }
  return grid;
}

void Grid::mask(Vector& global) const {
  for (int c = 0; c < ncomp_; ++c) {
    for (const Index g : boundary_) global[c * nscalar() + g] = 0.0;
  }
}

std::vector<int> Grid::element_coords(int e) const {
  std::vector<int> ec(dim());
  for (int a = 0; a < dim(); ++a) {
    ec[a] = e % spec_.axes[a].elements;
    e /= spec_.axes[a].elements;
  }
  return ec;
}

std::vector<double> axis_coordinates(const Grid& grid, int a) {
  const Axis& ax = grid.axis(a);
  const int n = grid.degree();
  const double h = ax.element_length();
  std::vector<double> x(grid.global_nodes(a));
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    const int e = std::min(i / n, ax.elements - 1);
    const int l = i - e * n;
    // x = a + (b - a)(r + 1)/2 on element [a, b]
    const double left = ax.x_a + e * h;
    x[i] = left + h * (grid.basis().nodes[l] + 1.0) / 2.0;
  }
  return x;
}

Matrix node_coordinates(const Grid& grid) {
  const int dim = grid.dim();
  std::vector<std::vector<double>> per_axis(dim);
  for (int a = 0; a < dim; ++a) per_axis[a] = axis_coordinates(grid, a);
  Matrix xyz(grid.nscalar(), dim);
  for (Index g = 0; g < grid.nscalar(); ++g) {
    Index rem = g;
    for (int a = 0; a < dim; ++a) {
      const auto na = static_cast<Index>(per_axis[a].size());
      xyz(g, a) = per_axis[a][rem % na];
      rem /= na;
    }
  }
  return xyz;
}

double l2_norm(const Grid& grid, const Vector& v) {
  require(v.size() == grid.nglobal(), "l2_norm: vector has wrong size");
  return std::sqrt(v.cwiseProduct(grid.mass()).dot(v));
}

}  // namespace semopt
