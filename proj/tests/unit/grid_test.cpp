#include <gtest/gtest.h>

#include <random>
#include <cstring>
#include <sstream>

#include "semopt/error.hpp"
#include "semopt/grid.hpp"
#include "semopt/snapshot.hpp"
#include "support.hpp"

using namespace semopt;

namespace {

std::shared_ptr<const Grid> line(double a, double b, int e, int n, Boundary bc) {
  return Grid::build({Axis{a, b, e, bc}}, n);
}

std::shared_ptr<const Grid> box(int e, int n) {
  std::vector<Axis> axes(3, Axis{-2.0, 2.0, e, Boundary::Periodic});
  return Grid::build(axes, n);
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

}  // namespace

TEST(GridBuild, PeriodicTwoByTwo) {
  auto g = line(0, 1, 2, 2, Boundary::Periodic);
  ASSERT_EQ(g->nglobal(), 4);
  const Vector& mult = g->maps().multiplicity();
  EXPECT_EQ(mult[0], 2);
  EXPECT_EQ(mult[1], 1);
  EXPECT_EQ(mult[2], 2);
  EXPECT_EQ(mult[3], 1);
}

TEST(GridBuild, SingleDirichletElement) {
  auto g = line(0, 1, 1, 4, Boundary::Dirichlet0);
  ASSERT_EQ(g->nglobal(), 5);
  for (Index i = 0; i < 5; ++i) EXPECT_EQ(g->maps().multiplicity()[i], 1);
  EXPECT_TRUE(g->has_dirichlet());
}

TEST(GridBuild, ThreeDimensionalCount) {
  auto g = box(2, 4);
  EXPECT_EQ(g->nglobal(), 1536);
  EXPECT_EQ(g->ncomp(), 3);
  EXPECT_EQ(g->nloc(), 125);
}

TEST(GridBuild, Rejections) {
  std::vector<Axis> axes(3, Axis{0, 1, 2, Boundary::Periodic});
  axes[1].bc = Boundary::Dirichlet0;
  EXPECT_EQ(kind_of([&] { Grid::build(axes, 3); }), ErrorKind::UnsupportedConfiguration);
  EXPECT_EQ(kind_of([] { line(0, 1, 1, 1, Boundary::Periodic); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { line(0, 1, 0, 3, Boundary::Periodic); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { line(0, 1, 2, 0, Boundary::Periodic); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { line(1, 0, 2, 2, Boundary::Periodic); }), ErrorKind::InvalidArgument);
}

TEST(GatherScatter, GatherOfScatteredOnesIsMultiplicity) {
  for (auto g : {line(0, 1, 3, 4, Boundary::Periodic), line(0, 1, 3, 4, Boundary::Dirichlet0), box(2, 3)}) {
    const Vector ones = Vector::Ones(g->nglobal());
    const Vector back = g->maps().gather(g->maps().scatter(ones));
    EXPECT_EQ((back - g->maps().multiplicity()).norm(), 0.0);
    EXPECT_GE(g->maps().multiplicity().minCoeff(), 1.0);
  }
}

TEST(GatherScatter, InteriorNodesHaveMultiplicityOne) {
  auto g = line(0, 1, 4, 5, Boundary::Dirichlet0);
  for (int e = 0; e < g->num_elements(); ++e) {
    auto nodes = g->maps().element_nodes(e);
    for (int l = 1; l < g->nloc() - 1; ++l) EXPECT_EQ(g->maps().multiplicity()[nodes[l]], 1);
  }
}

TEST(GatherScatter, AreAdjoint) {
  std::mt19937_64 rng(5);
  for (auto g : {line(-1, 2, 5, 3, Boundary::Periodic), line(0, 1, 4, 6, Boundary::Dirichlet0), box(2, 3)}) {
    for (int t = 0; t < 10; ++t) {
      const Vector gv = test::random_vector(g->nglobal(), rng);
      const Vector lv = test::random_vector(g->maps().local_size(), rng);
      const double lhs = g->maps().scatter(gv).dot(lv);
      const double rhs = gv.dot(g->maps().gather(lv));
      EXPECT_LE(std::abs(lhs - rhs), 1e-14 * gv.norm() * lv.norm() * 10);
    }
  }
}

TEST(GatherScatter, SizeMismatchIsRejected) {
  auto g = line(0, 1, 2, 3, Boundary::Periodic);
  EXPECT_EQ(kind_of([&] { g->maps().scatter(Vector::Zero(g->nglobal() + 1)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { g->maps().gather(Vector::Zero(3)); }), ErrorKind::InvalidArgument);
}

TEST(GridMask, IsAProjectionOntoInteriorNodes) {
  auto g = line(0, 1, 3, 3, Boundary::Dirichlet0);
  std::mt19937_64 rng(2);
  Vector v = test::random_vector(g->nglobal(), rng);
  g->mask(v);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[g->nglobal() - 1], 0.0);
  Vector w = v;
  g->mask(w);
  EXPECT_EQ((w - v).norm(), 0.0);
  EXPECT_NE(v[1], 0.0);
}

TEST(NodeCoordinates, Examples) {
  {
    auto g = line(-1, 1, 1, 2, Boundary::Dirichlet0);
    const Matrix x = node_coordinates(*g);
    EXPECT_NEAR(x(0, 0), -1.0, 1e-15);
    EXPECT_NEAR(x(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(x(2, 0), 1.0, 1e-15);
  }
  {
    auto g = line(0, 1, 2, 1, Boundary::Periodic);
    const Matrix x = node_coordinates(*g);
    ASSERT_EQ(x.rows(), 2);
    EXPECT_NEAR(x(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(x(1, 0), 0.5, 1e-15);
  }
  {
    auto g = line(-2, 2, 5, 8, Boundary::Periodic);
    const Matrix x = node_coordinates(*g);
    auto nodes = g->maps().element_nodes(0);
    EXPECT_NEAR(x(nodes[0], 0), -2.0, 1e-15);
    EXPECT_NEAR(x(nodes[8], 0), -1.2, 1e-14);
  }
}

TEST(GridMass, MatchesQuadratureOfBasisProducts) {
  // Global basis function i restricted to an element is the local cardinal
  // polynomial; integrate phi_i^2 with the element's own GLL rule.
  auto g = line(0.0, 3.0, 3, 4, Boundary::Periodic);
  const SpectralBasis1D& b = g->basis();
  const double half = 0.5 * g->axis(0).element_length();
  Vector expected = Vector::Zero(g->nglobal());
  for (int e = 0; e < g->num_elements(); ++e) {
    auto nodes = g->maps().element_nodes(e);
    for (int i = 0; i < b.size(); ++i) {
      double s = 0.0;
      for (int q = 0; q < b.size(); ++q) {
        const double phi = test::lagrange(b.nodes, i, b.nodes[q]);
        s += b.weights[q] * phi * phi;
      }
      expected[nodes[i]] += half * s;
    }
  }
  EXPECT_LE((g->mass() - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GT(g->mass().minCoeff(), 0.0);
  EXPECT_NEAR(g->mass().sum(), 3.0, 1e-13);
}

TEST(GridMass, ThreeDimensionalTotalsVolumePerComponent) {
  auto g = box(2, 3);
  EXPECT_NEAR(g->mass().sum(), 3 * 64.0, 1e-11);
}

TEST(GatherScatter, PeriodicShiftCommutesWithElementRelabeling) {
  auto g = line(0, 1, 4, 3, Boundary::Periodic);
  std::mt19937_64 rng(8);
  const Vector v = test::random_vector(g->nglobal(), rng);
  const Index n = g->nglobal();
  const int shift = g->degree();
  Vector shifted(n);
  for (Index i = 0; i < n; ++i) shifted[(i + shift) % n] = v[i];
  const Vector a = g->maps().scatter(v);
  const Vector b = g->maps().scatter(shifted);
  const int nloc = g->nloc();
  for (int e = 0; e < g->num_elements(); ++e) {
    const int src = (e + g->num_elements() - 1) % g->num_elements();
    for (int l = 0; l < nloc; ++l) EXPECT_EQ(b[e * nloc + l], a[src * nloc + l]);
  }
}

TEST(GridNorm, L2OfConstantIsSqrtVolume) {
  auto g = line(-2, 2, 5, 8, Boundary::Periodic);
  EXPECT_NEAR(l2_norm(*g, Vector::Ones(g->nglobal())), 2.0, 1e-13);
}

TEST(Snapshot, RoundTripsBitExactly) {
  std::mt19937_64 rng(4);
  for (auto g : {line(-2, 2, 5, 8, Boundary::Periodic), line(0.1, 0.7, 3, 4, Boundary::Dirichlet0), box(2, 2)}) {
    const Vector v = test::random_vector(g->nglobal(), rng);
    std::stringstream ss;
    write_snapshot(ss, *g, v);
    const Snapshot s = read_snapshot(ss);
    ASSERT_EQ(s.values.size(), v.size());
    EXPECT_EQ(std::memcmp(s.values.data(), v.data(), sizeof(double) * v.size()), 0);
    EXPECT_EQ(s.ncomp, g->ncomp());
    ASSERT_EQ(s.grid.axes.size(), g->spec().axes.size());
    EXPECT_EQ(s.grid.degree, g->degree());
    for (std::size_t a = 0; a < s.grid.axes.size(); ++a) {
      EXPECT_EQ(s.grid.axes[a].x_a, g->axis(a).x_a);
      EXPECT_EQ(s.grid.axes[a].x_b, g->axis(a).x_b);
      EXPECT_EQ(s.grid.axes[a].elements, g->axis(a).elements);
      EXPECT_EQ(s.grid.axes[a].bc, g->axis(a).bc);
    }
  }
}

TEST(Snapshot, MalformedInputIsAnIoError) {
  std::stringstream bad("semopt-field 1\ndim 2\n");
  EXPECT_EQ(kind_of([&] { read_snapshot(bad); }), ErrorKind::Io);
  auto g = line(0, 1, 2, 2, Boundary::Periodic);
  std::stringstream ss;
  write_snapshot(ss, *g, Vector::Ones(g->nglobal()));
  std::string text = ss.str();
  text.resize(text.size() - 4);
  std::stringstream cut(text);
  EXPECT_EQ(kind_of([&] { read_snapshot(cut); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([] { read_snapshot(std::string("/nonexistent/field.bin")); }), ErrorKind::Io);
}
