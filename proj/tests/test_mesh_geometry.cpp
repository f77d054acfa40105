/// @file test_mesh_geometry.cpp
/// @brief Disk-in-disk mesh construction, quadrature integrals against
///        closed-form polygon moments, and mesh file round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "swim/assembly.hpp"
#include "swim/error.hpp"
#include "swim/mesh.hpp"

using namespace swim;

namespace {

// Area of the regular m-gon inscribed in a circle of radius r.
double polygon_area(int m, double r) {
  return 0.5 * m * r * r * std::sin(2.0 * M_PI / m);
}

// Second moment ∫ |y|^2 dy over the same polygon (fan decomposition).
double polygon_moment2(int m, double r) {
  const double c = std::cos(2.0 * M_PI / m);
  return polygon_area(m, r) * r * r * (2.0 + c) / 6.0;
}

}  // namespace

TEST_CASE("region areas match inscribed-polygon values exactly") {
  const double a = 0.5, b = 2.0;
  const Mesh mesh = build_disk_in_disk_mesh(a, b, 4);
  const int m_solid = 6 * 4;
  const int m_outer = 6 * (4 + 12);  // dr = 0.125 continues through the annulus

  const double solid_area =
      integrate_region(mesh, Region::Solid, [](const Vec2&) { return 1.0; });
  const double fluid_area =
      integrate_region(mesh, Region::Fluid, [](const Vec2&) { return 1.0; });
  CHECK(solid_area == doctest::Approx(polygon_area(m_solid, a)).epsilon(1e-13));
  CHECK(fluid_area == doctest::Approx(polygon_area(m_outer, b) -
                                      polygon_area(m_solid, a))
                          .epsilon(1e-13));

  const double moment = integrate_region(
      mesh, Region::Solid, [](const Vec2& y) { return y.squaredNorm(); });
  CHECK(moment == doctest::Approx(polygon_moment2(m_solid, a)).epsilon(1e-13));

  const Vec2 bary = integrate_region_vec(mesh, Region::Solid,
                                         [](const Vec2& y) { return y; });
  CHECK(bary.norm() < 1e-14);
}

TEST_CASE("areas converge to the disk values at second order") {
  const double a = 0.5, b = 2.0;
  double prev_err = 0.0;
  for (int rings : {2, 4, 8}) {
    const Mesh mesh = build_disk_in_disk_mesh(a, b, rings);
    const double area =
        integrate_region(mesh, Region::Solid, [](const Vec2&) { return 1.0; });
    const double err = std::abs(area - M_PI * a * a);
    if (prev_err > 0.0) CHECK(prev_err / err > 3.5);
    prev_err = err;
  }
}

TEST_CASE("boundary integrals: orientation, closure, divergence theorem") {
  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 4);

  // Closed polygon: ∮ n dΓ = 0 exactly.
  for (BoundaryTag tag : {BoundaryTag::SolidBoundary, BoundaryTag::OuterBoundary}) {
    Vec2 total = Vec2::Zero();
    for (int k = 0; k < 2; ++k) {
      total[k] += integrate_boundary(
          mesh, tag, [&](const Vec2&, const Vec2& n) { return n[k]; });
    }
    CHECK(total.norm() < 1e-13);
  }

  // ∮ y·n dΓ = 2 |polygon| with the outward-from-center normal.
  const double flux = integrate_boundary_dot_n(
      mesh, BoundaryTag::SolidBoundary, [](const Vec2& y) { return y; });
  const double solid_area =
      integrate_region(mesh, Region::Solid, [](const Vec2&) { return 1.0; });
  CHECK(flux == doctest::Approx(2.0 * solid_area).epsilon(1e-13));

  // Divergence theorem on the fluid region for a quadratic field
  // (quadrature exact on both sides): ∫ div v = ∮_out v·n - ∮_in v·n.
  auto v = [](const Vec2& x) {
    return Vec2(x[0] * x[0] + 2.0 * x[1], x[0] * x[1] - x[1]);
  };
  auto div_v = [](const Vec2& x) { return 2.0 * x[0] + x[0] - 1.0; };
  const double lhs = integrate_region(mesh, Region::Fluid, div_v);
  const double rhs =
      integrate_boundary_dot_n(mesh, BoundaryTag::OuterBoundary, v) -
      integrate_boundary_dot_n(mesh, BoundaryTag::SolidBoundary, v);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  // ∮ y ∧ (M n) with constant antisymmetric M: equals -M01 * ∮ y·n.
  Mat2 m;
  m << 0.0, 1.0, -1.0, 0.0;
  const double torque = integrate_boundary_cross_mat_n(
      mesh, BoundaryTag::SolidBoundary, [&](const Vec2&) { return m; });
  CHECK(torque == doctest::Approx(-2.0 * solid_area).epsilon(1e-12));
}

TEST_CASE("P2 space reproduces quadratics: values, gradients, integrals") {
  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 3);
  const FemSpace space(mesh, 2, Support::FluidOnly);
  auto f = [](const Vec2& x) {
    return Vec2(x[0] * x[0] - 3.0 * x[0] * x[1], x[1] * x[1] + x[0]);
  };
  auto grad_f = [](const Vec2& x) {
    Mat2 g;
    g << 2.0 * x[0] - 3.0 * x[1], -3.0 * x[0], 1.0, 2.0 * x[1];
    return g;
  };
  const VectorXd nodal = space.interpolate_vector(f);
  FieldSampler fs{&space, &nodal};
  const auto& quad = TriQuadrature::degree4();
  for (int c : space.cells()) {
    const CellGeom g = CellGeom::of(mesh, c);
    const RefBasis rb = RefBasis::at(2, quad.bary[1]);
    const Vec2 x = g.map(quad.bary[1]);
    CHECK((fs.value_vector(c, g, rb) - f(x)).norm() < 1e-12);
    CHECK((fs.grad_vector(c, g, rb) - grad_f(x)).norm() < 1e-11);
    const auto h = fs.hessian_vector(c, g);
    CHECK(h[0](0, 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(h[0](0, 1) == doctest::Approx(-3.0).epsilon(1e-10));
    CHECK(h[1](1, 1) == doctest::Approx(2.0).epsilon(1e-10));
  }

  // Mass matrix integrates the interpolant exactly for quadratics.
  const SpMat mass = vector_mass(space);
  const VectorXd ones = space.interpolate_vector([](const Vec2&) {
    return Vec2(1.0, 0.0);
  });
  const double integral = ones.dot(mass * nodal);
  const double direct = integrate_region(mesh, Region::Fluid, [&](const Vec2& x) {
    return f(x)[0];
  });
  CHECK(integral == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("boundary traces cover each circle once") {
  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 4);
  const FemSpace fluid(mesh, 2, Support::FluidOnly);
  const FemSpace solid(mesh, 2, Support::SolidOnly);
  // Interface circle: both restrictions see the same number of trace edges.
  CHECK(fluid.trace(BoundaryTag::SolidBoundary).size() == 24);
  CHECK(solid.trace(BoundaryTag::SolidBoundary).size() == 24);
  CHECK(fluid.boundary_dofs(BoundaryTag::SolidBoundary).size() == 48);
  CHECK(solid.trace(BoundaryTag::OuterBoundary).empty());

  // Trace quadrature of a P2 interpolant agrees with the analytic trace.
  auto f = [](const Vec2& x) { return x[0] * x[1]; };
  const VectorXd nodal = fluid.interpolate_scalar(f);
  const auto& equad = EdgeQuadrature::degree5();
  double acc = 0.0, acc_exact = 0.0;
  for (const auto& te : fluid.trace(BoundaryTag::SolidBoundary)) {
    const auto& be = mesh.boundary_edges[te.be];
    const Vec2 a = mesh.vertices[be.v0], b = mesh.vertices[be.v1];
    const double len = (b - a).norm();
    for (int q = 0; q < EdgeQuadrature::n; ++q) {
      const auto tb = trace_basis_p2(equad.t[q]);
      double val = 0.0;
      for (int i = 0; i < 3; ++i) val += nodal[te.dofs[i]] * tb[i];
      acc += equad.w[q] * len * val;
      acc_exact += equad.w[q] * len * f(a + equad.t[q] * (b - a));
    }
  }
  CHECK(acc == doctest::Approx(acc_exact).epsilon(1e-12));
}

TEST_CASE("mesh file round-trip is exact and validated") {
  namespace fs = std::filesystem;
  const Mesh mesh = build_disk_in_disk_mesh(0.5, 2.0, 3);
  const auto path = fs::temp_directory_path() / "swim_mesh_roundtrip.txt";
  write_mesh(mesh, path.string());
  const Mesh back = read_mesh(path.string());
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_cells() == mesh.n_cells());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    CHECK((back.vertices[v] - mesh.vertices[v]).norm() == 0.0);
  }
  CHECK(back.cells == mesh.cells);
  CHECK(back.solid_radius == mesh.solid_radius);

  // Second export is byte-identical.
  const auto path2 = fs::temp_directory_path() / "swim_mesh_roundtrip2.txt";
  write_mesh(back, path2.string());
  std::FILE* f1 = std::fopen(path.string().c_str(), "rb");
  std::FILE* f2 = std::fopen(path2.string().c_str(), "rb");
  REQUIRE(f1);
  REQUIRE(f2);
  int c1, c2;
  do {
    c1 = std::fgetc(f1);
    c2 = std::fgetc(f2);
    CHECK(c1 == c2);
  } while (c1 != EOF && c2 != EOF);
  std::fclose(f1);
  std::fclose(f2);
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_disk_in_disk_mesh(2.0, 0.5, 4), InvalidGeometry);
  CHECK_THROWS_AS(build_disk_in_disk_mesh(-1.0, 2.0, 4), InvalidGeometry);
  CHECK_THROWS_AS(build_disk_in_disk_mesh(0.5, 2.0, 0), InvalidGeometry);
  CHECK_THROWS_AS(read_mesh("/nonexistent/swim.mesh"), IOError);
}
