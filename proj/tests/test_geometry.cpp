#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "dynbc/errors.hpp"
#include "dynbc/geometry.hpp"

using namespace dynbc;
using std::numbers::pi;

namespace
{

std::size_t count_tag(const Mesh &mesh, BoundaryTag tag)
{
  std::size_t n = 0;
  for (const auto &e : mesh.boundary_edges())
  {
    n += e.tag == tag;
  }
  return n;
}

}  // namespace

TEST_CASE("smallest annulus has the expected counts")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 2, 8);
  CHECK(mesh.node_count() == 16);
  CHECK(mesh.triangle_count() == 16);
  CHECK(count_tag(mesh, BoundaryTag::GammaZero) == 8);
  CHECK(count_tag(mesh, BoundaryTag::GammaOne) == 8);
  CHECK(check_mesh(mesh).empty());
}

TEST_CASE("triangle and boundary-edge counts follow the grid")
{
  for (auto [nr, nt] : {std::pair{2, 8}, {3, 16}, {5, 24}, {8, 32}})
  {
    const Mesh mesh = build_annulus_mesh(1.0, 2.0, nr, nt);
    CHECK(mesh.triangle_count() == static_cast<std::size_t>(2 * (nr - 1) * nt));
    CHECK(mesh.boundary_edges().size() == static_cast<std::size_t>(2 * nt));
    CHECK(check_mesh(mesh).empty());
    for (std::size_t t = 0; t < mesh.triangle_count(); t++)
    {
      CHECK(mesh.signed_area(t) > 0.0);
    }
  }
}

TEST_CASE("boundary loops close after n_theta steps")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 4, 20);
  for (auto tag : {BoundaryTag::GammaZero, BoundaryTag::GammaOne})
  {
    const auto loop = boundary_loop(mesh, tag);
    CHECK(loop.size() == 20);
  }
}

TEST_CASE("outward normals point away from the annulus")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 3, 16);
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    const Vec2 nu = outward_normal(mesh, e);
    const Vec2 mid = mesh.edge_midpoint(e);
    CHECK(nu.norm() == doctest::Approx(1.0).epsilon(1e-14));
    if (mesh.boundary_edges()[e].tag == BoundaryTag::GammaZero)
    {
      CHECK(nu.dot(mid) < 0.0);
    }
    else
    {
      CHECK(nu.dot(mid) > 0.0);
    }
  }
}

TEST_CASE("normals at reference angles")
{
  const int nt = 32;
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 4, nt);
  const double tol = 2.0 * pi / nt;
  bool outer_found = false, inner_found = false;
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    const auto &edge = mesh.boundary_edges()[e];
    const Vec2 pa = mesh.nodes()[edge.a], pb = mesh.nodes()[edge.b];
    const Vec2 nu = outward_normal(mesh, e);
    // Outer edge starting or ending on the positive x axis.
    if (edge.tag == BoundaryTag::GammaOne && (std::abs(pa.y()) < 1e-12 || std::abs(pb.y()) < 1e-12) &&
        pa.x() > 0.0 && pb.x() > 0.0 && pa.y() + pb.y() > 0.0)
    {
      outer_found = true;
      CHECK((nu - Vec2(1.0, 0.0)).norm() < tol);
    }
    // Inner edge next to angle pi/2.
    const double angle = std::atan2(0.5 * (pa.y() + pb.y()), 0.5 * (pa.x() + pb.x()));
    if (edge.tag == BoundaryTag::GammaZero && std::abs(angle - pi / 2.0) < pi / nt + 1e-12)
    {
      inner_found = true;
      CHECK((nu - Vec2(0.0, -1.0)).norm() < tol);
    }
  }
  CHECK(outer_found);
  CHECK(inner_found);
}

TEST_CASE("normal of a non-boundary edge is rejected")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 3, 8);
  // Nodes 0 and 8 form a radial edge between the first two rings.
  CHECK_THROWS_AS(outward_normal(mesh, 0, 8), InvalidArgument);
  CHECK(mesh.find_boundary_edge(0, 8) == -1);
}

TEST_CASE("boundary length is the inscribed polygon perimeter")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.0, 3, 64);
  CHECK(boundary_length(mesh, BoundaryTag::GammaOne) ==
        doctest::Approx(2.0 * 64 * 2.0 * std::sin(pi / 64)).epsilon(1e-13));
  CHECK(boundary_length(mesh, BoundaryTag::GammaZero) ==
        doctest::Approx(2.0 * 64 * std::sin(pi / 64)).epsilon(1e-13));
}

TEST_CASE("outer perimeter converges to 4 pi at second order")
{
  double previous = 0.0;
  for (int nt : {16, 32, 64, 128})
  {
    const Mesh mesh = build_annulus_mesh(1.0, 2.0, 2, nt);
    const double err = std::abs(boundary_length(mesh, BoundaryTag::GammaOne) - 4.0 * pi);
    if (previous > 0.0)
    {
      CHECK(std::log2(previous / err) == doctest::Approx(2.0).epsilon(0.02));
    }
    previous = err;
  }
}

TEST_CASE("invalid annulus parameters")
{
  CHECK_THROWS_AS(build_annulus_mesh(2.0, 1.0, 3, 16), InvalidArgument);
  CHECK_THROWS_AS(build_annulus_mesh(0.0, 1.0, 3, 16), InvalidArgument);
  CHECK_THROWS_AS(build_annulus_mesh(1.0, 2.0, 1, 16), InvalidArgument);
  CHECK_THROWS_AS(build_annulus_mesh(1.0, 2.0, 3, 2), InvalidArgument);
}

TEST_CASE("mesh constructor rejects inconsistent boundary data")
{
  const std::vector<Vec2> nodes = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const std::vector<Triangle> tris = {{0, 1, 2}, {1, 3, 2}};
  // Diagonal 1-2 is interior.
  std::vector<BoundaryEdge> edges = {{0, 1, BoundaryTag::GammaZero},
                                     {1, 3, BoundaryTag::GammaOne},
                                     {3, 2, BoundaryTag::GammaOne},
                                     {1, 2, BoundaryTag::GammaZero}};
  CHECK_THROWS_AS(Mesh(nodes, tris, edges), InvalidArgument);
  // Untagged boundary edge 2-0.
  edges.pop_back();
  CHECK_THROWS_AS(Mesh(nodes, tris, edges), InvalidArgument);
  edges.push_back({2, 0, BoundaryTag::GammaZero});
  CHECK_NOTHROW(Mesh(nodes, tris, edges));
}

TEST_CASE("check_mesh reports inverted triangles")
{
  const Mesh good = build_annulus_mesh(1.0, 2.0, 2, 8);
  auto tris = good.triangles();
  std::swap(tris[0][1], tris[0][2]);
  const Mesh bad(good.nodes(), tris, good.boundary_edges());
  CHECK_FALSE(check_mesh(bad).empty());
}

TEST_CASE("mesh text format round trip")
{
  const Mesh mesh = build_annulus_mesh(1.0, 2.5, 4, 12);
  std::stringstream ss;
  write_mesh(ss, mesh);
  const Mesh back = read_mesh(ss);
  REQUIRE(back.node_count() == mesh.node_count());
  REQUIRE(back.triangle_count() == mesh.triangle_count());
  REQUIRE(back.boundary_edges().size() == mesh.boundary_edges().size());
  for (std::size_t i = 0; i < mesh.node_count(); i++)
  {
    CHECK(back.nodes()[i] == mesh.nodes()[i]);
  }
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    CHECK(back.boundary_edges()[e].tag == mesh.boundary_edges()[e].tag);
  }
  std::stringstream junk("nodes x");
  CHECK_THROWS_AS(read_mesh(junk), InvalidArgument);
}

TEST_CASE("level-set domains")
{
  LevelSetDomain circle;
  circle.f = [](const Vec2 &x) { return 0.5 * x.squaredNorm(); };
  circle.grad_f = [](const Vec2 &x) { return x; };
  circle.k0 = 0.5;
  circle.k1 = 2.0;
  CHECK_NOTHROW(validate_levelset(circle));
  CHECK(levelset_radius(circle, 2.0, 0.3) == doctest::Approx(2.0).epsilon(1e-12));

  const Mesh mesh = build_levelset_mesh(circle, 4, 16);
  CHECK(check_mesh(mesh).empty());
  const Mesh annulus = build_annulus_mesh(1.0, 2.0, 4, 16);
  for (std::size_t i = 0; i < mesh.node_count(); i++)
  {
    CHECK((mesh.nodes()[i] - annulus.nodes()[i]).norm() < 1e-10);
  }

  LevelSetDomain ellipse = circle;
  ellipse.f = [](const Vec2 &x) { return 0.5 * (x.x() * x.x() / 2.0 + x.y() * x.y()); };
  ellipse.grad_f = [](const Vec2 &x) { return Vec2(x.x() / 2.0, x.y()); };
  const Mesh em = build_levelset_mesh(ellipse, 3, 24);
  CHECK(check_mesh(em).empty());
  for (const auto &e : em.boundary_edges())
  {
    const double level = e.tag == BoundaryTag::GammaZero ? 0.5 : 2.0;
    CHECK(ellipse.f(em.nodes()[e.a]) == doctest::Approx(level).epsilon(1e-10));
  }

  LevelSetDomain swapped = circle;
  swapped.k0 = 2.0;
  swapped.k1 = 0.5;
  CHECK_THROWS_AS(validate_levelset(swapped), InvalidArgument);
  LevelSetDomain below = circle;
  below.k0 = -1.0;
  CHECK_THROWS_AS(validate_levelset(below), InvalidArgument);
}
