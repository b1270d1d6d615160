#ifndef DYNBC_GEOMETRY_HPP
#define DYNBC_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>
#include <Eigen/Core>

namespace dynbc
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Gamma0 carries the dynamic Laplace-Beltrami condition, Gamma1 the damped Robin feedback.
enum class BoundaryTag : int
{
  GammaZero = 0,
  GammaOne = 1
};

const char *to_string(BoundaryTag tag);

struct BoundaryEdge
{
  std::size_t a, b;
  BoundaryTag tag;
};

using Triangle = std::array<std::size_t, 3>;

//
// Immutable 2D triangulation with two tagged boundary loops.
//
// The constructor builds the edge-to-triangle adjacency and rejects inconsistent boundary
// data (an edge listed as boundary that is interior, or an untagged boundary edge). Metric
// sanity (positive areas, closed loops) is reported separately by check_mesh() so that
// degenerate inputs can still reach the assembly routines and be diagnosed there.
//
class Mesh
{
public:
  Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Vec2> &nodes() const { return nodes_; }
  const std::vector<Triangle> &triangles() const { return triangles_; }
  const std::vector<BoundaryEdge> &boundary_edges() const { return boundary_edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  // Index of the triangle owning boundary edge e.
  std::size_t owner(std::size_t e) const { return owners_[e]; }

  // Index into boundary_edges() of the edge {a, b}, or -1 when {a, b} is not a boundary edge.
  long find_boundary_edge(std::size_t a, std::size_t b) const;

  double edge_length(std::size_t e) const;
  Vec2 edge_midpoint(std::size_t e) const;
  Vec2 barycenter(std::size_t t) const;
  double signed_area(std::size_t t) const;

  // Shortest and longest edge over all triangles.
  double min_edge_length() const;
  double max_edge_length() const;

private:
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::size_t> owners_;
};

// Human-readable list of violated invariants; empty for a valid mesh.
std::vector<std::string> check_mesh(const Mesh &mesh);

// Structured polar mesh of {r0 < |x| < r1}: n_r rings of n_theta nodes, inner ring tagged
// Gamma0, outer ring tagged Gamma1.
Mesh build_annulus_mesh(double r0, double r1, int n_r, int n_theta);

Vec2 outward_normal(const Mesh &mesh, std::size_t edge);
Vec2 outward_normal(const Mesh &mesh, std::size_t a, std::size_t b);

double boundary_length(const Mesh &mesh, BoundaryTag tag);

// Edge indices of the tagged loop, in traversal order; throws if the tagged edges do not
// form exactly one closed loop.
std::vector<std::size_t> boundary_loop(const Mesh &mesh, BoundaryTag tag);

//
// Donut-shaped domain {k0 < f < k1} of a convex function. Meshes are generated through a
// radial graph around `center`, so the level sets must be star-shaped about it.
//
struct LevelSetDomain
{
  std::function<double(const Vec2 &)> f;
  std::function<Vec2(const Vec2 &)> grad_f;
  std::function<Mat2(const Vec2 &)> hessian;  // optional
  double k0 = 0.0;
  double k1 = 0.0;
  Vec2 center = Vec2::Zero();
};

// Throws InvalidArgument when k0 >= k1, f(center) >= k0, or grad f vanishes on a level set
// (checked at n_samples rays).
void validate_levelset(const LevelSetDomain &domain, int n_samples = 64);

// Distance along the ray center + r (cos t, sin t) at which f reaches `level` (bisection).
double levelset_radius(const LevelSetDomain &domain, double level, double theta);

Mesh build_levelset_mesh(const LevelSetDomain &domain, int n_r, int n_theta);

// Plain text: "nodes N triangles T", N lines "x y", T lines "i j k", then "i j tag" lines.
void write_mesh(std::ostream &os, const Mesh &mesh);
Mesh read_mesh(std::istream &is);

}  // namespace dynbc

#endif  // DYNBC_GEOMETRY_HPP
