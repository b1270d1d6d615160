#include "dynbc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include "dynbc/errors.hpp"

namespace dynbc
{

namespace
{

std::uint64_t edge_key(std::size_t a, std::size_t b)
{
  if (a > b)
  {
    std::swap(a, b);
  }
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

double cross(const Vec2 &a, const Vec2 &b)
{
  return a.x() * b.y() - a.y() * b.x();
}

std::unordered_map<std::uint64_t, std::vector<std::size_t>>
edge_to_triangles(const std::vector<Triangle> &triangles)
{
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> map;
  map.reserve(3 * triangles.size());
  for (std::size_t t = 0; t < triangles.size(); t++)
  {
    const auto &tri = triangles[t];
    for (int k = 0; k < 3; k++)
    {
      map[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
    }
  }
  return map;
}

}  // namespace

const char *to_string(BoundaryTag tag)
{
  return tag == BoundaryTag::GammaZero ? "Gamma0" : "Gamma1";
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges)
  : nodes_(std::move(nodes)), triangles_(std::move(triangles)),
    boundary_edges_(std::move(boundary_edges))
{
  const auto n = nodes_.size();
  for (const auto &tri : triangles_)
  {
    for (auto i : tri)
    {
      if (i >= n)
      {
        throw InvalidArgument("triangle references node " + std::to_string(i) +
                              " out of range");
      }
    }
  }
  const auto map = edge_to_triangles(triangles_);
  std::size_t tagged = 0;
  owners_.reserve(boundary_edges_.size());
  for (const auto &e : boundary_edges_)
  {
    auto it = map.find(edge_key(e.a, e.b));
    if (it == map.end() || it->second.size() != 1)
    {
      throw InvalidArgument("boundary edge (" + std::to_string(e.a) + ", " +
                            std::to_string(e.b) + ") does not belong to exactly one triangle");
    }
    owners_.push_back(it->second.front());
    tagged++;
  }
  std::size_t open = 0;
  for (const auto &[key, tris] : map)
  {
    if (tris.size() > 2)
    {
      throw InvalidArgument("edge shared by more than two triangles");
    }
    open += (tris.size() == 1);
  }
  if (open != tagged)
  {
    throw InvalidArgument("every boundary edge must carry exactly one tag (" +
                          std::to_string(open) + " open edges, " + std::to_string(tagged) +
                          " tagged)");
  }
}

long Mesh::find_boundary_edge(std::size_t a, std::size_t b) const
{
  const auto key = edge_key(a, b);
  for (std::size_t e = 0; e < boundary_edges_.size(); e++)
  {
    if (edge_key(boundary_edges_[e].a, boundary_edges_[e].b) == key)
    {
      return static_cast<long>(e);
    }
  }
  return -1;
}

double Mesh::edge_length(std::size_t e) const
{
  const auto &edge = boundary_edges_.at(e);
  return (nodes_[edge.b] - nodes_[edge.a]).norm();
}

Vec2 Mesh::edge_midpoint(std::size_t e) const
{
  const auto &edge = boundary_edges_.at(e);
  return 0.5 * (nodes_[edge.a] + nodes_[edge.b]);
}

Vec2 Mesh::barycenter(std::size_t t) const
{
  const auto &tri = triangles_.at(t);
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

double Mesh::signed_area(std::size_t t) const
{
  const auto &tri = triangles_.at(t);
  return 0.5 * cross(nodes_[tri[1]] - nodes_[tri[0]], nodes_[tri[2]] - nodes_[tri[0]]);
}

double Mesh::min_edge_length() const
{
  double h = std::numeric_limits<double>::infinity();
  for (const auto &tri : triangles_)
  {
    for (int k = 0; k < 3; k++)
    {
      h = std::min(h, (nodes_[tri[(k + 1) % 3]] - nodes_[tri[k]]).norm());
    }
  }
  return h;
}

double Mesh::max_edge_length() const
{
  double h = 0.0;
  for (const auto &tri : triangles_)
  {
    for (int k = 0; k < 3; k++)
    {
      h = std::max(h, (nodes_[tri[(k + 1) % 3]] - nodes_[tri[k]]).norm());
    }
  }
  return h;
}

std::vector<std::string> check_mesh(const Mesh &mesh)
{
  std::vector<std::string> issues;
  for (std::size_t t = 0; t < mesh.triangle_count(); t++)
  {
    if (!(mesh.signed_area(t) > 0.0))
    {
      issues.push_back("triangle " + std::to_string(t) + " has non-positive signed area");
    }
  }
  for (auto tag : {BoundaryTag::GammaZero, BoundaryTag::GammaOne})
  {
    try
    {
      boundary_loop(mesh, tag);
    }
    catch (const InvalidArgument &e)
    {
      issues.emplace_back(e.what());
    }
  }
  // Closures of the two components must not touch.
  std::vector<int> seen(mesh.node_count(), -1);
  for (const auto &e : mesh.boundary_edges())
  {
    for (auto i : {e.a, e.b})
    {
      const int tag = static_cast<int>(e.tag);
      if (seen[i] >= 0 && seen[i] != tag)
      {
        issues.push_back("node " + std::to_string(i) + " lies on both Gamma0 and Gamma1");
      }
      seen[i] = tag;
    }
  }
  return issues;
}

Mesh build_annulus_mesh(double r0, double r1, int n_r, int n_theta)
{
  if (!(r0 > 0.0) || !(r1 > r0) || n_r < 2 || n_theta < 8)
  {
    std::ostringstream msg;
    msg << "annulus parameters out of range: need 0 < r0 < r1, n_r >= 2, n_theta >= 8 (got r0="
        << r0 << ", r1=" << r1 << ", n_r=" << n_r << ", n_theta=" << n_theta << ")";
    throw InvalidArgument(msg.str());
  }
  const auto nt = static_cast<std::size_t>(n_theta);
  const auto nr = static_cast<std::size_t>(n_r);
  auto id = [nt](std::size_t i, std::size_t j) { return i * nt + (j % nt); };

  std::vector<Vec2> nodes;
  nodes.reserve(nr * nt);
  for (std::size_t i = 0; i < nr; i++)
  {
    const double r = r0 + (r1 - r0) * static_cast<double>(i) / static_cast<double>(nr - 1);
    for (std::size_t j = 0; j < nt; j++)
    {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(nt);
      nodes.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }

  std::vector<Triangle> triangles;
  triangles.reserve(2 * (nr - 1) * nt);
  for (std::size_t i = 0; i + 1 < nr; i++)
  {
    for (std::size_t j = 0; j < nt; j++)
    {
      const auto a = id(i, j), b = id(i, j + 1), c = id(i + 1, j + 1), d = id(i + 1, j);
      triangles.push_back({a, d, c});
      triangles.push_back({a, c, b});
    }
  }

  // Stored with the domain on the left of a -> b.
  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * nt);
  for (std::size_t j = 0; j < nt; j++)
  {
    edges.push_back({id(0, j + 1), id(0, j), BoundaryTag::GammaZero});
  }
  for (std::size_t j = 0; j < nt; j++)
  {
    edges.push_back({id(nr - 1, j), id(nr - 1, j + 1), BoundaryTag::GammaOne});
  }
  return Mesh(std::move(nodes), std::move(triangles), std::move(edges));
}

Vec2 outward_normal(const Mesh &mesh, std::size_t edge)
{
  if (edge >= mesh.boundary_edges().size())
  {
    throw InvalidArgument("boundary edge index out of range");
  }
  const auto &e = mesh.boundary_edges()[edge];
  const auto &tri = mesh.triangles()[mesh.owner(edge)];
  std::size_t opposite = tri[0];
  for (auto i : tri)
  {
    if (i != e.a && i != e.b)
    {
      opposite = i;
    }
  }
  const auto &pa = mesh.nodes()[e.a];
  const Vec2 t = mesh.nodes()[e.b] - pa;
  Vec2 nu(t.y(), -t.x());
  nu.normalize();
  if (nu.dot(mesh.nodes()[opposite] - pa) > 0.0)
  {
    nu = -nu;
  }
  return nu;
}

Vec2 outward_normal(const Mesh &mesh, std::size_t a, std::size_t b)
{
  const long e = mesh.find_boundary_edge(a, b);
  if (e < 0)
  {
    throw InvalidArgument("(" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is not a boundary edge");
  }
  return outward_normal(mesh, static_cast<std::size_t>(e));
}

double boundary_length(const Mesh &mesh, BoundaryTag tag)
{
  double length = 0.0;
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    if (mesh.boundary_edges()[e].tag == tag)
    {
      length += mesh.edge_length(e);
    }
  }
  return length;
}

std::vector<std::size_t> boundary_loop(const Mesh &mesh, BoundaryTag tag)
{
  std::unordered_map<std::size_t, std::vector<std::size_t>> incident;
  std::vector<std::size_t> tagged;
  const auto &edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); e++)
  {
    if (edges[e].tag == tag)
    {
      tagged.push_back(e);
      incident[edges[e].a].push_back(e);
      incident[edges[e].b].push_back(e);
    }
  }
  const std::string name = to_string(tag);
  if (tagged.empty())
  {
    throw InvalidArgument(name + " has no edges");
  }
  for (const auto &[node, list] : incident)
  {
    if (list.size() != 2)
    {
      throw InvalidArgument(name + " is not a simple closed curve at node " +
                            std::to_string(node));
    }
  }
  std::vector<std::size_t> loop{tagged.front()};
  const std::size_t start = edges[tagged.front()].a;
  std::size_t node = edges[tagged.front()].b;
  std::size_t prev = tagged.front();
  while (node != start)
  {
    const auto &list = incident[node];
    const auto next = list[0] == prev ? list[1] : list[0];
    loop.push_back(next);
    node = edges[next].a == node ? edges[next].b : edges[next].a;
    prev = next;
    if (loop.size() > tagged.size())
    {
      break;
    }
  }
  if (loop.size() != tagged.size())
  {
    throw InvalidArgument(name + " consists of more than one closed loop");
  }
  return loop;
}

void validate_levelset(const LevelSetDomain &domain, int n_samples)
{
  if (!domain.f || !domain.grad_f)
  {
    throw InvalidArgument("level-set domain needs both f and grad_f");
  }
  if (!(domain.k0 < domain.k1))
  {
    throw InvalidArgument("level values must satisfy k0 < k1");
  }
  if (!(domain.f(domain.center) < domain.k0))
  {
    throw InvalidArgument("k0 must lie strictly above f(center)");
  }
  for (int s = 0; s < n_samples; s++)
  {
    const double theta = 2.0 * std::numbers::pi * s / n_samples;
    const Vec2 dir(std::cos(theta), std::sin(theta));
    for (double level : {domain.k0, domain.k1})
    {
      const Vec2 x = domain.center + levelset_radius(domain, level, theta) * dir;
      if (!(domain.grad_f(x).norm() > 1e-12))
      {
        throw InvalidArgument("grad f vanishes on a level set");
      }
    }
  }
}

double levelset_radius(const LevelSetDomain &domain, double level, double theta)
{
  const Vec2 dir(std::cos(theta), std::sin(theta));
  auto g = [&](double r) { return domain.f(domain.center + r * dir) - level; };
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (g(hi) < 0.0)
  {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 60)
    {
      throw InvalidArgument("level set not reached along a ray; domain is unbounded");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
       it++)
  {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mesh build_levelset_mesh(const LevelSetDomain &domain, int n_r, int n_theta)
{
  if (n_r < 2 || n_theta < 8)
  {
    throw InvalidArgument("level-set mesh needs n_r >= 2 and n_theta >= 8");
  }
  validate_levelset(domain);
  // Same topology as the annulus; only the ring radii vary with the angle.
  auto mesh = build_annulus_mesh(1.0, 2.0, n_r, n_theta);
  std::vector<Vec2> nodes(mesh.nodes().size());
  for (int j = 0; j < n_theta; j++)
  {
    const double theta = 2.0 * std::numbers::pi * j / n_theta;
    const Vec2 dir(std::cos(theta), std::sin(theta));
    const double ra = levelset_radius(domain, domain.k0, theta);
    const double rb = levelset_radius(domain, domain.k1, theta);
    for (int i = 0; i < n_r; i++)
    {
      const double r = ra + (rb - ra) * static_cast<double>(i) / (n_r - 1);
      nodes[static_cast<std::size_t>(i * n_theta + j)] = domain.center + r * dir;
    }
  }
  return Mesh(std::move(nodes), mesh.triangles(), mesh.boundary_edges());
}

void write_mesh(std::ostream &os, const Mesh &mesh)
{
  const auto precision = os.precision(17);
  os << "nodes " << mesh.node_count() << " triangles " << mesh.triangle_count() << '\n';
  for (const auto &p : mesh.nodes())
  {
    os << p.x() << ' ' << p.y() << '\n';
  }
  for (const auto &t : mesh.triangles())
  {
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  for (const auto &e : mesh.boundary_edges())
  {
    os << e.a << ' ' << e.b << ' ' << static_cast<int>(e.tag) << '\n';
  }
  os.precision(precision);
}

Mesh read_mesh(std::istream &is)
{
  std::string w1, w2;
  std::size_t n = 0, t = 0;
  if (!(is >> w1 >> n >> w2 >> t) || w1 != "nodes" || w2 != "triangles")
  {
    throw InvalidArgument("mesh header must read 'nodes N triangles T'");
  }
  std::vector<Vec2> nodes(n);
  for (auto &p : nodes)
  {
    if (!(is >> p.x() >> p.y()))
    {
      throw InvalidArgument("truncated node list");
    }
  }
  std::vector<Triangle> triangles(t);
  for (auto &tri : triangles)
  {
    if (!(is >> tri[0] >> tri[1] >> tri[2]))
    {
      throw InvalidArgument("truncated triangle list");
    }
  }
  std::vector<BoundaryEdge> edges;
  std::size_t a, b;
  int tag;
  while (is >> a >> b >> tag)
  {
    if (tag != 0 && tag != 1)
    {
      throw InvalidArgument("boundary tag must be 0 or 1");
    }
    edges.push_back({a, b, static_cast<BoundaryTag>(tag)});
  }
  return Mesh(std::move(nodes), std::move(triangles), std::move(edges));
}

}  // namespace dynbc
