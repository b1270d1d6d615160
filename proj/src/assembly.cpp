#include "dynbc/assembly.hpp"

#include <fstream>
#include <ostream>
#include <vector>
#include "dynbc/errors.hpp"

namespace dynbc
{

namespace
{

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index n, const Triplets &entries)
{
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

AssembledSystem build(const Mesh &mesh, double alpha)
{
  AssembledSystem sys;
  auto bulk = assemble_bulk(mesh);
  auto g0 = assemble_boundary(mesh, BoundaryTag::GammaZero);
  auto g1 = assemble_boundary(mesh, BoundaryTag::GammaOne);
  sys.M_bulk = std::move(bulk.mass);
  sys.K_bulk = std::move(bulk.stiffness);
  sys.M_g0 = std::move(g0.mass);
  sys.K_g0 = std::move(g0.stiffness);
  sys.M_g1 = std::move(g1.mass);
  sys.K_tot = sys.K_bulk + sys.K_g0 + sys.M_g1;
  sys.M_H = sys.M_bulk + sys.M_g0;
  sys.K_tot.makeCompressed();
  sys.M_H.makeCompressed();
  sys.alpha = alpha;

  auto chol = std::make_shared<MassFactorization>(sys.M_H);
  if (chol->info() != Eigen::Success)
  {
    throw AssemblyError("velocity Gram matrix M_H is not positive definite");
  }
  sys.mass_solver = std::move(chol);
  return sys;
}

}  // namespace

MatrixPair assemble_bulk(const Mesh &mesh)
{
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  Triplets mass, stiff;
  mass.reserve(9 * mesh.triangle_count());
  stiff.reserve(9 * mesh.triangle_count());
  const auto &x = mesh.nodes();
  for (std::size_t t = 0; t < mesh.triangle_count(); t++)
  {
    const double area = mesh.signed_area(t);
    if (!(area > 0.0))
    {
      throw AssemblyError("degenerate or inverted triangle " + std::to_string(t));
    }
    const auto &tri = mesh.triangles()[t];
    // grad(phi_i) = perp(x_k - x_j) / (2 area) for (i, j, k) cyclic.
    Vec2 grad[3];
    for (int i = 0; i < 3; i++)
    {
      const Vec2 e = x[tri[(i + 2) % 3]] - x[tri[(i + 1) % 3]];
      grad[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    for (int i = 0; i < 3; i++)
    {
      for (int j = 0; j < 3; j++)
      {
        const auto r = static_cast<Eigen::Index>(tri[i]);
        const auto c = static_cast<Eigen::Index>(tri[j]);
        mass.emplace_back(r, c, area / 12.0 * (i == j ? 2.0 : 1.0));
        stiff.emplace_back(r, c, area * grad[i].dot(grad[j]));
      }
    }
  }
  return {from_triplets(n, mass), from_triplets(n, stiff)};
}

MatrixPair assemble_boundary(const Mesh &mesh, BoundaryTag tag)
{
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  Triplets mass, stiff;
  bool present = false;
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    const auto &edge = mesh.boundary_edges()[e];
    if (edge.tag != tag)
    {
      continue;
    }
    present = true;
    const double len = mesh.edge_length(e);
    if (!(len > 0.0))
    {
      throw AssemblyError("zero-length boundary edge " + std::to_string(e));
    }
    const Eigen::Index id[2] = {static_cast<Eigen::Index>(edge.a),
                                static_cast<Eigen::Index>(edge.b)};
    for (int i = 0; i < 2; i++)
    {
      for (int j = 0; j < 2; j++)
      {
        mass.emplace_back(id[i], id[j], len / 6.0 * (i == j ? 2.0 : 1.0));
        stiff.emplace_back(id[i], id[j], (i == j ? 1.0 : -1.0) / len);
      }
    }
  }
  if (!present)
  {
    throw InvalidArgument(std::string("mesh has no edges tagged ") + to_string(tag));
  }
  return {from_triplets(n, mass), from_triplets(n, stiff)};
}

AssembledSystem build_system(const Mesh &mesh, double alpha)
{
  if (!(alpha > 0.0))
  {
    throw InvalidArgument("feedback gain alpha must be positive");
  }
  return build(mesh, alpha);
}

AssembledSystem build_undamped_system(const Mesh &mesh)
{
  return build(mesh, 0.0);
}

void write_matrix(std::ostream &os, const SparseMatrix &matrix)
{
  const auto precision = os.precision(17);
  for (Eigen::Index k = 0; k < matrix.outerSize(); k++)
  {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
    {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << " 0\n";
    }
  }
  os.precision(precision);
}

void dump_matrices(const AssembledSystem &sys, const std::string &dir)
{
  const std::pair<const char *, const SparseMatrix *> items[] = {
      {"M_bulk", &sys.M_bulk}, {"K_bulk", &sys.K_bulk}, {"M_g0", &sys.M_g0},
      {"K_g0", &sys.K_g0},     {"M_g1", &sys.M_g1},     {"K_tot", &sys.K_tot},
      {"M_H", &sys.M_H}};
  for (const auto &[name, m] : items)
  {
    const std::string path = dir + "/" + name + ".txt";
    std::ofstream out(path);
    if (!out)
    {
      throw std::runtime_error("cannot write " + path);
    }
    write_matrix(out, *m);
  }
}

}  // namespace dynbc
