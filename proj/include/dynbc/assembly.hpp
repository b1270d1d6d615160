#ifndef DYNBC_ASSEMBLY_HPP
#define DYNBC_ASSEMBLY_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include "dynbc/geometry.hpp"

namespace dynbc
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using MassFactorization = Eigen::SimplicialLLT<SparseMatrix>;

struct MatrixPair
{
  SparseMatrix mass;
  SparseMatrix stiffness;
};

//
// All P1 matrices of the closed-loop problem on one mesh.
//
// The Gamma0 trace constraint of the position space is built in: boundary nodes are shared
// between the bulk and the Gamma0 blocks, so K_tot and M_H act on a single nodal vector.
//
//   K_tot = K_bulk + K_g0 + M_g1   (position / V Gram matrix)
//   M_H   = M_bulk + M_g0          (velocity / H Gram matrix)
//
struct AssembledSystem
{
  SparseMatrix M_bulk, K_bulk;
  SparseMatrix M_g0, K_g0;
  SparseMatrix M_g1;
  SparseMatrix K_tot, M_H;
  double alpha = 0.0;

  // Cholesky factor of M_H, shared by every consumer of the system.
  std::shared_ptr<const MassFactorization> mass_solver;

  Eigen::Index size() const { return M_H.rows(); }
};

// Exact integrals of P1 basis products (mass) and gradient products (stiffness).
MatrixPair assemble_bulk(const Mesh &mesh);

// 1D P1 matrices along the tagged edges, parameterized by arc length. The stiffness part is
// the weak form of -Laplace-Beltrami on the polygonal curve.
MatrixPair assemble_boundary(const Mesh &mesh, BoundaryTag tag);

// Requires alpha > 0.
AssembledSystem build_system(const Mesh &mesh, double alpha);

// The conservative limit alpha = 0 (no boundary feedback); used to check energy
// conservation and the purely imaginary spectrum of the undamped problem.
AssembledSystem build_undamped_system(const Mesh &mesh);

// Coordinate text format: one "row col re im" line per stored entry.
void write_matrix(std::ostream &os, const SparseMatrix &matrix);

// Writes M_bulk.txt, K_bulk.txt, ... into an existing directory.
void dump_matrices(const AssembledSystem &sys, const std::string &dir);

}  // namespace dynbc

#endif  // DYNBC_ASSEMBLY_HPP
