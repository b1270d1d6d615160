#ifndef DYNBC_TEST_ORACLES_HPP
#define DYNBC_TEST_ORACLES_HPP

// Dense reference computations built directly from the assembled matrices, independent of
// the Schur-complement solver, the Krylov code and the power iteration. The manufactured
// solution at the end supplies exact data for the sparse solver instead.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dynbc/assembly.hpp"
#include "dynbc/geometry.hpp"
#include "dynbc/operator.hpp"

namespace oracle
{

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Complex = std::complex<double>;

inline MatrixXd dense(const dynbc::SparseMatrix &m)
{
  return MatrixXd(m);
}

// Block generator acting on the stacked vector [u; v].
inline MatrixXd generator(const dynbc::AssembledSystem &sys)
{
  const Eigen::Index n = sys.size();
  const MatrixXd K = dense(sys.K_tot);
  const MatrixXd M = dense(sys.M_H);
  const MatrixXd D = sys.alpha * dense(sys.M_g1);
  const Eigen::PartialPivLU<MatrixXd> Mlu(M);
  MatrixXd A = MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n) = -MatrixXd::Identity(n, n);
  A.bottomLeftCorner(n, n) = Mlu.solve(K);
  A.bottomRightCorner(n, n) = Mlu.solve(D);
  return A;
}

inline VectorXcd stack(const dynbc::State &X)
{
  VectorXcd z(2 * X.size());
  z << X.u, X.v;
  return z;
}

inline dynbc::State unstack(const VectorXcd &z)
{
  const Eigen::Index n = z.size() / 2;
  return {z.head(n), z.tail(n)};
}

// (A + lambda) X = F as the M-weighted block system
//   [lambda I, -I; K, D + lambda M] [u; v] = [f; M g],
// solved with dense LU.
inline dynbc::State block_solve(const dynbc::AssembledSystem &sys, Complex lambda,
                                const dynbc::State &F)
{
  const Eigen::Index n = sys.size();
  const MatrixXcd K = dense(sys.K_tot).cast<Complex>();
  const MatrixXcd M = dense(sys.M_H).cast<Complex>();
  const MatrixXcd D = (sys.alpha * dense(sys.M_g1)).cast<Complex>();
  MatrixXcd B(2 * n, 2 * n);
  B << lambda * MatrixXcd::Identity(n, n), -MatrixXcd::Identity(n, n), K, D + lambda * M;
  VectorXcd rhs(2 * n);
  rhs << F.u, M * F.v;
  return unstack(B.partialPivLu().solve(rhs));
}

// Energy operator norm of (A + i omega)^{-1}: with G = blockdiag(K, M) = L L^T it equals the
// spectral norm of L^T R L^{-T}.
inline double resolvent_norm(const dynbc::AssembledSystem &sys, double omega)
{
  const Eigen::Index n = sys.size();
  const MatrixXd A = generator(sys);
  MatrixXcd shifted = A.cast<Complex>();
  shifted.diagonal().array() += Complex(0.0, omega);
  const MatrixXcd R = shifted.inverse();

  MatrixXd G = MatrixXd::Zero(2 * n, 2 * n);
  G.topLeftCorner(n, n) = dense(sys.K_tot);
  G.bottomRightCorner(n, n) = dense(sys.M_H);
  const Eigen::LLT<MatrixXd> llt(G);
  const MatrixXcd L = MatrixXd(llt.matrixL()).cast<Complex>();
  const MatrixXcd Linv = L.inverse();
  const MatrixXcd W = L.transpose() * R * Linv.transpose();
  return Eigen::JacobiSVD<MatrixXcd>(W).singularValues()(0);
}

// Roots of K u - mu D u + mu^2 M u = 0 from the companion pencil
//   [0, -I; K, D] z = mu [I, 0; 0, M] z  (QZ, no mass inversion).
inline std::vector<Complex> pencil_eigenvalues(const dynbc::AssembledSystem &sys)
{
  const Eigen::Index n = sys.size();
  MatrixXd Ac = MatrixXd::Zero(2 * n, 2 * n);
  MatrixXd Bc = MatrixXd::Zero(2 * n, 2 * n);
  Ac.topRightCorner(n, n) = -MatrixXd::Identity(n, n);
  Ac.bottomLeftCorner(n, n) = dense(sys.K_tot);
  Ac.bottomRightCorner(n, n) = sys.alpha * dense(sys.M_g1);
  Bc.topLeftCorner(n, n) = MatrixXd::Identity(n, n);
  Bc.bottomRightCorner(n, n) = dense(sys.M_H);
  Eigen::GeneralizedEigenSolver<MatrixXd> qz(Ac, Bc, false);
  std::vector<Complex> mu;
  for (Eigen::Index i = 0; i < 2 * n; i++)
  {
    mu.push_back(qz.alphas()(i) / qz.betas()(i));
  }
  return mu;
}

// Undamped spectrum: mu = +- i sqrt(eig(K, M)).
inline VectorXd undamped_frequencies(const dynbc::AssembledSystem &sys)
{
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(dense(sys.K_tot), dense(sys.M_H));
  return es.eigenvalues().cwiseSqrt();
}

// Distance from mu to the nearest entry of `reference`.
inline double nearest_distance(Complex mu, const std::vector<Complex> &reference)
{
  double best = INFINITY;
  for (const Complex &r : reference)
  {
    best = std::min(best, std::abs(mu - r));
  }
  return best;
}

// Discrete solve of the resolvent problem at lambda = 1 with u = r^2, f = 0 (so v = u).
// Strong data: g1 = -Lap u + v = r^2 - 4 in the bulk, g2 = dnu u + v = r0^2 - 2 r0 on Gamma0,
// and the Robin defect q = dnu u + u + alpha v = 2 r1 + (1 + alpha) r1^2 on Gamma1 enters as
// an extra boundary load. Returns the M_H-norm error of the nodal interpolant of r^2.
inline double manufactured_error(double r0, double r1, int n_r, int n_theta, double alpha)
{
  const dynbc::Mesh mesh = dynbc::build_annulus_mesh(r0, r1, n_r, n_theta);
  const dynbc::AssembledSystem sys = dynbc::build_system(mesh, alpha);
  const Eigen::Index n = sys.size();
  VectorXd exact(n), g1(n), g2 = VectorXd::Constant(n, r0 * r0 - 2.0 * r0),
      q = VectorXd::Constant(n, 2.0 * r1 + (1.0 + alpha) * r1 * r1);
  for (Eigen::Index i = 0; i < n; i++)
  {
    const double r2 = mesh.nodes()[static_cast<std::size_t>(i)].squaredNorm();
    exact(i) = r2;
    g1(i) = r2 - 4.0;
  }
  const VectorXd load = sys.M_bulk * g1 + sys.M_g0 * g2 + sys.M_g1 * q;
  dynbc::ShiftedSolver solver(sys, 1.0);
  const VectorXcd u = solver.solve_schur(load.cast<Complex>());
  const VectorXcd e = u - exact.cast<Complex>();
  return std::sqrt(std::abs(e.dot(sys.M_H * e)));
}

}  // namespace oracle

#endif  // DYNBC_TEST_ORACLES_HPP
