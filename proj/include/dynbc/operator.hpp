#ifndef DYNBC_OPERATOR_HPP
#define DYNBC_OPERATOR_HPP

#include <atomic>
#include <complex>
#include <iosfwd>
#include <random>
#include <Eigen/SparseLU>
#include "dynbc/assembly.hpp"

namespace dynbc
{

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexSparseMatrix = Eigen::SparseMatrix<Complex>;

//
// Discrete element [u, v] of the energy space: u is the position (bulk values with the
// Gamma0 trace on the shared boundary nodes), v the velocity.
//
struct State
{
  ComplexVector u, v;

  static State zero(Eigen::Index n);
  Eigen::Index size() const { return u.size(); }
};

State operator+(const State &a, const State &b);
State operator-(const State &a, const State &b);
State operator*(Complex s, const State &a);
State &operator+=(State &a, const State &b);

// Entries uniform in the complex square [-1, 1] x [-1, 1].
State random_state(Eigen::Index n, std::mt19937_64 &rng);

// Energy product (X1, X2) = u2^H K_tot u1 + v2^H M_H v1, conjugate-linear in X2.
Complex energy_inner(const AssembledSystem &sys, const State &X1, const State &X2);
double energy_norm(const AssembledSystem &sys, const State &X);

// M_H^{-1} b through the cached Cholesky factor.
ComplexVector apply_mass_inverse(const AssembledSystem &sys, const ComplexVector &b);

// A[u, v] = [-v, M_H^{-1}(K_tot u + alpha M_g1 v)]; the Robin feedback on Gamma1 enters
// weakly through the alpha M_g1 block.
State apply_generator(const AssembledSystem &sys, const State &X);

// Relative defect of (A X, X) = alpha v^H M_g1 v + 2i Im (u, v)_V, scaled by max(1, |X|^2).
double dissipation_residual(const AssembledSystem &sys, const State &X);

struct ResolventSolve
{
  Complex lambda;
  State X;
  double residual = 0.0;  // |(A + lambda) X - F| / |F| in the energy norm
  bool factorization_reused = false;
};

struct SolverSettings
{
  double residual_tolerance = 1e-10;
  double pivot_tolerance = 1e-14;  // singularity threshold relative to the largest |S_ij|
};

//
// Factorized shift: solves (A + lambda) X = F by eliminating v = lambda u - f and factoring
// the Schur complement
//
//   S(lambda) = K_tot + lambda alpha M_g1 + lambda^2 M_H.
//
// The factorization is immutable after construction, so solve() and solve_adjoint() may be
// called concurrently from several threads.
//
class ShiftedSolver
{
public:
  ShiftedSolver(const AssembledSystem &sys, Complex lambda, SolverSettings settings = {});
  ShiftedSolver(const ShiftedSolver &) = delete;
  ShiftedSolver &operator=(const ShiftedSolver &) = delete;

  Complex lambda() const { return lambda_; }

  // Smallest |pivot| of the LU factors over the largest |S_ij|.
  double pivot_ratio() const { return pivot_ratio_; }

  // min(pivot ratio, inverse-iteration bound on sigma_min over the largest |S_ij|); the
  // shift is declared an eigenvalue when this falls below SolverSettings::pivot_tolerance.
  double singular_ratio() const { return singular_ratio_; }

  // With check_residual the energy-norm residual is computed, improved by one step of
  // iterative refinement when needed, and a LinearSolverError is thrown if it stays above
  // the tolerance.
  ResolventSolve solve(const State &F, bool check_residual = true) const;

  // Solves (A* + conj(lambda)) X = F with A* the adjoint of A in the energy product.
  State solve_adjoint(const State &F) const;

  // S(lambda)^{-1} rhs.
  ComplexVector solve_schur(const ComplexVector &rhs) const;

  // (A + lambda) X, evaluated without the factorization.
  State apply_shifted(const State &X) const;

private:
  State solve_once(const State &F) const;
  double relative_residual(const State &X, const State &F) const;

  const AssembledSystem *sys_;
  Complex lambda_;
  SolverSettings settings_;
  Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  double pivot_ratio_ = 0.0;
  double singular_ratio_ = 0.0;
  mutable std::atomic<std::size_t> solves_{0};
};

// One-shot (A + lambda)^{-1} F.
ResolventSolve resolve(const AssembledSystem &sys, Complex lambda, const State &F);

// CSV with header node,re_u,im_u,re_v,im_v.
void write_state_csv(std::ostream &os, const State &X);

}  // namespace dynbc

#endif  // DYNBC_OPERATOR_HPP
