#include "dynbc/operator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <limits>
#include <type_traits>
#include "dynbc/errors.hpp"

namespace dynbc
{

namespace
{

void check_sizes(const AssembledSystem &sys, const State &X)
{
  if (X.u.size() != sys.size() || X.v.size() != sys.size())
  {
    throw InvalidArgument("state size does not match the assembled system");
  }
}

ComplexSparseMatrix to_complex(const SparseMatrix &m)
{
  return m.cast<Complex>();
}

}  // namespace

State State::zero(Eigen::Index n)
{
  return {ComplexVector::Zero(n), ComplexVector::Zero(n)};
}

State operator+(const State &a, const State &b)
{
  return {a.u + b.u, a.v + b.v};
}

State operator-(const State &a, const State &b)
{
  return {a.u - b.u, a.v - b.v};
}

State operator*(Complex s, const State &a)
{
  return {s * a.u, s * a.v};
}

State &operator+=(State &a, const State &b)
{
  a.u += b.u;
  a.v += b.v;
  return a;
}

State random_state(Eigen::Index n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  State X = State::zero(n);
  for (auto *vec : {&X.u, &X.v})
  {
    for (Eigen::Index i = 0; i < n; i++)
    {
      const double re = dist(rng);
      const double im = dist(rng);
      (*vec)(i) = Complex(re, im);
    }
  }
  return X;
}

Complex energy_inner(const AssembledSystem &sys, const State &X1, const State &X2)
{
  check_sizes(sys, X1);
  check_sizes(sys, X2);
  // a.dot(b) = a^H b in Eigen.
  return X2.u.dot(sys.K_tot * X1.u) + X2.v.dot(sys.M_H * X1.v);
}

double energy_norm(const AssembledSystem &sys, const State &X)
{
  return std::sqrt(std::max(0.0, energy_inner(sys, X, X).real()));
}

ComplexVector apply_mass_inverse(const AssembledSystem &sys, const ComplexVector &b)
{
  const Eigen::VectorXd re = sys.mass_solver->solve(b.real());
  const Eigen::VectorXd im = sys.mass_solver->solve(b.imag());
  ComplexVector x(b.size());
  x.real() = re;
  x.imag() = im;
  return x;
}

State apply_generator(const AssembledSystem &sys, const State &X)
{
  check_sizes(sys, X);
  const ComplexVector load = sys.K_tot * X.u + sys.alpha * (sys.M_g1 * X.v);
  return {-X.v, apply_mass_inverse(sys, load)};
}

double dissipation_residual(const AssembledSystem &sys, const State &X)
{
  const Complex lhs = energy_inner(sys, apply_generator(sys, X), X);
  const double damping = sys.alpha * X.v.dot(sys.M_g1 * X.v).real();
  const Complex uv = X.v.dot(sys.K_tot * X.u);  // (u, v)_V
  const Complex rhs(damping, 2.0 * uv.imag());
  const double scale = std::max(1.0, energy_inner(sys, X, X).real());
  return std::abs(lhs - rhs) / scale;
}

ShiftedSolver::ShiftedSolver(const AssembledSystem &sys, Complex lambda,
                             SolverSettings settings)
  : sys_(&sys), lambda_(lambda), settings_(settings)
{
  ComplexSparseMatrix S = to_complex(sys.K_tot) + (lambda * sys.alpha) * to_complex(sys.M_g1) +
                          (lambda * lambda) * to_complex(sys.M_H);
  S.makeCompressed();
  double scale = 0.0;
  for (Eigen::Index k = 0; k < S.nonZeros(); k++)
  {
    scale = std::max(scale, std::abs(S.valuePtr()[k]));
  }

  lu_.analyzePattern(S);
  lu_.factorize(S);
  std::ostringstream where;
  where << "S(lambda) at lambda = " << lambda.real() << (lambda.imag() < 0 ? " - " : " + ")
        << std::abs(lambda.imag()) << "i";
  if (lu_.info() == Eigen::NumericalIssue)
  {
    throw AtEigenvalueError("zero pivot while factoring " + where.str());
  }
  if (lu_.info() != Eigen::Success)
  {
    throw LinearSolverError("sparse LU failed for " + where.str() + ": " + lu_.lastErrorMessage());
  }

  // The diagonal blocks of U live in the supernodes of the L storage.
  const auto L = lu_.matrixL();
  using Supernodal = std::remove_cvref_t<decltype(L.m_mapL)>;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < S.cols(); j++)
  {
    for (typename Supernodal::InnerIterator it(L.m_mapL, j); it; ++it)
    {
      if (it.index() == j)
      {
        min_pivot = std::min(min_pivot, std::abs(it.value()));
        break;
      }
    }
  }
  pivot_ratio_ = scale > 0.0 ? min_pivot / scale : 0.0;

  // Two steps of inverse iteration bound the smallest singular value from above; partial
  // pivoting alone does not always expose a singular S(lambda) through a tiny pivot.
  double sigma_bound = std::numeric_limits<double>::infinity();
  if (settings_.pivot_tolerance > 0.0)
  {
    std::mt19937_64 rng(0x5eed);
    ComplexVector z = random_state(S.rows(), rng).u.normalized();
    for (int it = 0; it < 2; it++)
    {
      const ComplexVector y = lu_.solve(z);
      const double ny = y.norm();
      if (!std::isfinite(ny) || ny == 0.0)
      {
        sigma_bound = 0.0;
        break;
      }
      sigma_bound = 1.0 / ny;
      z = y / ny;
    }
  }
  singular_ratio_ = std::min(pivot_ratio_, scale > 0.0 ? sigma_bound / scale : 0.0);
  if (!(singular_ratio_ >= settings_.pivot_tolerance))
  {
    std::ostringstream msg;
    msg << where.str() << " is numerically singular (pivot ratio " << pivot_ratio_
        << ", singular-value ratio " << sigma_bound / scale << ")";
    throw AtEigenvalueError(msg.str());
  }
}

ComplexVector ShiftedSolver::solve_schur(const ComplexVector &rhs) const
{
  ComplexVector x = lu_.solve(rhs);
  if (!x.allFinite())
  {
    throw LinearSolverError("non-finite Schur solution");
  }
  return x;
}

State ShiftedSolver::solve_once(const State &F) const
{
  const auto &s = *sys_;
  // (D + lambda M) f with D = alpha M_g1.
  const ComplexVector rhs = s.M_H * F.v + s.alpha * (s.M_g1 * F.u) + lambda_ * (s.M_H * F.u);
  State X;
  X.u = solve_schur(rhs);
  X.v = lambda_ * X.u - F.u;
  return X;
}

State ShiftedSolver::apply_shifted(const State &X) const
{
  State AX = apply_generator(*sys_, X);
  AX.u += lambda_ * X.u;
  AX.v += lambda_ * X.v;
  return AX;
}

double ShiftedSolver::relative_residual(const State &X, const State &F) const
{
  const double r = energy_norm(*sys_, apply_shifted(X) - F);
  const double f = energy_norm(*sys_, F);
  return f > 0.0 ? r / f : r;
}

ResolventSolve ShiftedSolver::solve(const State &F, bool check_residual) const
{
  check_sizes(*sys_, F);
  ResolventSolve out;
  out.lambda = lambda_;
  out.factorization_reused = solves_.fetch_add(1) > 0;
  out.X = solve_once(F);
  if (!check_residual)
  {
    return out;
  }
  out.residual = relative_residual(out.X, F);
  if (out.residual > settings_.residual_tolerance)
  {
    out.X += solve_once(F - apply_shifted(out.X));
    out.residual = relative_residual(out.X, F);
  }
  if (!(out.residual <= settings_.residual_tolerance))
  {
    std::ostringstream msg;
    msg << "resolvent residual " << out.residual << " exceeds tolerance "
        << settings_.residual_tolerance;
    throw LinearSolverError(msg.str());
  }
  return out;
}

State ShiftedSolver::solve_adjoint(const State &F) const
{
  check_sizes(*sys_, F);
  solves_.fetch_add(1);
  const auto &s = *sys_;
  const Complex lc = std::conj(lambda_);
  // A*[u, v] = [v, M^{-1}(-K u + D v)]: eliminate v = f - conj(lambda) u, which leaves
  // S(conj(lambda)) = conj(S(lambda)) acting on u.
  const ComplexVector rhs = s.alpha * (s.M_g1 * F.u) + lc * (s.M_H * F.u) - s.M_H * F.v;
  State X;
  X.u = solve_schur(rhs.conjugate()).conjugate();
  X.v = F.u - lc * X.u;
  return X;
}

ResolventSolve resolve(const AssembledSystem &sys, Complex lambda, const State &F)
{
  ShiftedSolver solver(sys, lambda);
  return solver.solve(F);
}

void write_state_csv(std::ostream &os, const State &X)
{
  const auto precision = os.precision(17);
  os << "node,re_u,im_u,re_v,im_v\n";
  for (Eigen::Index i = 0; i < X.size(); i++)
  {
    os << i << ',' << X.u(i).real() << ',' << X.u(i).imag() << ',' << X.v(i).real() << ','
       << X.v(i).imag() << '\n';
  }
  os.precision(precision);
}

}  // namespace dynbc
