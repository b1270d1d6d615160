#ifndef DYNBC_ERRORS_HPP
#define DYNBC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dynbc
{

// Precondition violations on user-supplied parameters.
class InvalidArgument : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Degenerate geometry met while assembling element matrices.
class AssemblyError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Sparse factorization breakdown or an unacceptable solve residual.
class LinearSolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// The requested shift is (numerically) an eigenvalue of the generator.
class AtEigenvalueError : public LinearSolverError
{
public:
  using LinearSolverError::LinearSolverError;
};

// Iterative eigen/singular-value solver hit its iteration cap.
class ConvergenceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A user-supplied field callback failed or returned non-finite values.
class EvaluationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynbc

#endif  // DYNBC_ERRORS_HPP
