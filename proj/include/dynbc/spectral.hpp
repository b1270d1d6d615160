#ifndef DYNBC_SPECTRAL_HPP
#define DYNBC_SPECTRAL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>
#include "dynbc/errors.hpp"
#include "dynbc/operator.hpp"

namespace dynbc
{

// Eigenvalues mu of the generator. Each is a root of the quadratic pencil
//   K_tot u - mu alpha M_g1 u + mu^2 M_H u = 0,   v = -mu u.
struct SpectrumResult
{
  std::vector<Complex> eigenvalues;
  std::vector<double> residuals;  // |pencil(mu) u| / |u|, Euclidean
  std::vector<ComplexVector> modes;  // position components u, unit Euclidean norm
  double min_real_part = 0.0;
  std::string method;
};

class EigenConvergenceError : public ConvergenceError
{
public:
  EigenConvergenceError(const std::string &what, SpectrumResult partial)
    : ConvergenceError(what), partial_(std::move(partial))
  {
  }
  const SpectrumResult &partial() const { return partial_; }

private:
  SpectrumResult partial_;
};

enum class EigenMethod
{
  Auto,  // dense below dense_threshold nodes, shift-invert Krylov above
  Dense,
  ShiftInvert
};

struct EigenSettings
{
  EigenMethod method = EigenMethod::Auto;
  Eigen::Index dense_threshold = 600;
  int subspace = 0;  // Krylov dimension; 0 picks max(2 count + 10, count + 20)
  int max_restarts = 300;
  double tolerance = 1e-12;  // Ritz residual relative to |theta|
  std::uint64_t seed = 7;
};

SpectrumResult quadratic_eigs(const AssembledSystem &sys, int count, Complex shift,
                              const EigenSettings &settings = {});

double pencil_residual(const AssembledSystem &sys, Complex mu, const ComplexVector &u);

struct ResolventSample
{
  double omega = 0.0;
  double norm = 0.0;  // |(A + i omega)^{-1}| in the energy operator norm
  double scaled = 0.0;  // norm / omega^2
  int iterations = 0;
  std::vector<double> estimates;  // squared-norm Rayleigh quotients per iteration
};

struct PowerSettings
{
  double tolerance = 1e-8;
  int max_iterations = 20000;
  std::uint64_t seed = 1;
};

// Largest singular value of the resolvent in the energy product, by power iteration on
// R* R where R* is the energy adjoint.
ResolventSample resolvent_norm(const AssembledSystem &sys, double omega,
                               const PowerSettings &settings = {});

struct SweepSettings
{
  PowerSettings power;
  int jobs = 1;
};

struct SweepResult
{
  std::vector<ResolventSample> samples;
  std::vector<std::size_t> peaks;  // indices of interior local maxima of the norm
  double slope = 0.0;  // least-squares slope of log norm vs log omega over the peaks
  bool slope_from_peaks = true;  // false when fewer than two peaks forced an all-sample fit
  double sup_scaled = 0.0;
};

// Log-spaced samples on [omega_min, omega_max]. The first at-eigenvalue failure (in order of
// increasing omega) aborts the sweep and is rethrown.
SweepResult resolvent_sweep(const AssembledSystem &sys, double omega_min, double omega_max,
                            int n_samples, const SweepSettings &settings = {});

// Highest frequency resolved by the mesh, 1/h with h the longest edge.
double resolved_frequency_limit(const Mesh &mesh);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

void write_sweep_csv(std::ostream &os, const SweepResult &sweep);
void write_spectrum_csv(std::ostream &os, const SpectrumResult &spectrum);

}  // namespace dynbc

#endif  // DYNBC_SPECTRAL_HPP
