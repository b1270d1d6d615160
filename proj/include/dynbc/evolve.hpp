#ifndef DYNBC_EVOLVE_HPP
#define DYNBC_EVOLVE_HPP

#include <iosfwd>
#include <memory>
#include <vector>
#include "dynbc/operator.hpp"

namespace dynbc
{

//
// Energy history of one run. energies[k] = |X(t_k)|^2 / 2. dissipation[0] is the
// instantaneous rate alpha v0^H M_g1 v0; for k >= 1 it is the rate at the midpoint of step
// k-1 -> k, so that E_k - E_{k-1} = -dt dissipation[k] in exact arithmetic.
//
struct EnergyTrace
{
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> dissipation;
  double graph_norm0 = 0.0;  // (|X0|^2 + |A X0|^2)^{1/2}
  double dt = 0.0;
  double max_balance_error = 0.0;  // max_k |E_k - E_{k-1} + dt D_k|, absolute
  double cumulative_dissipation = 0.0;
};

struct DecayFit
{
  double exponent = 0.0;  // slope of log E against log t
  double constant = 0.0;  // E ~ constant * t^exponent
  double t_lo = 0.0, t_hi = 0.0;
  double sup_tE = 0.0;  // max over the window of t E(t) / graph_norm0^2
  double residual = 0.0;  // rms deviation of log E from the fitted line
  std::size_t samples = 0;
};

//
// Implicit midpoint (Cayley) propagator for dX/dt + A X = 0:
//
//   X' = (I + dt/2 A)^{-1} (I - dt/2 A) X = 2 lambda (A + lambda)^{-1} X - X,  lambda = 2/dt.
//
// Exactly norm-preserving for alpha = 0 and contractive for alpha > 0.
//
class MidpointPropagator
{
public:
  MidpointPropagator(const AssembledSystem &sys, double dt);

  State step(const State &X) const;
  double dt() const { return dt_; }

private:
  const AssembledSystem *sys_;
  double dt_;
  std::unique_ptr<ShiftedSolver> solver_;
};

State step_midpoint(const AssembledSystem &sys, const State &X, double dt);

EnergyTrace simulate(const AssembledSystem &sys, const State &X0, double T, double dt);

struct SmoothedData
{
  State X0;
  double graph_norm = 0.0;
};

// X0 = (A + I)^{-k} Y together with its graph norm.
SmoothedData smooth_data(const AssembledSystem &sys, const State &Y, int k);

double graph_norm(const AssembledSystem &sys, const State &X);

DecayFit fit_decay(const EnergyTrace &trace, double t_lo, double t_hi);

// Half the shortest mesh edge.
double default_time_step(const Mesh &mesh);

// Smooth initial bump: u = exp(-|x - c|^2 / w^2), v = 0.
State gaussian_bump(const Mesh &mesh, const Vec2 &center, double width);

// CSV with header t,E,D.
void write_trace_csv(std::ostream &os, const EnergyTrace &trace);

}  // namespace dynbc

#endif  // DYNBC_EVOLVE_HPP
