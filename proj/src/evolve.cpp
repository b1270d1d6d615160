#include "dynbc/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include "dynbc/errors.hpp"

namespace dynbc
{

namespace
{

double damping_rate(const AssembledSystem &sys, const State &X)
{
  return sys.alpha * X.v.dot(sys.M_g1 * X.v).real();
}

}  // namespace

MidpointPropagator::MidpointPropagator(const AssembledSystem &sys, double dt)
  : sys_(&sys), dt_(dt)
{
  if (!(dt > 0.0))
  {
    throw InvalidArgument("time step must be positive");
  }
  solver_ = std::make_unique<ShiftedSolver>(sys, Complex(2.0 / dt, 0.0));
}

State MidpointPropagator::step(const State &X) const
{
  const double lambda = 2.0 / dt_;
  auto solve = solver_->solve(X);
  solve.X.u = 2.0 * lambda * solve.X.u - X.u;
  solve.X.v = 2.0 * lambda * solve.X.v - X.v;
  return std::move(solve.X);
}

State step_midpoint(const AssembledSystem &sys, const State &X, double dt)
{
  return MidpointPropagator(sys, dt).step(X);
}

double graph_norm(const AssembledSystem &sys, const State &X)
{
  const double a = energy_norm(sys, X);
  const double b = energy_norm(sys, apply_generator(sys, X));
  return std::sqrt(a * a + b * b);
}

EnergyTrace simulate(const AssembledSystem &sys, const State &X0, double T, double dt)
{
  if (!(T > 0.0))
  {
    throw InvalidArgument("simulation horizon must be positive");
  }
  MidpointPropagator prop(sys, dt);
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));

  EnergyTrace trace;
  trace.dt = dt;
  trace.graph_norm0 = graph_norm(sys, X0);
  trace.times.reserve(steps + 1);
  trace.energies.reserve(steps + 1);
  trace.dissipation.reserve(steps + 1);

  State X = X0;
  double E = 0.5 * energy_inner(sys, X, X).real();
  trace.times.push_back(0.0);
  trace.energies.push_back(E);
  trace.dissipation.push_back(damping_rate(sys, X));
  for (std::size_t k = 1; k <= steps; k++)
  {
    State next = prop.step(X);
    const State mid = 0.5 * (X + next);
    const double D = damping_rate(sys, mid);
    const double E_next = 0.5 * energy_inner(sys, next, next).real();
    trace.max_balance_error = std::max(trace.max_balance_error, std::abs(E_next - E + dt * D));
    trace.cumulative_dissipation += dt * D;
    trace.times.push_back(static_cast<double>(k) * dt);
    trace.energies.push_back(E_next);
    trace.dissipation.push_back(D);
    X = std::move(next);
    E = E_next;
  }
  return trace;
}

SmoothedData smooth_data(const AssembledSystem &sys, const State &Y, int k)
{
  if (k < 1)
  {
    throw InvalidArgument("smoothing order must be at least 1");
  }
  ShiftedSolver solver(sys, Complex(1.0, 0.0));
  SmoothedData out{Y, 0.0};
  for (int i = 0; i < k; i++)
  {
    out.X0 = solver.solve(out.X0).X;
  }
  out.graph_norm = graph_norm(sys, out.X0);
  return out;
}

DecayFit fit_decay(const EnergyTrace &trace, double t_lo, double t_hi)
{
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
  {
    throw InvalidArgument("fit window must satisfy 0 < t_lo < t_hi");
  }
  DecayFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  std::vector<double> x, y;
  const double g2 = trace.graph_norm0 * trace.graph_norm0;
  for (std::size_t k = 0; k < trace.times.size(); k++)
  {
    const double t = trace.times[k];
    const double E = trace.energies[k];
    if (t < t_lo || t > t_hi || !(E > 0.0))
    {
      continue;
    }
    x.push_back(std::log(t));
    y.push_back(std::log(E));
    if (g2 > 0.0)
    {
      fit.sup_tE = std::max(fit.sup_tE, t * E / g2);
    }
  }
  fit.samples = x.size();
  if (x.size() < 10)
  {
    throw InvalidArgument("fit window holds fewer than 10 samples with positive energy");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    const double r = y[i] - (intercept + fit.exponent * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double default_time_step(const Mesh &mesh)
{
  return 0.5 * mesh.min_edge_length();
}

State gaussian_bump(const Mesh &mesh, const Vec2 &center, double width)
{
  const auto n = static_cast<Eigen::Index>(mesh.node_count());
  State X = State::zero(n);
  for (Eigen::Index i = 0; i < n; i++)
  {
    const double d2 = (mesh.nodes()[static_cast<std::size_t>(i)] - center).squaredNorm();
    X.u(i) = std::exp(-d2 / (width * width));
  }
  return X;
}

void write_trace_csv(std::ostream &os, const EnergyTrace &trace)
{
  const auto precision = os.precision(17);
  os << "t,E,D\n";
  for (std::size_t k = 0; k < trace.times.size(); k++)
  {
    os << trace.times[k] << ',' << trace.energies[k] << ',' << trace.dissipation[k] << '\n';
  }
  os.precision(precision);
}

}  // namespace dynbc
