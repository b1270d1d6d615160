#include "dynbc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace dynbc
{

namespace
{

using ComplexMatrix = Eigen::MatrixXcd;

struct Pair
{
  Complex mu;
  ComplexVector u;
};

double real_part_min(const std::vector<Complex> &values)
{
  double m = std::numeric_limits<double>::infinity();
  for (const auto &z : values)
  {
    m = std::min(m, z.real());
  }
  return m;
}

// Root of u^H (mu^2 M - mu D + K) u = 0 closest to `guess`.
Complex rayleigh_functional(const AssembledSystem &sys, const ComplexVector &u, Complex guess)
{
  const Complex a = u.dot(sys.M_H * u);
  const Complex b = -sys.alpha * u.dot(sys.M_g1 * u);
  const Complex c = u.dot(sys.K_tot * u);
  const Complex disc = std::sqrt(b * b - 4.0 * a * c);
  const Complex r1 = (-b + disc) / (2.0 * a);
  const Complex r2 = (-b - disc) / (2.0 * a);
  return std::abs(r1 - guess) <= std::abs(r2 - guess) ? r1 : r2;
}

// A few steps of inverse iteration on the pencil, used only when the eigensolver output
// misses the residual target.
void refine(const AssembledSystem &sys, Pair &pair, double target)
{
  for (int it = 0; it < 4 && pencil_residual(sys, pair.mu, pair.u) > target; it++)
  {
    try
    {
      SolverSettings loose;
      loose.pivot_tolerance = 0.0;
      loose.residual_tolerance = std::numeric_limits<double>::infinity();
      // S(-mu) is exactly the pencil at mu.
      ShiftedSolver solver(sys, -pair.mu, loose);
      ComplexVector next = solver.solve_schur(sys.M_H * pair.u);
      next.normalize();
      pair.u = std::move(next);
      pair.mu = rayleigh_functional(sys, pair.u, pair.mu);
    }
    catch (const LinearSolverError &)
    {
      return;  // shift landed on the eigenvalue itself
    }
  }
}

SpectrumResult finish(const AssembledSystem &sys, std::vector<Pair> pairs, Complex shift,
                      const char *method)
{
  std::sort(pairs.begin(), pairs.end(), [shift](const Pair &a, const Pair &b) {
    return std::abs(a.mu - shift) < std::abs(b.mu - shift);
  });
  SpectrumResult out;
  out.method = method;
  for (auto &p : pairs)
  {
    refine(sys, p, 1e-10);
    out.residuals.push_back(pencil_residual(sys, p.mu, p.u));
    out.eigenvalues.push_back(p.mu);
    out.modes.push_back(std::move(p.u));
  }
  out.min_real_part = real_part_min(out.eigenvalues);
  return out;
}

SpectrumResult dense_eigs(const AssembledSystem &sys, int count, Complex shift)
{
  const Eigen::Index n = sys.size();
  const Eigen::MatrixXd K(sys.K_tot), M(sys.M_H), D = sys.alpha * Eigen::MatrixXd(sys.M_g1);
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  A.bottomLeftCorner(n, n) = llt.solve(K);
  A.bottomRightCorner(n, n) = llt.solve(D);

  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success)
  {
    throw ConvergenceError("dense eigensolver failed on the generator matrix");
  }
  const ComplexVector values = es.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(2 * n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a) - shift) < std::abs(values(b) - shift);
  });
  std::vector<Pair> pairs;
  for (int i = 0; i < count; i++)
  {
    const auto k = order[static_cast<std::size_t>(i)];
    ComplexVector u = es.eigenvectors().col(k).head(n);
    u.normalize();
    pairs.push_back({values(k), std::move(u)});
  }
  return finish(sys, std::move(pairs), shift, "dense");
}

//
// Krylov subspace of (A - shift)^{-1} with thick restarts. The basis is orthonormal in the
// energy product; after each cycle the wanted Ritz vectors are orthonormalized and kept,
// giving a Krylov decomposition T V_p = V_p H_p + f b^H from which the expansion continues.
//
class ShiftInvertArnoldi
{
public:
  ShiftInvertArnoldi(const AssembledSystem &sys, Complex shift)
    : sys_(sys), n_(sys.size()), solver_(sys, -shift)
  {
  }

  ComplexVector gram(const ComplexVector &z) const
  {
    ComplexVector g(2 * n_);
    g.head(n_) = sys_.K_tot * z.head(n_);
    g.tail(n_) = sys_.M_H * z.tail(n_);
    return g;
  }

  double norm(const ComplexVector &z) const
  {
    return std::sqrt(std::max(0.0, z.dot(gram(z)).real()));
  }

  ComplexVector apply(const ComplexVector &z) const
  {
    State F{z.head(n_), z.tail(n_)};
    const auto X = solver_.solve(F, false).X;
    ComplexVector out(2 * n_);
    out << X.u, X.v;
    return out;
  }

private:
  const AssembledSystem &sys_;
  Eigen::Index n_;
  ShiftedSolver solver_;
};

SpectrumResult krylov_eigs(const AssembledSystem &sys, int count, Complex shift,
                           const EigenSettings &settings)
{
  const Eigen::Index n = sys.size();
  const Eigen::Index dim = 2 * n;
  Eigen::Index m = settings.subspace > 0 ? settings.subspace : std::max(2 * count + 10, count + 20);
  m = std::min(m, dim - 1);
  if (m <= count)
  {
    throw InvalidArgument("Krylov subspace too small for the requested eigenvalue count");
  }

  ShiftInvertArnoldi op(sys, shift);
  ComplexMatrix V = ComplexMatrix::Zero(dim, m + 1);
  ComplexMatrix H = ComplexMatrix::Zero(m + 1, m);

  std::mt19937_64 rng(settings.seed);
  const State start = random_state(n, rng);
  V.col(0) << start.u, start.v;
  V.col(0) /= op.norm(V.col(0));

  Eigen::Index p = 0;
  std::vector<Pair> converged;
  for (int restart = 0; restart <= settings.max_restarts; restart++)
  {
    for (Eigen::Index j = p; j < m; j++)
    {
      ComplexVector w = op.apply(V.col(j));
      for (int pass = 0; pass < 2; pass++)
      {
        const ComplexVector h = V.leftCols(j + 1).adjoint() * op.gram(w);
        w -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      const double beta = op.norm(w);
      H(j + 1, j) = beta;
      if (!(beta > 0.0))
      {
        throw ConvergenceError("Krylov breakdown: exact invariant subspace");
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<ComplexMatrix> ces(H.topRows(m));
    const ComplexVector theta = ces.eigenvalues();
    const ComplexMatrix Y = ces.eigenvectors();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return std::abs(theta(a)) > std::abs(theta(b)); });

    int good = 0;
    converged.clear();
    for (int i = 0; i < count; i++)
    {
      const auto k = order[static_cast<std::size_t>(i)];
      const ComplexVector y = Y.col(k).normalized();
      const double ritz_residual = std::abs((H.row(m) * y).value());
      if (ritz_residual <= settings.tolerance * std::abs(theta(k)))
      {
        good++;
        ComplexVector u = (V.leftCols(m) * y).head(n);
        u.normalize();
        converged.push_back({shift + 1.0 / theta(k), std::move(u)});
      }
    }
    if (good == count)
    {
      return finish(sys, std::move(converged), shift, "shift-invert");
    }

    // Keep the wanted Ritz vectors plus a margin.
    const Eigen::Index keep = std::min<Eigen::Index>(count + (m - count) / 2, m - 1);
    ComplexMatrix Yk(m, keep);
    for (Eigen::Index i = 0; i < keep; i++)
    {
      Yk.col(i) = Y.col(order[static_cast<std::size_t>(i)]);
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(Yk);
    const ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(m, keep);

    const ComplexMatrix Vk = V.leftCols(m) * Q;
    const ComplexMatrix Hk = Q.adjoint() * H.topRows(m) * Q;
    const Eigen::RowVectorXcd bk = H.row(m) * Q;
    const ComplexVector f = V.col(m);
    V.setZero();
    H.setZero();
    V.leftCols(keep) = Vk;
    V.col(keep) = f;
    H.topLeftCorner(keep, keep) = Hk;
    H.row(keep).head(keep) = bk;
    p = keep;
  }

  SpectrumResult partial = finish(sys, std::move(converged), shift, "shift-invert");
  throw EigenConvergenceError("shift-invert Krylov iteration did not converge", partial);
}

std::vector<double> logspace(double lo, double hi, int n)
{
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; i++)
  {
    out[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.back() = hi;
  return out;
}

}  // namespace

double pencil_residual(const AssembledSystem &sys, Complex mu, const ComplexVector &u)
{
  const ComplexVector r = (mu * mu) * (sys.M_H * u) - (mu * sys.alpha) * (sys.M_g1 * u) +
                          sys.K_tot * u;
  return r.norm() / u.norm();
}

SpectrumResult quadratic_eigs(const AssembledSystem &sys, int count, Complex shift,
                              const EigenSettings &settings)
{
  if (count < 1 || count > 2 * sys.size())
  {
    throw InvalidArgument("eigenvalue count must lie in [1, 2 n]");
  }
  // Rejects a shift that is itself an eigenvalue, whatever the method.
  ShiftedSolver probe(sys, -shift);
  (void)probe;

  bool dense = settings.method == EigenMethod::Dense;
  if (settings.method == EigenMethod::Auto)
  {
    dense = sys.size() < settings.dense_threshold;
  }
  return dense ? dense_eigs(sys, count, shift) : krylov_eigs(sys, count, shift, settings);
}

ResolventSample resolvent_norm(const AssembledSystem &sys, double omega,
                               const PowerSettings &settings)
{
  ShiftedSolver solver(sys, Complex(0.0, omega));
  std::mt19937_64 rng(settings.seed);
  State x = random_state(sys.size(), rng);
  x = Complex(1.0 / energy_norm(sys, x)) * x;

  ResolventSample sample;
  sample.omega = omega;
  double prev = 0.0, prev_delta = 0.0;
  for (int it = 1; it <= settings.max_iterations; it++)
  {
    const State y = solver.solve(x, false).X;
    const double est = energy_inner(sys, y, y).real();
    sample.estimates.push_back(est);
    sample.iterations = it;
    if (it > 1)
    {
      const double delta = std::abs(est - prev);
      // Geometric tail estimate of the remaining error.
      const double rate = prev_delta > 0.0 ? delta / prev_delta : 0.0;
      const double remaining = rate > 0.0 && rate < 1.0 ? delta * rate / (1.0 - rate) : delta;
      if (delta <= settings.tolerance * est && remaining <= settings.tolerance * est)
      {
        sample.norm = std::sqrt(est);
        sample.scaled = sample.norm / (omega * omega);
        return sample;
      }
      prev_delta = delta;
    }
    prev = est;
    x = solver.solve_adjoint(y);
    const double nx = energy_norm(sys, x);
    if (!(nx > 0.0))
    {
      throw ConvergenceError("power iteration collapsed to the zero vector");
    }
    x = Complex(1.0 / nx) * x;
  }
  std::ostringstream msg;
  msg << "resolvent power iteration did not converge at omega = " << omega << " after "
      << settings.max_iterations << " iterations";
  throw ConvergenceError(msg.str());
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); i++)
  {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

SweepResult resolvent_sweep(const AssembledSystem &sys, double omega_min, double omega_max,
                            int n_samples, const SweepSettings &settings)
{
  if (!(omega_min >= 1.0) || !(omega_max > omega_min) || n_samples < 8)
  {
    throw InvalidArgument("sweep needs 1 <= omega_min < omega_max and at least 8 samples");
  }
  const auto omegas = logspace(omega_min, omega_max, n_samples);
  const auto count = omegas.size();
  std::vector<ResolventSample> samples(count);
  std::vector<std::exception_ptr> errors(count);

  const auto jobs = static_cast<std::size_t>(std::clamp(settings.jobs, 1, n_samples));
  auto worker = [&](std::size_t first) {
    for (std::size_t i = first; i < count; i += jobs)
    {
      try
      {
        samples[i] = resolvent_norm(sys, omegas[i], settings.power);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1)
  {
    worker(0);
  }
  else
  {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; w++)
    {
      threads.emplace_back(worker, w);
    }
    for (auto &t : threads)
    {
      t.join();
    }
  }
  for (const auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }

  SweepResult out;
  out.samples = std::move(samples);
  std::vector<double> px, py, ax, ay;
  for (std::size_t i = 0; i < count; i++)
  {
    const auto &s = out.samples[i];
    out.sup_scaled = std::max(out.sup_scaled, s.scaled);
    ax.push_back(s.omega);
    ay.push_back(s.norm);
    if (i > 0 && i + 1 < count && s.norm > out.samples[i - 1].norm &&
        s.norm > out.samples[i + 1].norm)
    {
      out.peaks.push_back(i);
      px.push_back(s.omega);
      py.push_back(s.norm);
    }
  }
  out.slope_from_peaks = px.size() >= 2;
  out.slope = out.slope_from_peaks ? loglog_slope(px, py) : loglog_slope(ax, ay);
  return out;
}

double resolved_frequency_limit(const Mesh &mesh)
{
  return 1.0 / mesh.max_edge_length();
}

void write_sweep_csv(std::ostream &os, const SweepResult &sweep)
{
  const auto precision = os.precision(17);
  os << "omega,norm,scaled,iters\n";
  for (const auto &s : sweep.samples)
  {
    os << s.omega << ',' << s.norm << ',' << s.scaled << ',' << s.iterations << '\n';
  }
  os.precision(precision);
}

void write_spectrum_csv(std::ostream &os, const SpectrumResult &spectrum)
{
  const auto precision = os.precision(17);
  os << "re_mu,im_mu,residual\n";
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); i++)
  {
    os << spectrum.eigenvalues[i].real() << ',' << spectrum.eigenvalues[i].imag() << ','
       << spectrum.residuals[i] << '\n';
  }
  os.precision(precision);
}

}  // namespace dynbc
