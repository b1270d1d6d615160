#include "dynbc/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include "dynbc/errors.hpp"

namespace dynbc
{

namespace
{

template <typename T>
T checked(T value, const char *what)
{
  if (!value.allFinite())
  {
    throw EvaluationError(std::string(what) + " returned a non-finite value");
  }
  return value;
}

const char *kind_name(SampleKind kind)
{
  switch (kind)
  {
    case SampleKind::Interior:
      return "interior";
    case SampleKind::GammaZero:
      return "gamma0";
    case SampleKind::GammaOne:
      return "gamma1";
  }
  return "?";
}

}  // namespace

Vec2 VectorField::value(const Vec2 &x) const
{
  if (!h)
  {
    throw EvaluationError("vector field has no h callback");
  }
  try
  {
    return checked(h(x), "vector field");
  }
  catch (const EvaluationError &)
  {
    throw;
  }
  catch (const std::exception &e)
  {
    throw EvaluationError(std::string("vector field evaluation failed: ") + e.what());
  }
}

Mat2 VectorField::jacobian_at(const Vec2 &x) const
{
  if (jacobian)
  {
    try
    {
      return checked(jacobian(x), "Jacobian");
    }
    catch (const EvaluationError &)
    {
      throw;
    }
    catch (const std::exception &e)
    {
      throw EvaluationError(std::string("Jacobian evaluation failed: ") + e.what());
    }
  }
  Mat2 J;
  for (int j = 0; j < 2; j++)
  {
    Vec2 step = Vec2::Zero();
    step(j) = fd_step;
    J.col(j) = (value(x + step) - value(x - step)) / (2.0 * fd_step);
  }
  return J;
}

VectorField radial_field()
{
  VectorField f;
  f.h = [](const Vec2 &x) { return x; };
  f.jacobian = [](const Vec2 &) { return Mat2::Identity().eval(); };
  return f;
}

VectorField rotation_field()
{
  VectorField f;
  f.h = [](const Vec2 &x) { return Vec2(x.y(), -x.x()); };
  f.jacobian = [](const Vec2 &) {
    Mat2 J;
    J << 0.0, 1.0, -1.0, 0.0;
    return J;
  };
  return f;
}

VectorField levelset_field(const LevelSetDomain &domain)
{
  VectorField f;
  f.h = domain.grad_f;
  f.jacobian = domain.hessian;
  return f;
}

double min_symmetric_eigenvalue(const Mat2 &J)
{
  const double a = J(0, 0), d = J(1, 1);
  const double b = 0.5 * (J(0, 1) + J(1, 0));
  return 0.5 * (a + d) - std::hypot(0.5 * (a - d), b);
}

MultiplierReport check_hypotheses(const VectorField &field, const Mesh &mesh,
                                  const MultiplierSettings &settings)
{
  MultiplierReport r;
  r.rho = std::numeric_limits<double>::infinity();
  r.m = std::numeric_limits<double>::infinity();
  r.gamma0_max_hnu = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < mesh.triangle_count(); t++)
  {
    const Vec2 x = mesh.barycenter(t);
    const double lmin = min_symmetric_eigenvalue(field.jacobian_at(x));
    r.rho = std::min(r.rho, lmin);
    r.h_scale = std::max(r.h_scale, field.value(x).norm());
    r.samples.push_back({SampleKind::Interior, x, lmin, 0.0});
  }
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); e++)
  {
    const Vec2 x = mesh.edge_midpoint(e);
    const Vec2 nu = outward_normal(mesh, e);
    const Vec2 h = field.value(x);
    const double hn = h.dot(nu);
    const double parallel = (h - hn * nu).norm();
    r.h_scale = std::max(r.h_scale, h.norm());
    if (mesh.boundary_edges()[e].tag == BoundaryTag::GammaZero)
    {
      r.gamma0_parallel_residual = std::max(r.gamma0_parallel_residual, parallel);
      r.gamma0_max_hnu = std::max(r.gamma0_max_hnu, hn);
      r.samples.push_back({SampleKind::GammaZero, x, hn, parallel});
    }
    else
    {
      r.m = std::min(r.m, hn);
      r.samples.push_back({SampleKind::GammaOne, x, hn, parallel});
    }
  }

  r.tolerance = settings.polygonal_tolerance * r.h_scale;
  r.strict_tolerance = settings.exact_tolerance * r.h_scale;
  r.jacobian_coercive = r.rho > 0.0;
  r.gamma0_aligned = r.gamma0_parallel_residual <= r.tolerance && r.gamma0_max_hnu <= r.tolerance;
  r.gamma0_aligned_strict =
      r.gamma0_parallel_residual <= r.strict_tolerance && r.gamma0_max_hnu <= r.strict_tolerance;
  r.gamma1_outgoing = r.m > 0.0;
  return r;
}

void write_report(std::ostream &os, const MultiplierReport &r)
{
  const auto precision = os.precision(17);
  auto verdict = [](bool ok) { return ok ? "pass" : "fail"; };
  os << "rho=" << r.rho << '\n'
     << "gamma0_parallel_residual=" << r.gamma0_parallel_residual << '\n'
     << "gamma0_max_hnu=" << r.gamma0_max_hnu << '\n'
     << "m=" << r.m << '\n'
     << "h_scale=" << r.h_scale << '\n'
     << "tolerance=" << r.tolerance << '\n'
     << "strict_tolerance=" << r.strict_tolerance << '\n'
     << "verdict_a=" << verdict(r.jacobian_coercive) << '\n'
     << "verdict_b=" << verdict(r.gamma0_aligned) << '\n'
     << "verdict_b_strict=" << verdict(r.gamma0_aligned_strict) << '\n'
     << "verdict_c=" << verdict(r.gamma1_outgoing) << '\n'
     << "verdict=" << verdict(r.passed()) << '\n';
  os.precision(precision);
}

void write_samples_csv(std::ostream &os, const MultiplierReport &report)
{
  const auto precision = os.precision(17);
  os << "kind,x,y,value,parallel_residual\n";
  for (const auto &s : report.samples)
  {
    os << kind_name(s.kind) << ',' << s.x.x() << ',' << s.x.y() << ',' << s.value << ','
       << s.parallel_residual << '\n';
  }
  os.precision(precision);
}

}  // namespace dynbc
