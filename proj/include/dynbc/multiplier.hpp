#ifndef DYNBC_MULTIPLIER_HPP
#define DYNBC_MULTIPLIER_HPP

#include <functional>
#include <iosfwd>
#include <vector>
#include "dynbc/geometry.hpp"

namespace dynbc
{

// Real vector field h with Jacobian J_h = [d_j h_i]; central differences when no analytic
// Jacobian is supplied.
struct VectorField
{
  std::function<Vec2(const Vec2 &)> h;
  std::function<Mat2(const Vec2 &)> jacobian;
  double fd_step = 1e-5;

  Vec2 value(const Vec2 &x) const;
  Mat2 jacobian_at(const Vec2 &x) const;
};

VectorField radial_field();    // h(x) = x
VectorField rotation_field();  // h(x, y) = (y, -x)

// h = grad f with J_h the Hessian of f.
VectorField levelset_field(const LevelSetDomain &domain);

// Smallest eigenvalue of (J + J^T) / 2.
double min_symmetric_eigenvalue(const Mat2 &J);

enum class SampleKind
{
  Interior,
  GammaZero,
  GammaOne
};

struct MultiplierSample
{
  SampleKind kind;
  Vec2 x;
  double value;  // lambda_min(sym J_h) inside, h . nu on the boundary
  double parallel_residual;  // |h - (h . nu) nu| on the boundary, 0 inside
};

struct MultiplierSettings
{
  // Relative to max |h| over the samples. The strict value applies to fields whose normals
  // are exact; the polygonal one absorbs chord-versus-curve normal errors.
  double exact_tolerance = 1e-8;
  double polygonal_tolerance = 1e-3;
};

struct MultiplierReport
{
  double rho = 0.0;
  double gamma0_parallel_residual = 0.0;
  double gamma0_max_hnu = 0.0;
  double m = 0.0;
  double h_scale = 0.0;
  double tolerance = 0.0;  // polygonal reading, absolute
  double strict_tolerance = 0.0;  // exact-geometry reading, absolute
  bool jacobian_coercive = false;   // (a): rho > 0
  bool gamma0_aligned = false;      // (b) with the polygonal tolerance
  bool gamma0_aligned_strict = false;  // (b) with the exact-geometry tolerance
  bool gamma1_outgoing = false;     // (c): m > 0
  std::vector<MultiplierSample> samples;

  bool passed() const { return jacobian_coercive && gamma0_aligned && gamma1_outgoing; }
};

// Samples at triangle barycenters and boundary-edge midpoints; normals from outward_normal.
MultiplierReport check_hypotheses(const VectorField &field, const Mesh &mesh,
                                  const MultiplierSettings &settings = {});

// Flat key=value block.
void write_report(std::ostream &os, const MultiplierReport &report);

// CSV with header kind,x,y,value,parallel_residual.
void write_samples_csv(std::ostream &os, const MultiplierReport &report);

}  // namespace dynbc

#endif  // DYNBC_MULTIPLIER_HPP
