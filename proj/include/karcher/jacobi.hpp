#pragma once

#include "karcher/manifold.hpp"

#include <functional>
#include <vector>

namespace karcher {

/// Jacobi field J along an arclength geodesic gamma: [0, tau] -> M with
/// J(0) = 0 and J(tau) = end_value.
struct JacobiBVP {
  Geodesic geodesic;
  TangentVector end_value;

  double tau() const { return geodesic.length; }
};

JacobiBVP make_bvp(const Manifold& M, const Point& p, const Point& q, const TangentVector& V);

struct JacobiSolution {
  TangentVector jdot_at_tau;
  TangentVector jdot_at_0;
};

/// Shooting over a parallel orthonormal frame: the frame components a(t) of J
/// satisfy a'' = -K(t) a with K_kl = g(R(E_l,T)T, E_k). With J(0) = 0 only the
/// fundamental solution with a(0) = 0, a'(0) = I is needed.
JacobiSolution solve_bvp(const Manifold& M, const JacobiBVP& bvp);

/// J(t) at the requested times (ascending, within [0, tau]).
std::vector<TangentVector> sample_jacobi_field(const Manifold& M, const JacobiBVP& bvp,
                                               const std::vector<double>& times);

/// Parallel orthonormal frame along a geodesic, sampled at `times`.
struct FrameField {
  std::vector<double> times;
  std::vector<Point> points;
  std::vector<Mat> frames;  // columns E_k(t)
};

FrameField frame_field(const Manifold& M, const Geodesic& g, const std::vector<double>& times);

/// |tau J'(tau) - V| against the quadratic bound C0 tau^2 |V|.
struct BoundaryDerivativeReport {
  double tau = 0.0;
  double deviation = 0.0;  // |tau J'(tau) - V|
  double ratio = 0.0;      // deviation / (C0 tau^2 |V|), 0 on flat space
  bool within_bound = false;
};

BoundaryDerivativeReport boundary_derivative_estimate_check(const Manifold& M, const JacobiBVP& bvp);

/// tau D_s J'(0, tau) = Nabla^2_{V,V} X_p at q, by transported central
/// differences of solve_bvp along delta(s) = exp_q(s V).
TangentVector second_variation(const Manifold& M, const JacobiBVP& bvp, double step = 1e-4);

using MatrixOfTime = std::function<Mat(double)>;
using VectorOfTime = std::function<Vec(double)>;

struct OdeBoundReport {
  double max_udot = 0.0;
  double max_b = 0.0;
  double max_a_tau2 = 0.0;
  double bound = 0.0;  // 3 * max_b * tau
  bool holds = false;
};

/// Solves U'' = A U + B, U(0) = U(tau) = 0, and compares max |U'| with 3 max|B| tau.
/// Requires max ||A(t)|| tau^2 <= 1 on the sample grid.
OdeBoundReport ode_bound_check(const MatrixOfTime& A, const VectorOfTime& B, double tau, int samples = 400);

}  // namespace karcher
