#pragma once

#include "karcher/ode.hpp"
#include "karcher/types.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace karcher {

/// Curvature and radius data of a manifold.
///
/// C0 bounds the curvature tensor (1/length^2), C1 its covariant derivative
/// (1/length^3). For C_{0,1} on a ball of radius h use `c01(h)`.
struct ManifoldBounds {
  double C0 = 0.0;
  double C1 = 0.0;
  double injectivity_radius = std::numeric_limits<double>::infinity();
  double convexity_radius = std::numeric_limits<double>::infinity();

  double c01(double h) const { return C0 + h * C1; }
  void validate() const;
};

/// Tolerances of the ODE-based paths (geodesics, shooting, transport).
struct GeodesicNumerics {
  OdeOptions ode{};
  int shooting_max_iters = 50;
  double shooting_tol = 1e-10;
  double shooting_fd_step = 1e-6;
  /// Step of the transported finite difference used for second derivatives of X_p.
  double second_deriv_step = 1e-3;
};

/// Riemannian manifold in some representation (embedded model or chart).
///
/// Derived classes supply the representation primitives (inner product,
/// geodesic and transport equations, curvature operator). The geometric
/// operations default to ODE integration built on those primitives; the
/// constant-curvature models override them with closed forms.
///
/// Instances are immutable after construction and safe to share between threads.
class Manifold {
 public:
  explicit Manifold(ManifoldBounds bounds, GeodesicNumerics numerics = {});
  virtual ~Manifold() = default;

  virtual std::string kind() const = 0;
  /// Intrinsic dimension m.
  virtual int dim() const = 0;
  /// Length of coordinate vectors in this representation.
  virtual int ambient_dim() const = 0;

  const ManifoldBounds& bounds() const { return bounds_; }
  const GeodesicNumerics& numerics() const { return numerics_; }

  // Representation primitives. No validation is performed on these.
  virtual double inner(const Vec& x, const Vec& v, const Vec& w) const = 0;
  /// Columns form a g-orthonormal basis of T_x M.
  virtual Mat tangent_basis(const Vec& x) const = 0;
  /// Second derivative of a geodesic through x with velocity xdot.
  virtual Vec geodesic_accel(const Vec& x, const Vec& xdot) const = 0;
  /// Derivative of a parallel field e along a geodesic with velocity xdot.
  virtual Vec transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const = 0;
  /// R(J,T)T with the convention in which the Jacobi equation reads J'' + R(J,T)T = 0.
  virtual Vec curvature_operator(const Vec& x, const Vec& J, const Vec& T) const = 0;

  virtual void check_point(const Point& p) const;
  virtual void check_tangent(const TangentVector& v) const;

  double metric(const Point& p, const TangentVector& v, const TangentVector& w) const;
  double norm(const TangentVector& v) const;

  virtual Point exp(const Point& p, const TangentVector& v) const;
  virtual TangentVector log(const Point& p, const Point& q) const;
  virtual double dist(const Point& p, const Point& q) const;

  /// Arclength geodesic from p to q (length 0 when p == q).
  Geodesic geodesic_between(const Point& p, const Point& q) const;
  virtual Point geodesic_point(const Geodesic& g, double t) const;
  virtual TangentVector geodesic_velocity(const Geodesic& g, double t) const;
  virtual TangentVector parallel_transport(const Geodesic& g, double t0, double t1,
                                           const TangentVector& v) const;

  /// Nabla_V X_p at q, where X_p = 1/2 grad dist^2(., p).
  virtual TangentVector hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const;
  /// Nabla^2_{V,W} X_p = (nabla_V (nabla X_p))(W) at q.
  ///
  /// Not symmetric in (V, W) on curved spaces: the skew part is R(V,W)X_p.
  virtual TangentVector second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                                       const TangentVector& W) const;

  TangentVector zero_tangent(const Point& p) const { return {p, Vec::Zero(ambient_dim())}; }

 private:
  ManifoldBounds bounds_;
  GeodesicNumerics numerics_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

// ---------------------------------------------------------------------------
// Generic ODE-based routes. These are the defaults of the virtual operations
// and stay callable on every model, so closed forms can be checked against them.

struct GeodesicFlow {
  Point end;
  TangentVector velocity;
  double length = 0.0;
};

/// Integrates the geodesic equation from (p, v) up to time t, accumulating arclength.
GeodesicFlow integrate_geodesic(const Manifold& M, const Point& p, const TangentVector& v, double t);
Point exp_ode(const Manifold& M, const Point& p, const TangentVector& v);
/// Newton shooting on the endpoint map with a finite-difference Jacobian.
TangentVector log_shooting(const Manifold& M, const Point& p, const Point& q,
                           std::optional<Vec> initial_guess = std::nullopt);
TangentVector transport_ode(const Manifold& M, const Geodesic& g, double t0, double t1, const TangentVector& v);
/// Nabla_V X_p via the Jacobi boundary value problem.
TangentVector hess_half_dist_sq_jacobi(const Manifold& M, const Point& p, const Point& q, const TangentVector& V);

/// D/ds field(delta(s), P_s W) at s = 0 along delta(s) = exp_q(s V), where P_s is
/// parallel transport along delta. Central differences with Richardson extrapolation;
/// `step` is measured in arclength.
using FieldAlong = std::function<TangentVector(const Point& at, const TangentVector& transported)>;
TangentVector covariant_derivative_fd(const Manifold& M, const TangentVector& V, const TangentVector& W,
                                      const FieldAlong& field, double step);
TangentVector second_deriv_X_fd(const Manifold& M, const Point& p, const Point& q, const TangentVector& V,
                                const TangentVector& W, double step);

// ---------------------------------------------------------------------------
// Models.

class Euclidean final : public Manifold {
 public:
  explicit Euclidean(int m);

  std::string kind() const override { return "euclidean"; }
  int dim() const override { return m_; }
  int ambient_dim() const override { return m_; }

  double inner(const Vec& x, const Vec& v, const Vec& w) const override;
  Mat tangent_basis(const Vec& x) const override;
  Vec geodesic_accel(const Vec& x, const Vec& xdot) const override;
  Vec transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const override;
  Vec curvature_operator(const Vec& x, const Vec& J, const Vec& T) const override;

  Point exp(const Point& p, const TangentVector& v) const override;
  TangentVector log(const Point& p, const Point& q) const override;
  Point geodesic_point(const Geodesic& g, double t) const override;
  TangentVector geodesic_velocity(const Geodesic& g, double t) const override;
  TangentVector parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const override;
  TangentVector hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const override;
  TangentVector second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                               const TangentVector& W) const override;

 private:
  int m_;
};

/// Round sphere of radius r embedded in R^{m+1}; tangent vectors are ambient vectors orthogonal to the point.
class Sphere final : public Manifold {
 public:
  explicit Sphere(int m, double radius = 1.0);

  std::string kind() const override { return "sphere"; }
  int dim() const override { return m_; }
  int ambient_dim() const override { return m_ + 1; }
  double radius() const { return r_; }

  double inner(const Vec& x, const Vec& v, const Vec& w) const override;
  Mat tangent_basis(const Vec& x) const override;
  Vec geodesic_accel(const Vec& x, const Vec& xdot) const override;
  Vec transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const override;
  Vec curvature_operator(const Vec& x, const Vec& J, const Vec& T) const override;
  void check_point(const Point& p) const override;
  void check_tangent(const TangentVector& v) const override;

  Point exp(const Point& p, const TangentVector& v) const override;
  TangentVector log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  Point geodesic_point(const Geodesic& g, double t) const override;
  TangentVector geodesic_velocity(const Geodesic& g, double t) const override;
  TangentVector parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const override;
  TangentVector hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const override;
  TangentVector second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                               const TangentVector& W) const override;

  /// Scales an arbitrary nonzero vector onto the sphere.
  Point project(const Vec& x) const;

 private:
  int m_;
  double r_;
};

/// Hyperbolic space of curvature -kappa in the hyperboloid model
/// <x,x>_L = -1/kappa, x_0 > 0, with <x,y>_L = -x_0 y_0 + sum x_i y_i.
class Hyperbolic final : public Manifold {
 public:
  explicit Hyperbolic(int m, double kappa = 1.0);

  std::string kind() const override { return "hyperbolic"; }
  int dim() const override { return m_; }
  int ambient_dim() const override { return m_ + 1; }
  double kappa() const { return kappa_; }

  static double minkowski(const Vec& a, const Vec& b);

  double inner(const Vec& x, const Vec& v, const Vec& w) const override;
  Mat tangent_basis(const Vec& x) const override;
  Vec geodesic_accel(const Vec& x, const Vec& xdot) const override;
  Vec transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const override;
  Vec curvature_operator(const Vec& x, const Vec& J, const Vec& T) const override;
  void check_point(const Point& p) const override;
  void check_tangent(const TangentVector& v) const override;

  Point exp(const Point& p, const TangentVector& v) const override;
  TangentVector log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  Point geodesic_point(const Geodesic& g, double t) const override;
  TangentVector geodesic_velocity(const Geodesic& g, double t) const override;
  TangentVector parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const override;
  TangentVector hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const override;
  TangentVector second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                               const TangentVector& W) const override;

  /// Point with spatial part y, lifted onto the hyperboloid.
  Point lift(const Vec& spatial) const;
  /// Projects an ambient vector onto T_x.
  Vec project_tangent(const Vec& x, const Vec& v) const;

 private:
  int m_;
  double kappa_;
  double R_;
};

/// Manifold given by a metric in a single chart. Christoffel symbols come from
/// a closed-form callback or, when absent, from central differences of the
/// metric (step 1e-5). Declared bounds are taken as given and not validated.
class ChartManifold final : public Manifold {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  /// result[i](j, k) = Gamma^i_{jk}
  using ChristoffelFn = std::function<std::vector<Mat>(const Vec&)>;

  ChartManifold(int m, MetricFn metric, std::optional<ChristoffelFn> christoffel = std::nullopt,
                ManifoldBounds bounds = {}, GeodesicNumerics numerics = {}, std::string label = "chart");

  std::string kind() const override { return label_; }
  int dim() const override { return m_; }
  int ambient_dim() const override { return m_; }

  Mat metric_matrix(const Vec& x) const { return metric_(x); }
  std::vector<Mat> christoffel(const Vec& x) const;

  double inner(const Vec& x, const Vec& v, const Vec& w) const override;
  Mat tangent_basis(const Vec& x) const override;
  Vec geodesic_accel(const Vec& x, const Vec& xdot) const override;
  Vec transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const override;
  Vec curvature_operator(const Vec& x, const Vec& J, const Vec& T) const override;

  static constexpr double kMetricFdStep = 1e-5;

 private:
  Vec contract(const std::vector<Mat>& gamma, const Vec& a, const Vec& b) const;

  int m_;
  MetricFn metric_;
  std::optional<ChristoffelFn> christoffel_;
  std::string label_;
};

/// Conformally flat chart g = phi(x)^2 I; Christoffel symbols in closed form.
ManifoldPtr make_conformal_chart(int m, std::function<double(const Vec&)> phi,
                                 std::function<Vec(const Vec&)> grad_phi, ManifoldBounds bounds,
                                 std::string label);
/// Unit sphere through stereographic coordinates, g = 4/(1+|x|^2)^2 I.
ManifoldPtr make_stereographic_sphere_chart(int m);
/// Poincare ball model of curvature -1, g = 4/(1-|x|^2)^2 I.
ManifoldPtr make_poincare_ball_chart(int m);

}  // namespace karcher
