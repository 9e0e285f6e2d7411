#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace karcher {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised for inputs outside an operation's domain (bad dimensions, base-point
/// mismatch, points beyond the configured radius, invalid configuration).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative or ODE-based computation fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point on a manifold, stored in the manifold's representation coordinates
/// (ambient coordinates for embedded models, chart coordinates otherwise).
struct Point {
  Vec coords;

  Point() = default;
  explicit Point(Vec c) : coords(std::move(c)) {}
};

/// A tangent vector together with the point it is attached to.
struct TangentVector {
  Point base;
  Vec components;

  TangentVector() = default;
  TangentVector(Point b, Vec c) : base(std::move(b)), components(std::move(c)) {}
};

/// Arclength-parametrized geodesic: t -> exp(start, t * initial_velocity), t in [0, length].
struct Geodesic {
  Point start;
  TangentVector initial_velocity;
  double length = 0.0;
};

inline bool same_base(const Point& a, const Point& b, double tol = 1e-10) {
  if (a.coords.size() != b.coords.size()) return false;
  return (a.coords - b.coords).lpNorm<Eigen::Infinity>() <= tol * (1.0 + a.coords.lpNorm<Eigen::Infinity>());
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace karcher
