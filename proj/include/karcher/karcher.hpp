#pragma once

#include "karcher/flat_simplex.hpp"
#include "karcher/manifold.hpp"

#include <optional>
#include <vector>

namespace karcher {

struct SolverConfig {
  double grad_tol = 1e-12;
  int max_iters = 200;
  double step_damping = 1.0;

  /// Defaults for a simplex of diameter h: grad_tol = 1e-12 h.
  static SolverConfig for_scale(double h);
  void validate() const;
};

struct MeanSolve {
  Point point;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<double> energies;  // E(a_k, lambda) for every iterate, including the last
};

/// x(lambda), dx and (optionally) nabla dx at one weight.
///
/// Tangent quantities are kept in coordinates of a g-orthonormal basis of
/// T_x M: dx(v) = basis * dx_coords * v for any simplex tangent v.
struct ChartJet {
  Point point;
  Mat basis;          // ambient x m
  Mat a_matrix;       // A in the basis
  Mat sigma_coords;   // m x (n+1), column i = log_x(p_i)
  Mat dx_coords;      // m x (n+1), column i = A^{-1} log_x(p_i)
  std::vector<Vec> nabla_coords;  // n*n entries, [j*n+k] = nabla dx(e_j - e_0, e_k - e_0)

  int n() const { return static_cast<int>(dx_coords.cols()) - 1; }
  bool has_hessian() const { return !nabla_coords.empty(); }

  TangentVector sigma(const SimplexTangent& v) const;
  TangentVector dx(const SimplexTangent& v) const;
  TangentVector nabla_dx(const SimplexTangent& v, const SimplexTangent& w) const;
  /// Coordinates of nabla dx(v, w) in the basis.
  Vec nabla_dx_coords(const Vec& v_unit, const Vec& w_unit) const;
  /// x*g on the basis e_j - e_0.
  Mat pullback_metric() const;
};

/// Karcher simplex spanned by n+1 vertices.
///
/// Every pairwise distance must lie below the convexity radius; iterates of
/// the mean solver must stay within that radius of p_0.
class KarcherChart {
 public:
  KarcherChart(ManifoldPtr manifold, std::vector<Point> vertices, std::optional<SolverConfig> solver = std::nullopt);

  const Manifold& manifold() const { return *manifold_; }
  const ManifoldPtr& manifold_ptr() const { return manifold_; }
  int n() const { return static_cast<int>(vertices_.size()) - 1; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const SolverConfig& solver() const { return solver_; }
  const EdgeLengthSystem& edge_lengths() const { return lengths_; }
  /// Largest edge length.
  double scale() const { return lengths_.max_length(); }
  FlatMetric flat_metric() const { return flat_metric_from_lengths(lengths_); }

  double energy(const Point& a, const BarycentricWeight& lambda) const;
  /// F(a, lambda) = sum lambda^i X_i|_a = -sum lambda^i log_a(p_i).
  TangentVector grad_field(const Point& a, const BarycentricWeight& lambda) const;
  Point initial_iterate(const BarycentricWeight& lambda) const;
  MeanSolve solve_mean(const BarycentricWeight& lambda) const;
  Point karcher_mean(const BarycentricWeight& lambda) const { return solve_mean(lambda).point; }

  /// sigma(v) = sum v^i log_x(p_i) at x = x(lambda).
  TangentVector sigma(const BarycentricWeight& lambda, const SimplexTangent& v) const;
  /// A(V) = sum lambda^i nabla_V X_i at the base point of V.
  TangentVector a_operator(const BarycentricWeight& lambda, const TangentVector& V) const;
  /// A at an arbitrary point x in the coordinates of manifold().tangent_basis(x).
  Mat a_matrix(const Point& x, const BarycentricWeight& lambda) const;

  ChartJet differential(const BarycentricWeight& lambda) const;
  ChartJet hessian(const BarycentricWeight& lambda) const;
  Mat pullback_metric(const BarycentricWeight& lambda) const { return differential(lambda).pullback_metric(); }

 private:
  void check_weight(const BarycentricWeight& lambda) const;
  ChartJet build_jet(const BarycentricWeight& lambda, bool with_hessian) const;

  ManifoldPtr manifold_;
  std::vector<Point> vertices_;
  SolverConfig solver_;
  EdgeLengthSystem lengths_;
};

}  // namespace karcher
