#pragma once

#include "karcher/karcher.hpp"

#include <optional>
#include <string>
#include <vector>

namespace karcher {

/// h_k = h0 / 2^k, k = 0..levels-1.
std::vector<double> make_ladder(double h0, int levels);
inline const std::vector<double> kDefaultLadder{0.2, 0.1, 0.05, 0.025, 0.0125};

/// Unit tangent directions at `center` pointing to the vertices of a regular
/// n-simplex centred at the origin, scaled so that its edges have length 1.
std::vector<TangentVector> equilateral_directions(const Manifold& M, const Point& center, int n);

/// Tangent directions realizing the flat simplex `gm` (centred, scaled to unit max edge).
std::vector<TangentVector> directions_from_flat_metric(const Manifold& M, const Point& center, const FlatMetric& gm);

struct GeneratedSimplex {
  KarcherChart chart;
  double h = 0.0;      // largest geodesic edge length
  double theta = 0.0;  // fullness of the geodesic edge lengths at that h
};

/// Vertices p_i = exp_center(h u_i).
GeneratedSimplex generate_geodesic_simplex(const ManifoldPtr& M, const Point& center,
                                           const std::vector<TangentVector>& directions, double h,
                                           std::optional<SolverConfig> solver = std::nullopt);

struct SimplexFamily {
  ManifoldPtr manifold;
  Point center;
  std::vector<TangentVector> directions;
  std::vector<double> ladder;
  double fullness_target = 0.0;
};

/// Unit sphere S^2 (or hyperbolic plane) around a base point with the equilateral direction set.
SimplexFamily sphere_family(std::vector<double> ladder = kDefaultLadder, int n = 2);
SimplexFamily hyperbolic_family(std::vector<double> ladder = kDefaultLadder, int n = 2);

/// Barycenter, edge midpoints pulled towards the barycenter, and `interior`
/// low-discrepancy points; every weight has all entries >= min_weight.
std::vector<BarycentricWeight> sample_weights(int n, int interior = 20, double min_weight = 0.05);

struct DistortionSample {
  double h = 0.0;
  double theta = 0.0;
  double metric_gap = 0.0;      // sup |(x*g - g^e)(v,w)|
  double connection_gap = 0.0;  // sup |nabla^e x*g(u,v,w)|
  double dx_sigma_gap = 0.0;    // sup |dx(v) - sigma(v)|
  double nabla_dx = 0.0;        // sup |nabla dx(v,w)|
};
// All sups run over a g^e-orthonormal basis and the sampled weights.

/// Values at a single weight.
DistortionSample measure_at(const KarcherChart& chart, const BarycentricWeight& lambda);
DistortionSample measure_distortion(const KarcherChart& chart, const std::vector<BarycentricWeight>& weights);

/// sup |d/du x*g(v,w)| by central differences of pullback_metric along the
/// unit-coordinate directions (the independent route for connection_gap).
double connection_gap_fd(const KarcherChart& chart, const BarycentricWeight& lambda, double step = 1e-4);

struct EdgeLengthComparison {
  double h = 0.0;
  /// max_ij |dist(p_i,p_j) - |log_a p_i - log_a p_j|_g| / dist(p_i,p_j) at a = x(barycenter)
  double max_relative_gap = 0.0;
};

EdgeLengthComparison check_edge_length_comparison(const KarcherChart& chart);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 95% confidence interval of the slope
  double ci_high = 0.0;
  int levels_used = 0;
  bool dropped_coarsest = false;
};

/// Least-squares slope of log q against log h. The coarsest level is dropped
/// once when its residual exceeds twice the fit RMS and four levels remain.
SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& q);

struct ConvergenceFits {
  std::optional<SlopeFit> metric_gap;
  std::optional<SlopeFit> connection_gap;
  std::optional<SlopeFit> dx_sigma_gap;
  std::optional<SlopeFit> nabla_dx;
};

struct ConvergenceReport {
  std::vector<DistortionSample> samples;
  ConvergenceFits fitted_slopes;
  std::vector<EdgeLengthComparison> edge_lengths;
  std::optional<SlopeFit> edge_length_slope;
  std::vector<std::string> warnings;
};

/// Fits every quantity with strictly positive values on >= 4 levels; others stay empty.
ConvergenceFits fit_orders(const std::vector<DistortionSample>& samples);

ConvergenceReport run_family(const SimplexFamily& family, const std::vector<BarycentricWeight>& weights);

}  // namespace karcher
