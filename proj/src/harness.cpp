#include "karcher/harness.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace karcher {

namespace {

// Columns c_k with c_j^T G c_k = delta_jk.
Mat orthonormal_unit_basis(const Mat& G) {
  const Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success) throw DomainError("harness: flat metric is not positive definite");
  return llt.matrixU().solve(Mat::Identity(G.rows(), G.cols()));
}

double radical_inverse(int index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_slope: degenerate ladder (all h equal)");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  const double dof = k - 2.0;
  fit.std_error = std::sqrt(ssr / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci_low = fit.slope - t * fit.std_error;
  fit.ci_high = fit.slope + t * fit.std_error;
  fit.levels_used = static_cast<int>(x.size());
  return fit;
}

std::optional<SlopeFit> fit_if_positive(const std::vector<DistortionSample>& samples,
                                        double DistortionSample::*field) {
  std::vector<double> h, q;
  for (const auto& s : samples) {
    if (!(s.*field > 0.0)) return std::nullopt;
    h.push_back(s.h);
    q.push_back(s.*field);
  }
  if (h.size() < 4) return std::nullopt;
  return fit_slope(h, q);
}

}  // namespace

std::vector<double> make_ladder(double h0, int levels) {
  require(h0 > 0.0 && levels >= 1, "make_ladder: need h0 > 0 and at least one level");
  std::vector<double> out;
  for (int k = 0; k < levels; ++k) out.push_back(std::ldexp(h0, -k));
  return out;
}

std::vector<TangentVector> directions_from_flat_metric(const Manifold& M, const Point& center, const FlatMetric& gm) {
  require(gm.realizable, "directions_from_flat_metric: edge lengths are not realizable");
  require(gm.n <= M.dim(), "directions_from_flat_metric: simplex dimension exceeds manifold dimension");
  const Mat L = Eigen::LLT<Mat>(gm.G).matrixL();
  Mat verts = Mat::Zero(gm.n, gm.n + 1);
  verts.rightCols(gm.n) = L.transpose();
  const Vec centroid = verts.rowwise().mean();
  verts.colwise() -= centroid;
  verts /= max_edge_length(gm);
  const Mat B = M.tangent_basis(center.coords).leftCols(gm.n);
  std::vector<TangentVector> out;
  for (int i = 0; i <= gm.n; ++i) out.emplace_back(center, B * verts.col(i));
  return out;
}

std::vector<TangentVector> equilateral_directions(const Manifold& M, const Point& center, int n) {
  const Mat l = Mat::Ones(n + 1, n + 1) - Mat::Identity(n + 1, n + 1);
  return directions_from_flat_metric(M, center, flat_metric_from_lengths(EdgeLengthSystem(l)));
}

GeneratedSimplex generate_geodesic_simplex(const ManifoldPtr& M, const Point& center,
                                           const std::vector<TangentVector>& directions, double h,
                                           std::optional<SolverConfig> solver) {
  require(h > 0.0, "generate_geodesic_simplex: h must be positive");
  double reach = 0.0;
  for (const auto& u : directions) reach = std::max(reach, h * M->norm(u));
  if (reach >= M->bounds().convexity_radius) {
    throw DomainError("generate_geodesic_simplex: h exceeds the convexity radius");
  }
  std::vector<Point> vertices;
  for (const auto& u : directions) {
    require(same_base(u.base, center), "generate_geodesic_simplex: direction not based at center");
    vertices.push_back(M->exp(center, TangentVector{center, h * u.components}));
  }
  KarcherChart chart(M, std::move(vertices), solver);
  const FlatMetric gm = chart.flat_metric();
  if (!gm.realizable) throw DomainError("generate_geodesic_simplex: edge lengths are not realizable");
  const double hmax = chart.scale();
  return GeneratedSimplex{std::move(chart), hmax, fullness(gm, hmax)};
}

SimplexFamily sphere_family(std::vector<double> ladder, int n) {
  auto M = std::make_shared<Sphere>(n);
  Vec c = Vec::Zero(n + 1);
  c(n) = 1.0;
  const Point center{c};
  return SimplexFamily{M, center, equilateral_directions(*M, center, n), std::move(ladder),
                       0.99 * max_fullness<double>(n)};
}

SimplexFamily hyperbolic_family(std::vector<double> ladder, int n) {
  auto M = std::make_shared<Hyperbolic>(n);
  const Point center = M->lift(Vec::Zero(n));
  return SimplexFamily{M, center, equilateral_directions(*M, center, n), std::move(ladder),
                       0.99 * max_fullness<double>(n)};
}

std::vector<BarycentricWeight> sample_weights(int n, int interior, double min_weight) {
  require(n >= 1 && interior >= 0, "sample_weights: invalid arguments");
  require(n <= 10, "sample_weights: n > 10 is not supported");
  const double t = min_weight * (n + 1);
  require(t <= 1.0, "sample_weights: min_weight too large for this dimension");
  const Vec bary = Vec::Constant(n + 1, 1.0 / (n + 1));
  std::vector<BarycentricWeight> out{BarycentricWeight::barycenter(n)};
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      Vec mid = Vec::Zero(n + 1);
      mid(i) = mid(j) = 0.5;
      out.push_back(BarycentricWeight::normalized((1.0 - t) * mid + t * bary));
    }
  }
  // Halton points mapped onto the simplex by sorted spacings, then shrunk to min_weight.
  for (int k = 1; k <= interior; ++k) {
    std::vector<double> u(n);
    for (int d = 0; d < n; ++d) u[d] = radical_inverse(k, kPrimes[d]);
    std::sort(u.begin(), u.end());
    Vec mu(n + 1);
    double prev = 0.0;
    for (int d = 0; d < n; ++d) {
      mu(d) = u[d] - prev;
      prev = u[d];
    }
    mu(n) = 1.0 - prev;
    out.push_back(BarycentricWeight::normalized(Vec::Constant(n + 1, min_weight) + (1.0 - t) * mu));
  }
  return out;
}

DistortionSample measure_at(const KarcherChart& chart, const BarycentricWeight& lambda) {
  const int n = chart.n();
  const FlatMetric gm = chart.flat_metric();
  const Mat C = orthonormal_unit_basis(gm.G);
  const ChartJet jet = chart.hessian(lambda);
  const Mat DC = (jet.dx_coords.rightCols(n).colwise() - jet.dx_coords.col(0)) * C;
  const Mat SC = (jet.sigma_coords.rightCols(n).colwise() - jet.sigma_coords.col(0)) * C;

  DistortionSample s;
  s.h = chart.scale();
  s.theta = fullness(gm, s.h);
  s.metric_gap = (DC.transpose() * DC - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  s.dx_sigma_gap = (DC - SC).colwise().norm().maxCoeff();

  std::vector<Vec> N(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      N[a * n + b] = jet.nabla_dx_coords(C.col(a), C.col(b));
      s.nabla_dx = std::max(s.nabla_dx, N[a * n + b].norm());
    }
  // nabla^e x*g(u,v,w) = g(nabla dx(u,v), dx(w)) + g(dx(v), nabla dx(u,w))
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double t = N[a * n + b].dot(DC.col(c)) + DC.col(b).dot(N[a * n + c]);
        s.connection_gap = std::max(s.connection_gap, std::abs(t));
      }
  return s;
}

DistortionSample measure_distortion(const KarcherChart& chart, const std::vector<BarycentricWeight>& weights) {
  require(!weights.empty(), "measure_distortion: no sample weights");
  DistortionSample out;
  for (const auto& w : weights) {
    const DistortionSample s = measure_at(chart, w);
    out.h = s.h;
    out.theta = s.theta;
    out.metric_gap = std::max(out.metric_gap, s.metric_gap);
    out.connection_gap = std::max(out.connection_gap, s.connection_gap);
    out.dx_sigma_gap = std::max(out.dx_sigma_gap, s.dx_sigma_gap);
    out.nabla_dx = std::max(out.nabla_dx, s.nabla_dx);
  }
  return out;
}

double connection_gap_fd(const KarcherChart& chart, const BarycentricWeight& lambda, double step) {
  const int n = chart.n();
  const Mat C = orthonormal_unit_basis(chart.flat_metric().G);
  double gap = 0.0;
  for (int a = 0; a < n; ++a) {
    Vec du(n + 1);
    du(0) = -C.col(a).sum();
    du.tail(n) = C.col(a);
    const Mat plus = chart.pullback_metric(BarycentricWeight::normalized(lambda.values() + step * du));
    const Mat minus = chart.pullback_metric(BarycentricWeight::normalized(lambda.values() - step * du));
    const Mat dP = C.transpose() * (plus - minus) * C / (2.0 * step);
    gap = std::max(gap, dP.cwiseAbs().maxCoeff());
  }
  return gap;
}

EdgeLengthComparison check_edge_length_comparison(const KarcherChart& chart) {
  const Manifold& M = chart.manifold();
  const Point a = chart.karcher_mean(BarycentricWeight::barycenter(chart.n()));
  std::vector<Vec> logs;
  for (const auto& p : chart.vertices()) logs.push_back(M.log(a, p).components);
  EdgeLengthComparison out;
  out.h = chart.scale();
  for (int i = 0; i <= chart.n(); ++i) {
    for (int j = i + 1; j <= chart.n(); ++j) {
      const double d = chart.edge_lengths()(i, j);
      const Vec diff = logs[i] - logs[j];
      const double flat = std::sqrt(std::max(0.0, M.inner(a.coords, diff, diff)));
      out.max_relative_gap = std::max(out.max_relative_gap, std::abs(d - flat) / d);
    }
  }
  return out;
}

SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& q) {
  require(h.size() == q.size(), "fit_slope: size mismatch");
  require(h.size() >= 4, "fit_slope: need at least four ladder levels");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < h.size(); ++i) {
    require(h[i] > 0.0 && q[i] > 0.0, "fit_slope: values must be positive");
    x.push_back(std::log(h[i]));
    y.push_back(std::log(q[i]));
  }
  SlopeFit fit = least_squares(x, y);
  if (x.size() > 4) {
    // The coarsest level is judged against the fit of the remaining levels.
    const auto coarsest = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    const double rms = std::sqrt(ssr / static_cast<double>(x.size()));
    std::vector<double> xr = x, yr = y;
    xr.erase(xr.begin() + static_cast<std::ptrdiff_t>(coarsest));
    yr.erase(yr.begin() + static_cast<std::ptrdiff_t>(coarsest));
    const SlopeFit rest = least_squares(xr, yr);
    const double rc = std::abs(y[coarsest] - rest.intercept - rest.slope * x[coarsest]);
    if (rc > 2.0 * rms) {
      fit = rest;
      fit.dropped_coarsest = true;
    }
  }
  return fit;
}

ConvergenceFits fit_orders(const std::vector<DistortionSample>& samples) {
  require(samples.size() >= 4, "fit_orders: need at least four ladder levels");
  ConvergenceFits f;
  f.metric_gap = fit_if_positive(samples, &DistortionSample::metric_gap);
  f.connection_gap = fit_if_positive(samples, &DistortionSample::connection_gap);
  f.dx_sigma_gap = fit_if_positive(samples, &DistortionSample::dx_sigma_gap);
  f.nabla_dx = fit_if_positive(samples, &DistortionSample::nabla_dx);
  return f;
}

ConvergenceReport run_family(const SimplexFamily& family, const std::vector<BarycentricWeight>& weights) {
  require(static_cast<bool>(family.manifold), "run_family: manifold missing");
  ConvergenceReport rep;
  for (double h : family.ladder) {
    const GeneratedSimplex gen = generate_geodesic_simplex(family.manifold, family.center, family.directions, h);
    if (gen.theta < 0.9 * family.fullness_target) {
      throw DomainError("run_family: generated simplex is less full than 0.9 * fullness_target");
    }
    rep.samples.push_back(measure_distortion(gen.chart, weights));
    rep.edge_lengths.push_back(check_edge_length_comparison(gen.chart));
  }
  if (rep.samples.size() >= 4) {
    rep.fitted_slopes = fit_orders(rep.samples);
    std::vector<double> h, q;
    bool positive = true;
    for (const auto& e : rep.edge_lengths) {
      h.push_back(e.h);
      q.push_back(e.max_relative_gap);
      positive = positive && e.max_relative_gap > 0.0;
    }
    if (positive) rep.edge_length_slope = fit_slope(h, q);
  }

  const double C0 = family.manifold->bounds().C0;
  const double limit = C0 > 0.0 ? 0.2 / std::sqrt(C0) : std::numeric_limits<double>::infinity();
  auto monotone = [&](double DistortionSample::*field, const char* name) {
    for (std::size_t k = 1; k < rep.samples.size(); ++k) {
      const auto& prev = rep.samples[k - 1];
      const auto& cur = rep.samples[k];
      if (prev.h <= limit * (1.0 + 1e-9) && cur.h < prev.h && cur.*field > prev.*field) {
        rep.warnings.push_back(std::string(name) + " increased from h=" + std::to_string(prev.h) +
                               " to h=" + std::to_string(cur.h));
      }
    }
  };
  monotone(&DistortionSample::metric_gap, "metric_gap");
  monotone(&DistortionSample::connection_gap, "connection_gap");
  monotone(&DistortionSample::dx_sigma_gap, "dx_sigma_gap");
  monotone(&DistortionSample::nabla_dx, "nabla_dx");
  return rep;
}

}  // namespace karcher
