#include "karcher/acceptance.hpp"

#include "karcher/fem.hpp"
#include "karcher/harness.hpp"
#include "karcher/jacobi.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace karcher {

namespace {

using Rng = std::mt19937_64;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

Vec random_normal(Rng& rng, int n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

BarycentricWeight random_interior_weight(Rng& rng, int n, double min_weight = 0.05) {
  std::exponential_distribution<double> ex(1.0);
  Vec w(n + 1);
  for (int i = 0; i <= n; ++i) w(i) = ex(rng);
  w /= w.sum();
  return BarycentricWeight::normalized(Vec::Constant(n + 1, min_weight) + (1.0 - min_weight * (n + 1)) * w);
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

Outcome slope_outcome(const std::optional<SlopeFit>& fit, double target, double tol, const std::string& label) {
  if (!fit) return {false, label + ": no slope (non-positive values)"};
  return {within(fit->slope, target, tol),
          label + " slope " + fmt(fit->slope) + " (target " + fmt(target) + " +- " + fmt(tol) + ")"};
}

ConvergenceReport sphere_sweep() { return run_family(sphere_family(), sample_weights(2)); }

// ---------------------------------------------------------------------------

Outcome flat_exactness(Rng& rng) {
  auto M = std::make_shared<Euclidean>(3);
  double worst_mean = 0.0, worst_metric = 0.0, worst_nabla = 0.0;
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Point> pts;
      Mat P(3, n + 1);
      for (int i = 0; i <= n; ++i) {
        P.col(i) = random_normal(rng, 3);
        pts.emplace_back(P.col(i));
      }
      const KarcherChart chart(M, pts);
      const FlatMetric gm = chart.flat_metric();
      if (!gm.realizable) continue;
      for (int k = 0; k < 4; ++k) {
        const BarycentricWeight lambda = random_interior_weight(rng, n);
        const ChartJet jet = chart.hessian(lambda);
        worst_mean = std::max(worst_mean, (jet.point.coords - P * lambda.values()).norm());
        worst_metric = std::max(worst_metric, (jet.pullback_metric() - gm.G).cwiseAbs().maxCoeff());
        for (const Vec& v : jet.nabla_coords) worst_nabla = std::max(worst_nabla, v.norm());
      }
    }
  }
  const bool ok = worst_mean <= 1e-10 && worst_metric <= 1e-10 && worst_nabla <= 1e-10;
  return {ok, "max |x - sum lambda p| " + fmt(worst_mean) + ", |x*g - g^e| " + fmt(worst_metric) + ", |nabla dx| " +
                  fmt(worst_nabla)};
}

Outcome edge_and_great_circle(Rng& rng) {
  auto S = std::make_shared<Sphere>(2);
  const SimplexFamily fam = sphere_family({0.2});
  const GeneratedSimplex gen = generate_geodesic_simplex(S, fam.center, fam.directions, 0.2);
  const KarcherChart& chart = gen.chart;
  double worst_edge = 0.0;
  for (int i = 0; i <= 2; ++i)
    for (int j = i + 1; j <= 2; ++j) {
      const Geodesic g = S->geodesic_between(chart.vertices()[i], chart.vertices()[j]);
      for (int k = 1; k < 10; ++k) {
        const double t = 0.1 * k;
        Vec w = Vec::Zero(3);
        w(i) = 1.0 - t;
        w(j) = t;
        const Point x = chart.karcher_mean(BarycentricWeight::normalized(w));
        worst_edge = std::max(worst_edge, S->dist(x, S->geodesic_point(g, t * g.length)));
      }
    }
  const double edge_tol = 10.0 * chart.solver().grad_tol;

  double worst_circle = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec normal = random_normal(rng, 3).normalized();
    const Mat B = S->tangent_basis(normal);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    const double a0 = ang(rng);
    std::vector<Point> pts;
    for (double off : {0.0, 0.13, 0.3}) {
      pts.emplace_back(std::cos(a0 + off) * B.col(0) + std::sin(a0 + off) * B.col(1));
    }
    const KarcherChart circle(S, pts);
    for (int k = 0; k < 10; ++k) {
      const Point x = circle.karcher_mean(random_interior_weight(rng, 2, 0.0));
      worst_circle = std::max(worst_circle, std::abs(x.coords.dot(normal)));
    }
  }
  const bool ok = worst_edge <= edge_tol && worst_circle <= 1e-9;
  return {ok, "edge deviation " + fmt(worst_edge) + " (tol " + fmt(edge_tol) + "), great-circle deviation " +
                  fmt(worst_circle)};
}

Outcome jacobi_oracle(Rng& rng) {
  double worst_tau = 0.0, worst_zero = 0.0, worst_hess = 0.0;
  std::uniform_real_distribution<double> tau_dist(0.05, 1.0);
  for (int model = 0; model < 2; ++model) {
    ManifoldPtr M;
    std::function<Point(const Vec&)> random_point;
    std::function<double(double)> s_fn, ct_fn;  // sin or sinh, t cot t or t coth t
    if (model == 0) {
      auto S = std::make_shared<Sphere>(2);
      random_point = [S](const Vec& v) { return S->project(v); };
      s_fn = [](double t) { return std::sin(t); };
      ct_fn = [](double t) { return t / std::tan(t); };
      M = S;
    } else {
      auto H = std::make_shared<Hyperbolic>(2);
      random_point = [H](const Vec& v) { return H->lift(0.5 * v.head(2)); };
      s_fn = [](double t) { return std::sinh(t); };
      ct_fn = [](double t) { return t / std::tanh(t); };
      M = H;
    }
    for (int trial = 0; trial < 100; ++trial) {
      const Point p = random_point(random_normal(rng, 3));
      const Mat Bp = M->tangent_basis(p.coords);
      const Vec u = Bp * random_normal(rng, 2).normalized();
      const double tau = tau_dist(rng);
      const Point q = M->exp(p, TangentVector{p, tau * u});
      const TangentVector V{q, M->tangent_basis(q.coords) * random_normal(rng, 2)};
      const JacobiBVP bvp = make_bvp(*M, p, q, V);
      const JacobiSolution sol = solve_bvp(*M, bvp);
      const double t = bvp.tau();

      const TangentVector T = M->geodesic_velocity(bvp.geodesic, t);
      const Vec v_par = M->inner(q.coords, V.components, T.components) * T.components;
      const Vec v_perp = V.components - v_par;
      const Vec expect_tau = ct_fn(t) * v_perp + v_par;
      const Vec expect_zero = M->parallel_transport(bvp.geodesic, t, 0.0, TangentVector{q, v_perp / s_fn(t) + v_par / t})
                                  .components;
      auto gnorm = [&](const Point& at, const Vec& w) { return std::sqrt(std::abs(M->inner(at.coords, w, w))); };
      worst_tau = std::max(worst_tau, gnorm(q, t * sol.jdot_at_tau.components - expect_tau));
      worst_zero = std::max(worst_zero, gnorm(p, sol.jdot_at_0.components - expect_zero));
      worst_hess = std::max(worst_hess, gnorm(q, M->hess_half_dist_sq(p, q, V).components - expect_tau));
    }
  }
  const bool ok = worst_tau <= 1e-8 && worst_zero <= 1e-8 && worst_hess <= 1e-8;
  return {ok, "200 cases: |tau J'(tau) - closed form| " + fmt(worst_tau) + ", |J'(0) - closed form| " +
                  fmt(worst_zero) + ", |hess - closed form| " + fmt(worst_hess)};
}

Outcome ode_bound(Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int failures = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 3;
    const double tau = 0.5 + 1.5 * unif(rng);
    const Mat A0 = Mat::NullaryExpr(m, m, [&] { return 2.0 * unif(rng) - 1.0; });
    const Mat A1 = Mat::NullaryExpr(m, m, [&] { return 2.0 * unif(rng) - 1.0; });
    const double omega = 1.0 + 5.0 * unif(rng);
    // ||A0 + sin(w t) A1|| <= ||A0|| + ||A1||, rescaled so that the bound is 0.9 / tau^2.
    const double scale = 0.9 / (tau * tau * (A0.operatorNorm() + A1.operatorNorm()));
    const Vec b0 = random_normal(rng, m), b1 = random_normal(rng, m);
    const MatrixOfTime A = [=](double t) -> Mat { return scale * (A0 + std::sin(omega * t) * A1); };
    const VectorOfTime B = [=](double t) -> Vec { return b0 + std::cos(omega * t) * b1; };
    const OdeBoundReport rep = ode_bound_check(A, B, tau);
    if (!rep.holds) ++failures;
    worst_ratio = std::max(worst_ratio, rep.max_udot / (rep.max_b * tau));
  }
  return {failures == 0, "50 trials, " + std::to_string(failures) + " failures, max |U'| / (max|B| tau) = " +
                             fmt(worst_ratio) + " (bound 3)"};
}

Outcome flat_simplex_suite(Rng& rng) {
  double worst_volume = 0.0;
  int systems = 0;
  while (systems < 200) {
    const int n = 2 + systems % 3;
    Mat pts(n, n + 1);
    for (int i = 0; i <= n; ++i) pts.col(i) = random_normal(rng, n);
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(pts));
    if (!gm.realizable) continue;
    const double cm = volume(gm), gram = volume_gram(gm);
    worst_volume = std::max(worst_volume, std::abs(cm - gram) / gram);
    ++systems;
  }
  int full = 0, contained = 0;
  while (full < 100) {
    const int n = 2 + full % 2;
    Mat pts(n, n + 1);
    for (int i = 0; i <= n; ++i) pts.col(i) = random_normal(rng, n);
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(pts));
    if (!gm.realizable) continue;
    const double h = max_edge_length(gm);
    if (fullness(gm, h) < 0.1) continue;
    ++full;
    if (gram_eigen_bounds(gm, h).contained) ++contained;
  }
  const Mat l = Mat::Ones(3, 3) - Mat::Identity(3, 3);
  const double theta = fullness(flat_metric_from_lengths(EdgeLengthSystem(l)), 1.0);
  const double theta_err = std::abs(theta - std::sqrt(3.0) / 2.0);
  const bool ok = worst_volume <= 1e-10 && contained == full && theta_err <= 1e-12;
  return {ok, "volume rel. gap " + fmt(worst_volume) + " over 200 systems; eigenvalues contained " +
                  std::to_string(contained) + "/" + std::to_string(full) + "; |theta - sqrt(3)/2| " + fmt(theta_err)};
}

Outcome fem_poisson() {
  std::vector<double> h, h1;
  std::string detail;
  bool decreasing = true;
  double prev_l2 = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= 4; ++level) {
    const FemLevelResult r = run_poisson_level(level);
    h.push_back(r.h);
    h1.push_back(r.h1_error);
    decreasing = decreasing && r.l2_error < prev_l2;
    prev_l2 = r.l2_error;
    detail += "L" + std::to_string(level) + " l2=" + fmt(r.l2_error, 3) + " h1=" + fmt(r.h1_error, 3) + "; ";
  }
  const SlopeFit fit = fit_slope(h, h1);
  return {fit.slope >= 0.8 && decreasing,
          detail + "H1 slope " + fmt(fit.slope) + " (>= 0.8), L2 " + (decreasing ? "decreasing" : "NOT decreasing")};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;
  std::function<Outcome(Rng&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "metric distortion rate", 60.0,
       [](Rng&) { return slope_outcome(sphere_sweep().fitted_slopes.metric_gap, 2.0, 0.25, "sphere metric gap"); }},
      {2, "connection distortion rate", 120.0,
       [](Rng&) {
         return slope_outcome(sphere_sweep().fitted_slopes.connection_gap, 1.0, 0.25, "sphere connection gap");
       }},
      {3, "dx - sigma rate", 0.0,
       [](Rng&) {
         const Outcome s = slope_outcome(sphere_sweep().fitted_slopes.dx_sigma_gap, 2.0, 0.25, "sphere");
         const ConvergenceReport hyp = run_family(hyperbolic_family(), sample_weights(2));
         const Outcome h = slope_outcome(hyp.fitted_slopes.dx_sigma_gap, 2.0, 0.3, "hyperbolic");
         return Outcome{s.passed && h.passed, s.detail + "; " + h.detail};
       }},
      {4, "nabla dx rate", 0.0,
       [](Rng&) { return slope_outcome(sphere_sweep().fitted_slopes.nabla_dx, 1.0, 0.25, "sphere nabla dx"); }},
      {5, "flat-space exactness", 1.0, flat_exactness},
      {6, "edge and submanifold properties", 0.0, edge_and_great_circle},
      {7, "Jacobi oracle equivalence", 10.0, jacobi_oracle},
      {8, "second-order ODE bound", 0.0, ode_bound},
      {9, "flat simplex suite", 0.0, flat_simplex_suite},
      {10, "FEM Poisson convergence", 120.0, [](Rng&) { return fem_poisson(); }},
      {11, "edge-length comparison rate", 0.0,
       [](Rng&) { return slope_outcome(sphere_sweep().edge_length_slope, 2.0, 0.25, "sphere edge-length gap"); }},
  };
  return all;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  if (suite == "distortion") return {1, 2, 3, 4, 11};
  if (suite == "exactness") return {5};
  if (suite == "submanifold") return {6};
  if (suite == "jacobi") return {7, 8};
  if (suite == "flat-simplex") return {9};
  if (suite == "fem") return {10};
  if (suite == "edge-lengths") return {11};
  for (const auto& c : criteria()) {
    if (suite == std::to_string(c.id)) return {c.id};
  }
  throw DomainError("unknown acceptance suite '" + suite + "'");
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  require(id >= 1 && id <= kCriterionCount, "run_criterion: unknown criterion id");
  const Criterion& c = criteria()[id - 1];
  CriterionResult r;
  r.id = c.id;
  r.name = c.name;
  r.time_limit = c.time_limit;
  Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(id));
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = c.run(rng);
    r.passed = o.passed;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
    r.passed = false;
    r.detail += "; runtime " + fmt(r.seconds) + " s exceeds " + fmt(r.time_limit) + " s";
  }
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " (" << fmt(r.seconds, 3)
     << " s)";
  return os.str();
}

std::vector<CriterionResult> run_suite(const std::string& suite, std::ostream& os, std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (int id : suite_criteria(suite)) {
    out.push_back(run_criterion(id, seed));
    os << format_result(out.back()) << std::endl;
  }
  return out;
}

}  // namespace karcher
