#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "karcher/manifold.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace karcher;
using std::numbers::pi;

namespace {

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

TangentVector random_tangent(const Manifold& M, std::mt19937_64& rng, const Point& p, double len) {
  const Mat B = M.tangent_basis(p.coords);
  Vec c = gaussian(rng, M.dim());
  c *= len / c.norm();
  return {p, B * c};
}

Point near(const Manifold& M, std::mt19937_64& rng, const Point& p, double r) {
  return M.exp(p, random_tangent(M, rng, p, r));
}

// Inverse stereographic projection and its differential.
Vec stereo_to_sphere(const Vec& x) {
  const double s = x.squaredNorm();
  Vec out(x.size() + 1);
  out.head(x.size()) = 2.0 * x / (1.0 + s);
  out(x.size()) = (s - 1.0) / (s + 1.0);
  return out;
}

Vec stereo_push(const Vec& x, const Vec& v) {
  const double s = x.squaredNorm(), xv = x.dot(v);
  Vec out(x.size() + 1);
  out.head(x.size()) = 2.0 * v / (1.0 + s) - 4.0 * x * xv / ((1.0 + s) * (1.0 + s));
  out(x.size()) = 4.0 * xv / ((1.0 + s) * (1.0 + s));
  return out;
}

Vec sphere_to_stereo(const Vec& y) {
  const int m = static_cast<int>(y.size()) - 1;
  return y.head(m) / (1.0 - y(m));
}

}  // namespace

TEST_CASE("euclidean operations are exact") {
  Euclidean E(3);
  const Point p(Eigen::Vector3d(1, 2, 3)), q(Eigen::Vector3d(-1, 0, 4));
  CHECK(E.log(p, q).components.isApprox(Vec(q.coords - p.coords)));
  CHECK(E.exp(p, E.log(p, q)).coords.isApprox(q.coords));
  CHECK(E.dist(p, q) == doctest::Approx(3.0));
  const TangentVector V{q, Eigen::Vector3d(0.3, -0.2, 1.0)};
  CHECK(E.hess_half_dist_sq(p, q, V).components.isApprox(V.components));
  CHECK(E.second_deriv_X(p, q, V, V).components.norm() == 0.0);
}

TEST_CASE("sphere closed forms") {
  Sphere S(2);
  const Point north(Eigen::Vector3d(0, 0, 1));
  const Point east(Eigen::Vector3d(1, 0, 0));
  SUBCASE("quarter circle") {
    const TangentVector v{north, Eigen::Vector3d(pi / 2, 0, 0)};
    CHECK((S.exp(north, v).coords - east.coords).norm() < 1e-15);
    CHECK(S.dist(north, east) == doctest::Approx(pi / 2));
    CHECK((S.log(north, east).components - v.components).norm() < 1e-14);
  }
  SUBCASE("antipodal exp is allowed, log is not") {
    const TangentVector v{north, Eigen::Vector3d(pi, 0, 0)};
    CHECK((S.exp(north, v).coords - Vec(Eigen::Vector3d(0, 0, -1))).norm() < 1e-14);
    CHECK_THROWS_AS(S.log(north, Point(Eigen::Vector3d(0, 0, -1))), DomainError);
  }
  SUBCASE("hessian of half squared distance at distance pi/2") {
    const TangentVector radial{east, Eigen::Vector3d(0, 0, -1)};
    const TangentVector transverse{east, Eigen::Vector3d(0, 1, 0)};
    CHECK((S.hess_half_dist_sq(north, east, radial).components - radial.components).norm() < 1e-14);
    CHECK(S.hess_half_dist_sq(north, east, transverse).components.norm() < 1e-14);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(S.exp(Point(Eigen::Vector3d(0, 0, 2)), TangentVector{north, Eigen::Vector3d::Zero()}), DomainError);
    CHECK_THROWS_AS(S.exp(north, TangentVector{north, Eigen::Vector3d(0, 0, 1)}), DomainError);
    CHECK_THROWS_AS(S.exp(north, TangentVector{east, Eigen::Vector3d(0, 1, 0)}), DomainError);
  }
}

TEST_CASE("sphere of radius r has curvature 1/r^2") {
  Sphere S(2, 2.0);
  CHECK(S.bounds().C0 == doctest::Approx(0.25));
  const Point p(Eigen::Vector3d(0, 0, 2));
  const TangentVector v{p, Eigen::Vector3d(pi, 0, 0)};
  CHECK((S.exp(p, v).coords - Vec(Eigen::Vector3d(2, 0, 0))).norm() < 1e-14);
}

TEST_CASE("hyperbolic closed forms") {
  Hyperbolic H(2);
  const Point o(Eigen::Vector3d(1, 0, 0));
  const Point q(Eigen::Vector3d(std::cosh(1.0), std::sinh(1.0), 0));
  CHECK(H.dist(o, q) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((H.exp(o, TangentVector{o, Eigen::Vector3d(0, 1, 0)}).coords - q.coords).norm() < 1e-14);
  // Along the geodesic of length 1 a transverse unit vector is stretched by coth(1).
  const TangentVector transverse{q, Eigen::Vector3d(0, 0, 1)};
  CHECK(H.norm(H.hess_half_dist_sq(o, q, transverse)) == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(H.check_point(Point(Eigen::Vector3d(0.5, 0, 0))), DomainError);
}

TEST_CASE("closed forms agree with the ODE routes") {
  std::mt19937_64 rng(101);
  std::vector<ManifoldPtr> models{std::make_shared<Sphere>(2), std::make_shared<Sphere>(3, 1.5),
                                  std::make_shared<Hyperbolic>(2), std::make_shared<Hyperbolic>(3, 0.5)};
  for (const auto& M : models) {
    CAPTURE(M->kind());
    const Point p = M->kind() == "sphere"
                        ? Point(Vec::Unit(M->ambient_dim(), M->dim()) * static_cast<const Sphere&>(*M).radius())
                        : static_cast<const Hyperbolic&>(*M).lift(Vec::Zero(M->dim()));
    for (int trial = 0; trial < 5; ++trial) {
      const Point a = near(*M, rng, p, 0.3);
      const TangentVector v = random_tangent(*M, rng, a, 0.7);
      const Point b_closed = M->exp(a, v);
      const Point b_ode = exp_ode(*M, a, v);
      CHECK((b_closed.coords - b_ode.coords).norm() < 1e-8);

      const TangentVector l_closed = M->log(a, b_closed);
      const TangentVector l_shoot = log_shooting(*M, a, b_closed);
      CHECK((l_closed.components - l_shoot.components).norm() < 1e-8);
      CHECK(M->dist(a, b_closed) == doctest::Approx(0.7).epsilon(1e-12));
      // Arclength of the integrated geodesic.
      CHECK(integrate_geodesic(*M, a, v, 1.0).length == doctest::Approx(0.7).epsilon(1e-8));

      const Geodesic g = M->geodesic_between(a, b_closed);
      const TangentVector w = random_tangent(*M, rng, a, 1.0);
      const TangentVector t_closed = M->parallel_transport(g, 0.0, g.length, w);
      const TangentVector t_ode = transport_ode(*M, g, 0.0, g.length, w);
      CHECK((t_closed.components - t_ode.components).norm() < 1e-8);
      CHECK(M->norm(t_closed) == doctest::Approx(1.0).epsilon(1e-12));

      const TangentVector V = random_tangent(*M, rng, b_closed, 1.0);
      const TangentVector h_closed = M->hess_half_dist_sq(a, b_closed, V);
      const TangentVector h_jac = hess_half_dist_sq_jacobi(*M, a, b_closed, V);
      CHECK((h_closed.components - h_jac.components).norm() < 1e-8);

      const TangentVector W = random_tangent(*M, rng, b_closed, 1.0);
      const TangentVector s_closed = M->second_deriv_X(a, b_closed, V, W);
      const TangentVector s_fd = second_deriv_X_fd(*M, a, b_closed, V, W, 1e-3);
      CHECK((s_closed.components - s_fd.components).norm() < 1e-6);
    }
  }
}

TEST_CASE("manifold properties on random pairs") {
  std::mt19937_64 rng(202);
  std::vector<ManifoldPtr> models{std::make_shared<Sphere>(2), std::make_shared<Hyperbolic>(2),
                                  std::make_shared<Sphere>(4), std::make_shared<Hyperbolic>(3)};
  for (const auto& M : models) {
    CAPTURE(M->kind());
    const Point base = M->kind() == "sphere" ? Point(Vec::Unit(M->ambient_dim(), 0))
                                             : static_cast<const Hyperbolic&>(*M).lift(Vec::Zero(M->dim()));
    for (int trial = 0; trial < 50; ++trial) {
      const Point p = near(*M, rng, base, 0.5);
      const Point q = near(*M, rng, base, 0.5);
      const Point r = near(*M, rng, base, 0.5);
      // Round trip.
      CHECK((M->exp(p, M->log(p, q)).coords - q.coords).norm() < 1e-12);
      // Symmetry and triangle inequality.
      CHECK(M->dist(p, q) == doctest::Approx(M->dist(q, p)).epsilon(1e-12));
      CHECK(M->dist(p, r) <= M->dist(p, q) + M->dist(q, r) + 1e-12);
      // Unit speed.
      const Geodesic g = M->geodesic_between(p, q);
      CHECK(M->norm(M->geodesic_velocity(g, 0.37 * g.length)) == doctest::Approx(1.0).epsilon(1e-12));
      // Transport preserves inner products.
      const TangentVector v = random_tangent(*M, rng, p, 1.0), w = random_tangent(*M, rng, p, 1.0);
      const TangentVector tv = M->parallel_transport(g, 0.0, g.length, v);
      const TangentVector tw = M->parallel_transport(g, 0.0, g.length, w);
      CHECK(M->metric(q, tv, tw) == doctest::Approx(M->metric(p, v, w)).epsilon(1e-10));
      // Hessian of half squared distance is self-adjoint and radially the identity.
      const TangentVector V = random_tangent(*M, rng, q, 1.0), W = random_tangent(*M, rng, q, 1.0);
      CHECK(M->metric(q, M->hess_half_dist_sq(p, q, V), W) ==
            doctest::Approx(M->metric(q, V, M->hess_half_dist_sq(p, q, W))).epsilon(1e-12));
      TangentVector radial = M->log(q, p);
      CHECK((M->hess_half_dist_sq(p, q, radial).components - radial.components).norm() < 1e-12);
    }
  }
}

TEST_CASE("hessian deviation from the identity is bounded by C0 dist^2") {
  std::mt19937_64 rng(303);
  for (const ManifoldPtr& M : {ManifoldPtr(std::make_shared<Sphere>(2)), ManifoldPtr(std::make_shared<Hyperbolic>(2))}) {
    const Point base = M->kind() == "sphere" ? Point(Eigen::Vector3d(0, 0, 1)) : Point(Eigen::Vector3d(1, 0, 0));
    for (int trial = 0; trial < 20; ++trial) {
      const Point q = near(*M, rng, base, 0.3);
      const Point p = near(*M, rng, q, 0.4);
      const TangentVector V = random_tangent(*M, rng, q, 1.0);
      const double d = M->dist(p, q);
      const double dev = M->norm({q, M->hess_half_dist_sq(p, q, V).components - V.components});
      CHECK(dev <= M->bounds().C0 * d * d);
    }
  }
}

TEST_CASE("second derivative: skew part is the curvature term") {
  // On constant curvature K, R(V,W)X = K (g(W,X) V - g(V,X) W) with X = -log_q p.
  std::mt19937_64 rng(404);
  for (const ManifoldPtr& M : {ManifoldPtr(std::make_shared<Sphere>(2)), ManifoldPtr(std::make_shared<Hyperbolic>(2))}) {
    const double K = M->kind() == "sphere" ? 1.0 : -1.0;
    const Point base = M->kind() == "sphere" ? Point(Eigen::Vector3d(0, 0, 1)) : Point(Eigen::Vector3d(1, 0, 0));
    for (int trial = 0; trial < 10; ++trial) {
      const Point q = near(*M, rng, base, 0.3);
      const Point p = near(*M, rng, q, 0.5);
      const TangentVector V = random_tangent(*M, rng, q, 1.0), W = random_tangent(*M, rng, q, 1.0);
      const TangentVector X{q, -M->log(q, p).components};
      const Vec skew = M->second_deriv_X(p, q, V, W).components - M->second_deriv_X(p, q, W, V).components;
      const Vec curv = K * (M->metric(q, W, X) * V.components - M->metric(q, V, X) * W.components);
      CHECK((skew - curv).norm() < 1e-10);
    }
  }
}

TEST_CASE("second derivative is O(dist) and vanishes radially") {
  Sphere S(2);
  const Point q(Eigen::Vector3d(0, 0, 1));
  const TangentVector V{q, Eigen::Vector3d(0, 1, 0)};
  std::vector<double> sizes;
  for (double d : {0.4, 0.2, 0.1, 0.05}) {
    const Point p = S.exp(q, TangentVector{q, Eigen::Vector3d(d, 0, 0)});
    sizes.push_back(S.norm(S.second_deriv_X(p, q, V, V)));
    // Along the geodesic X is linear, so the radial second derivative vanishes.
    const TangentVector R{q, Eigen::Vector3d(1, 0, 0)};
    CHECK(S.norm(S.second_deriv_X(p, q, R, R)) < 1e-12);
  }
  for (std::size_t k = 1; k < sizes.size(); ++k) CHECK(sizes[k - 1] / sizes[k] == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("stereographic chart is isometric to the sphere") {
  const ManifoldPtr chart = make_stereographic_sphere_chart(2);
  Sphere S(2);
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unif(-0.6, 0.6);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = Eigen::Vector2d(unif(rng), unif(rng));
    const Vec y = Eigen::Vector2d(unif(rng), unif(rng));
    const Point px(x), py(y);
    const Point sx(stereo_to_sphere(x)), sy(stereo_to_sphere(y));
    CHECK(chart->dist(px, py) == doctest::Approx(S.dist(sx, sy)).epsilon(1e-8));

    const TangentVector lx = chart->log(px, py);
    CHECK((stereo_push(x, lx.components) - S.log(sx, sy).components).norm() < 1e-8);

    const Vec v = Eigen::Vector2d(unif(rng), unif(rng));
    const Point ex = chart->exp(px, {px, v});
    CHECK((stereo_to_sphere(ex.coords) - S.exp(sx, {sx, stereo_push(x, v)}).coords).norm() < 1e-8);
    CHECK(sphere_to_stereo(stereo_to_sphere(x)).isApprox(x));

    const TangentVector V{py, Eigen::Vector2d(unif(rng), unif(rng))};
    const Vec h_chart = stereo_push(y, chart->hess_half_dist_sq(px, py, V).components);
    const Vec h_sphere = S.hess_half_dist_sq(sx, sy, {sy, stereo_push(y, V.components)}).components;
    CHECK((h_chart - h_sphere).norm() < 1e-7);

    const TangentVector W{py, Eigen::Vector2d(unif(rng), unif(rng))};
    const Vec s_chart = stereo_push(y, chart->second_deriv_X(px, py, V, W).components);
    const Vec s_sphere =
        S.second_deriv_X(sx, sy, {sy, stereo_push(y, V.components)}, {sy, stereo_push(y, W.components)}).components;
    CHECK((s_chart - s_sphere).norm() < 1e-5);
  }
}

TEST_CASE("chart with numerically differentiated metric") {
  // Flat metric diag(1, 4): geodesics are straight lines in the chart.
  ChartManifold M(2, [](const Vec&) { return Mat(Eigen::Vector2d(1.0, 4.0).asDiagonal()); });
  const Point p(Eigen::Vector2d(0, 0)), q(Eigen::Vector2d(1, 1));
  CHECK(M.dist(p, q) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
  CHECK((M.log(p, q).components - Vec(Eigen::Vector2d(1, 1))).norm() < 1e-9);
  const Mat B = M.tangent_basis(p.coords);
  CHECK((B.transpose() * M.metric_matrix(p.coords) * B - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK(M.curvature_operator(p.coords, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)).norm() < 1e-6);

  // Finite-difference Christoffels on the Poincare metric match the closed form.
  const ManifoldPtr ball = make_poincare_ball_chart(2);
  const auto& closed = static_cast<const ChartManifold&>(*ball);
  ChartManifold numeric(2, [&](const Vec& x) { return closed.metric_matrix(x); });
  const Vec x = Eigen::Vector2d(0.2, -0.3);
  const auto g1 = closed.christoffel(x), g2 = numeric.christoffel(x);
  for (int i = 0; i < 2; ++i) CHECK((g1[i] - g2[i]).norm() < 1e-8);
}

TEST_CASE("poincare ball chart matches the hyperboloid") {
  const ManifoldPtr ball = make_poincare_ball_chart(2);
  Hyperbolic H(2);
  // x in the ball maps to (1+|x|^2, 2x) / (1-|x|^2) on the hyperboloid.
  auto lift = [](const Vec& x) {
    const double s = x.squaredNorm();
    Vec y(3);
    y(0) = (1 + s) / (1 - s);
    y.tail(2) = 2 * x / (1 - s);
    return Point(y);
  };
  const Vec a = Eigen::Vector2d(0.1, 0.2), b = Eigen::Vector2d(-0.3, 0.25);
  CHECK(ball->dist(Point(a), Point(b)) == doctest::Approx(H.dist(lift(a), lift(b))).epsilon(1e-8));
  CHECK(ball->bounds().C0 == doctest::Approx(1.0));
}

TEST_CASE("bounds validation") {
  ManifoldBounds b;
  b.C0 = -1;
  CHECK_THROWS_AS(b.validate(), DomainError);
  CHECK_THROWS_AS(Sphere(0), DomainError);
  CHECK_THROWS_AS(Sphere(2, -1.0), DomainError);
  CHECK_THROWS_AS(Hyperbolic(2, 0.0), DomainError);
  Sphere S(2);
  CHECK(S.bounds().convexity_radius == doctest::Approx(pi / 2));
  CHECK(S.bounds().injectivity_radius == doctest::Approx(pi));
}
