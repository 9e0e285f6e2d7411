#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "karcher/flat_simplex.hpp"

#include <cmath>
#include <random>

using namespace karcher;

namespace {

Mat equilateral(int n, double side = 1.0) {
  return side * (Mat::Ones(n + 1, n + 1) - Mat::Identity(n + 1, n + 1));
}

Mat random_points(std::mt19937_64& rng, int dim, int count) {
  std::normal_distribution<double> nd;
  Mat p(dim, count);
  for (Eigen::Index k = 0; k < p.size(); ++k) p.data()[k] = nd(rng);
  return p;
}

// Vertex coordinates from the Cholesky factor of G: rows of L, with p_0 at the origin.
Mat realize(const FlatMetric& gm) {
  const Mat L = Eigen::LLT<Mat>(gm.G).matrixL();
  Mat pts = Mat::Zero(gm.n, gm.n + 1);
  pts.rightCols(gm.n) = L.transpose();
  return pts;
}

double simplex_volume_from_points(const Mat& pts) {
  const int n = static_cast<int>(pts.rows());
  const Mat edges = pts.rightCols(n).colwise() - pts.col(0);
  return std::abs(edges.determinant()) / factorial<double>(n);
}

}  // namespace

TEST_CASE("edge length system validates its table") {
  CHECK_THROWS_AS(EdgeLengthSystem(Mat::Ones(3, 3)), DomainError);
  Mat asym = equilateral(2);
  asym(0, 1) = 2.0;
  CHECK_THROWS_AS(EdgeLengthSystem{asym}, DomainError);
  Mat zero = equilateral(2);
  zero(0, 1) = zero(1, 0) = 0.0;
  CHECK_THROWS_AS(EdgeLengthSystem{zero}, DomainError);
  CHECK_NOTHROW(EdgeLengthSystem(equilateral(3)));
}

TEST_CASE("barycentric weights and simplex tangents enforce their invariants") {
  CHECK_THROWS_AS(BarycentricWeight(Eigen::Vector3d(0.5, 0.6, -0.1)), DomainError);
  CHECK_THROWS_AS(BarycentricWeight(Eigen::Vector3d(0.5, 0.4, 0.2)), DomainError);
  CHECK_NOTHROW(BarycentricWeight::barycenter(4));
  CHECK(BarycentricWeight::normalized(Eigen::Vector3d(1, 2, 1)).values().sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(SimplexTangent(Eigen::Vector3d(1, 0, 0)), DomainError);
  const SimplexTangent e = SimplexTangent::edge(2, 0, 2);
  CHECK(e.values() == Eigen::Vector3d(-1, 0, 1));
  CHECK(SimplexTangent::from_unit_coords(Eigen::Vector2d(0, 1)).values() == e.values());
}

TEST_CASE("flat metric from lengths") {
  SUBCASE("equilateral triangle recovers the edge length") {
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem(equilateral(2)));
    CHECK(gm.realizable);
    const SimplexTangent v = SimplexTangent::edge(2, 0, 1);
    CHECK(evaluate(gm, v, v) == doctest::Approx(1.0));
  }
  SUBCASE("equilateral of side h gives h^2") {
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem(equilateral(2, 0.3)));
    const SimplexTangent v = SimplexTangent::edge(2, 0, 1);
    CHECK(evaluate(gm, v, v) == doctest::Approx(0.09).epsilon(1e-14));
  }
  SUBCASE("right triangle has identity Gram matrix") {
    Mat l(3, 3);
    l << 0, 1, 1, 1, 0, std::sqrt(2.0), 1, std::sqrt(2.0), 0;
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem(l));
    CHECK(gm.realizable);
    CHECK((gm.G - Mat::Identity(2, 2)).norm() < 1e-14);
  }
  SUBCASE("collinear points are flagged, not rejected") {
    Mat l(3, 3);
    l << 0, 1, 1, 1, 0, 2, 1, 2, 0;
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem(l));
    CHECK_FALSE(gm.realizable);
    CHECK(std::abs(gm.G.determinant()) < 1e-14);
    CHECK_THROWS_AS(volume(gm), DomainError);
  }
  SUBCASE("triangle inequality violation is not realizable") {
    Mat l(3, 3);
    l << 0, 1, 1, 1, 0, 2.5, 1, 2.5, 0;
    CHECK_FALSE(flat_metric_from_lengths(EdgeLengthSystem(l)).realizable);
  }
}

TEST_CASE("evaluate is gauge invariant and matches realized coordinates") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rho(-3.0, 3.0);
  for (int n = 2; n <= 4; ++n) {
    const Mat pts = random_points(rng, n, n + 1);
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(pts));
    REQUIRE(gm.realizable);
    const Mat realized = realize(gm);
    for (int trial = 0; trial < 20; ++trial) {
      const SimplexTangent v = SimplexTangent::from_unit_coords(random_points(rng, n, 1));
      const SimplexTangent w = SimplexTangent::from_unit_coords(random_points(rng, n, 1));
      FlatMetric shifted = gm;
      shifted.E.array() += rho(rng);
      CHECK(evaluate(shifted, v, w) == doctest::Approx(evaluate(gm, v, w)).epsilon(1e-12));
      CHECK(evaluate(gm, v, w) == doctest::Approx(evaluate(gm, w, v)).epsilon(1e-14));
      // Both the original points and the Cholesky realization reproduce g^e(v,v).
      const Vec av = pts * v.values();
      const Vec bv = realized * v.values();
      CHECK(evaluate(gm, v, v) == doctest::Approx(av.squaredNorm()).epsilon(1e-10));
      CHECK(evaluate(gm, v, v) == doctest::Approx(bv.squaredNorm()).epsilon(1e-10));
    }
  }
  const FlatMetric gm2 = flat_metric_from_lengths(EdgeLengthSystem(equilateral(2)));
  CHECK_THROWS_AS(evaluate(gm2, SimplexTangent::edge(3, 0, 1), SimplexTangent::edge(3, 0, 1)), DomainError);
}

TEST_CASE("volume") {
  Mat right(3, 3);
  right << 0, 1, 1, 1, 0, std::sqrt(2.0), 1, std::sqrt(2.0), 0;
  CHECK(volume(flat_metric_from_lengths(EdgeLengthSystem(right))) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(volume(flat_metric_from_lengths(EdgeLengthSystem(equilateral(2)))) ==
        doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));

  Mat tet(3, 4);
  tet << 0, 1, 0.5, 0.5, 0, 0, std::sqrt(3.0) / 2, std::sqrt(3.0) / 6, 0, 0, 0, std::sqrt(6.0) / 3;
  const double tet_volume = simplex_volume_from_points(tet);
  CHECK(tet_volume == doctest::Approx(std::sqrt(2.0) / 12).epsilon(1e-14));
  const FlatMetric gt = flat_metric_from_lengths(EdgeLengthSystem(equilateral(3)));
  CHECK(volume(gt) == doctest::Approx(tet_volume).epsilon(1e-13));
  CHECK(volume_gram(gt) == doctest::Approx(tet_volume).epsilon(1e-13));
}

TEST_CASE("realizable random point sets: both volume formulas match coordinates") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    const Mat pts = random_points(rng, n, n + 1);
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(pts));
    const double reference = simplex_volume_from_points(pts);
    if (reference < 1e-3) continue;
    REQUIRE(gm.realizable);
    CHECK(volume(gm) == doctest::Approx(reference).epsilon(1e-9));
    CHECK(volume_gram(gm) == doctest::Approx(volume(gm)).epsilon(1e-10));
  }
}

TEST_CASE("fullness") {
  const FlatMetric eq = flat_metric_from_lengths(EdgeLengthSystem(equilateral(2, 0.7)));
  CHECK(std::abs(fullness(eq, 0.7) - std::sqrt(3.0) / 2) < 1e-12);
  CHECK(max_fullness<double>(2) == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(std::abs(fullness(flat_metric_from_lengths(EdgeLengthSystem(equilateral(3))), 1.0) -
                 max_fullness<double>(3)) < 1e-12);

  Mat right(3, 3);
  right << 0, 1, 1, 1, 0, std::sqrt(2.0), 1, std::sqrt(2.0), 0;
  CHECK(fullness(flat_metric_from_lengths(EdgeLengthSystem(right)), std::sqrt(2.0)) == doctest::Approx(0.5));

  Mat thin(3, 3);
  thin << 0, 1, 1, 1, 0, 1.999, 1, 1.999, 0;
  const double a = 1, b = 1, c = 1.999, s = (a + b + c) / 2;
  const double heron = std::sqrt(s * (s - a) * (s - b) * (s - c));
  const double theta = fullness(flat_metric_from_lengths(EdgeLengthSystem(thin)), c);
  CHECK(theta == doctest::Approx(2.0 * heron / (c * c)).epsilon(1e-9));
  CHECK(theta < 0.07);

  CHECK_THROWS_AS(fullness(eq, 0.5), DomainError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(random_points(rng, n, n + 1)));
    if (!gm.realizable) continue;
    CHECK(fullness(gm, max_edge_length(gm)) <= max_fullness<double>(n) + 1e-12);
  }
}

TEST_CASE("Gram eigenvalue bounds") {
  const FlatMetric eq = flat_metric_from_lengths(EdgeLengthSystem(equilateral(2)));
  const EigenBounds b = gram_eigen_bounds(eq, 1.0);
  CHECK(b.eigenvalues(0) == doctest::Approx(0.5));
  CHECK(b.eigenvalues(1) == doctest::Approx(1.5));
  CHECK(std::sqrt(b.lo) == doctest::Approx(std::sqrt(3.0) / 4));
  CHECK(b.hi == doctest::Approx(4.0));
  CHECK(b.contained);

  Mat right(3, 3);
  right << 0, 1, 1, 1, 0, std::sqrt(2.0), 1, std::sqrt(2.0), 0;
  CHECK(gram_eigen_bounds(flat_metric_from_lengths(EdgeLengthSystem(right)), std::sqrt(2.0)).contained);

  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 100) {
    const int n = 2 + checked % 2;
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(random_points(rng, n, n + 1)));
    if (!gm.realizable) continue;
    const double h = max_edge_length(gm);
    if (fullness(gm, h) < 0.1) continue;
    CHECK(gram_eigen_bounds(gm, h).contained);
    ++checked;
  }
}

TEST_CASE("compare_metrics") {
  std::mt19937_64 rng(13);
  const FlatMetric g1 = flat_metric_from_lengths(EdgeLengthSystem::from_points(random_points(rng, 3, 4)));
  REQUIRE(g1.realizable);
  CHECK(compare_metrics(g1, g1) < 1e-14);

  FlatMetric scaled = g1;
  scaled.E *= 1.003;
  scaled.G *= 1.003;
  CHECK(std::abs(compare_metrics(g1, scaled) - 0.003) < 1e-12);

  // The sup of |(g1 - g2)(v,v)| / g1(v,v) dominates random directions, and
  // polarizes to |(g1 - g2)(v,w)| <= eps |v| |w|.
  FlatMetric other = flat_metric_from_lengths(EdgeLengthSystem::from_points(random_points(rng, 3, 4)));
  REQUIRE(other.realizable);
  const double eps = compare_metrics(g1, other);
  for (int trial = 0; trial < 50; ++trial) {
    const SimplexTangent v = SimplexTangent::from_unit_coords(random_points(rng, 3, 1));
    const SimplexTangent w = SimplexTangent::from_unit_coords(random_points(rng, 3, 1));
    const double vv = evaluate(g1, v, v), ww = evaluate(g1, w, w);
    CHECK(std::abs(vv - evaluate(other, v, v)) <= eps * vv * (1 + 1e-10));
    CHECK(std::abs(evaluate(g1, v, w) - evaluate(other, v, w)) <= eps * std::sqrt(vv * ww) * (1 + 1e-10));
  }

  FlatMetric bad = g1;
  bad.G = -g1.G;
  CHECK_THROWS_AS(compare_metrics(bad, g1), DomainError);
}

TEST_CASE("compare_metrics scales linearly with edge-length perturbations") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Mat pts = random_points(rng, 2, 3);
  const EdgeLengthSystem base = EdgeLengthSystem::from_points(pts);
  const FlatMetric g = flat_metric_from_lengths(base);
  const double theta = fullness(g, base.max_length());
  std::vector<double> deltas, gaps;
  Mat pattern = Mat::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) pattern(i, j) = pattern(j, i) = unif(rng);
  for (double delta : {1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4}) {
    const Mat l = base.lengths().cwiseProduct(Mat::Ones(3, 3) + delta * pattern);
    const double gap = compare_metrics(g, flat_metric_from_lengths(EdgeLengthSystem(l)));
    CHECK(gap <= 10.0 * delta / (theta * theta));
    deltas.push_back(std::log(delta));
    gaps.push_back(std::log(gap));
  }
  const double slope = (gaps.back() - gaps.front()) / (deltas.back() - deltas.front());
  CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("inner product estimate with constant n^n / (theta h)") {
  std::mt19937_64 rng(19);
  int checked = 0;
  while (checked < 100) {
    const int n = 2 + checked % 2;
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem::from_points(random_points(rng, n, n + 1)));
    if (!gm.realizable) continue;
    const double h = max_edge_length(gm);
    const double theta = fullness(gm, h);
    if (theta < 0.05) continue;
    const SimplexTangent v = SimplexTangent::from_unit_coords(random_points(rng, n, 1));
    const Mat Y = random_points(rng, 3, n + 1);
    const double lhs = (Y * v.values()).norm();
    const double rhs = std::pow(n, n) / (theta * h) * std::sqrt(evaluate(gm, v, v)) * Y.colwise().norm().sum();
    CHECK(lhs <= rhs);
    ++checked;
  }
}

TEST_CASE("insphere radius of the unit simplex") {
  CHECK(insphere_radius_unit_simplex(1) == doctest::Approx(0.5));
  CHECK(insphere_radius_unit_simplex(2) == doctest::Approx(0.2928932188));
  CHECK(insphere_radius_unit_simplex(3) == doctest::Approx(0.2113248654));
  CHECK_THROWS_AS(insphere_radius_unit_simplex(0), DomainError);
}

TEST_CASE("templated on the scalar type") {
  using LD = long double;
  DenseMatrix<LD> l = DenseMatrix<LD>::Ones(3, 3) - DenseMatrix<LD>::Identity(3, 3);
  const auto gm = flat_metric_from_lengths(BasicEdgeLengthSystem<LD>(l));
  CHECK(std::abs(fullness<LD>(gm, 1.0L) - std::sqrt(3.0L) / 2) < 1e-15L);
  auto gf = flat_metric_from_lengths(BasicEdgeLengthSystem<float>(Eigen::MatrixXf::Ones(3, 3) - Eigen::MatrixXf::Identity(3, 3)));
  CHECK(gf.realizable);
}
