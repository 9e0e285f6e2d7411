#include "karcher/karcher.hpp"

#include <cmath>

namespace karcher {

namespace {

EdgeLengthSystem pairwise_lengths(const Manifold& M, const std::vector<Point>& vertices) {
  require(vertices.size() >= 2, "KarcherChart: need at least two vertices");
  const auto k = static_cast<Eigen::Index>(vertices.size());
  Mat l = Mat::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    M.check_point(vertices[i]);
    for (Eigen::Index j = i + 1; j < k; ++j) l(i, j) = l(j, i) = M.dist(vertices[i], vertices[j]);
  }
  return EdgeLengthSystem(l);
}

// Coordinates of u in the g-orthonormal basis B of T_x M.
Vec coords(const Manifold& M, const Vec& x, const Mat& B, const Vec& u) {
  Vec c(B.cols());
  for (Eigen::Index k = 0; k < B.cols(); ++k) c(k) = M.inner(x, B.col(k), u);
  return c;
}

Mat hessian_matrix(const Manifold& M, const Point& p, const Point& x, const Mat& B) {
  Mat H(B.cols(), B.cols());
  for (Eigen::Index l = 0; l < B.cols(); ++l) {
    H.col(l) = coords(M, x.coords, B, M.hess_half_dist_sq(p, x, TangentVector{x, B.col(l)}).components);
  }
  return H;
}

Eigen::FullPivLU<Mat> factor_a(const Mat& A) {
  Eigen::FullPivLU<Mat> lu(A);
  const double smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double largest = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
  if (!(smallest > 1e-12 * largest)) throw NumericalError("karcher: A is numerically singular");
  return lu;
}

}  // namespace

SolverConfig SolverConfig::for_scale(double h) {
  SolverConfig c;
  c.grad_tol = 1e-12 * std::max(h, 1e-3);
  return c;
}

void SolverConfig::validate() const {
  require(grad_tol > 0.0, "SolverConfig: grad_tol must be positive");
  require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
  require(step_damping > 0.0 && step_damping <= 1.0, "SolverConfig: step_damping must lie in (0, 1]");
}

// ---------------------------------------------------------------------------

TangentVector ChartJet::sigma(const SimplexTangent& v) const {
  require(v.n() == n(), "ChartJet::sigma: dimension mismatch");
  return {point, basis * (sigma_coords * v.values())};
}

TangentVector ChartJet::dx(const SimplexTangent& v) const {
  require(v.n() == n(), "ChartJet::dx: dimension mismatch");
  return {point, basis * (dx_coords * v.values())};
}

Vec ChartJet::nabla_dx_coords(const Vec& v_unit, const Vec& w_unit) const {
  require(has_hessian(), "ChartJet: second derivatives were not computed");
  const int nn = n();
  Vec out = Vec::Zero(basis.cols());
  for (int j = 0; j < nn; ++j)
    for (int k = 0; k < nn; ++k) out += v_unit(j) * w_unit(k) * nabla_coords[j * nn + k];
  return out;
}

TangentVector ChartJet::nabla_dx(const SimplexTangent& v, const SimplexTangent& w) const {
  require(v.n() == n() && w.n() == n(), "ChartJet::nabla_dx: dimension mismatch");
  return {point, basis * nabla_dx_coords(v.unit_coords(), w.unit_coords())};
}

Mat ChartJet::pullback_metric() const {
  const Mat D = dx_coords.rightCols(n()).colwise() - dx_coords.col(0);
  return D.transpose() * D;
}

// ---------------------------------------------------------------------------

KarcherChart::KarcherChart(ManifoldPtr manifold, std::vector<Point> vertices, std::optional<SolverConfig> solver)
    : manifold_(std::move(manifold)),
      vertices_(std::move(vertices)),
      lengths_(pairwise_lengths(*manifold_, vertices_)) {
  solver_ = solver.value_or(SolverConfig::for_scale(lengths_.max_length()));
  solver_.validate();
  if (lengths_.max_length() >= manifold_->bounds().convexity_radius) {
    throw DomainError("KarcherChart: vertices are not within the convexity radius of each other");
  }
}

void KarcherChart::check_weight(const BarycentricWeight& lambda) const {
  require(lambda.n() == n(), "KarcherChart: weight has wrong dimension");
}

double KarcherChart::energy(const Point& a, const BarycentricWeight& lambda) const {
  check_weight(lambda);
  double e = 0.0;
  for (int i = 0; i <= n(); ++i) {
    if (lambda[i] == 0.0) continue;
    const double d = manifold_->dist(a, vertices_[i]);
    e += lambda[i] * d * d;
  }
  return e;
}

TangentVector KarcherChart::grad_field(const Point& a, const BarycentricWeight& lambda) const {
  check_weight(lambda);
  Vec F = Vec::Zero(manifold_->ambient_dim());
  for (int i = 0; i <= n(); ++i) {
    if (lambda[i] == 0.0) continue;
    F -= lambda[i] * manifold_->log(a, vertices_[i]).components;
  }
  return {a, F};
}

Point KarcherChart::initial_iterate(const BarycentricWeight& lambda) const {
  check_weight(lambda);
  const Point& p0 = vertices_[0];
  Vec v = Vec::Zero(manifold_->ambient_dim());
  for (int i = 1; i <= n(); ++i) {
    if (lambda[i] == 0.0) continue;
    v += lambda[i] * manifold_->log(p0, vertices_[i]).components;
  }
  return manifold_->exp(p0, TangentVector{p0, v});
}

MeanSolve KarcherChart::solve_mean(const BarycentricWeight& lambda) const {
  const Manifold& M = *manifold_;
  const double radius = M.bounds().convexity_radius;
  MeanSolve out;
  Point a = initial_iterate(lambda);
  for (int it = 0;; ++it) {
    const TangentVector F = grad_field(a, lambda);
    out.grad_norm = M.norm(F);
    out.energies.push_back(energy(a, lambda));
    if (out.grad_norm <= solver_.grad_tol) {
      out.point = a;
      out.iterations = it;
      return out;
    }
    if (it == solver_.max_iters) break;
    a = M.exp(a, TangentVector{a, -solver_.step_damping * F.components});
    if (M.dist(a, vertices_[0]) >= radius) throw NumericalError("karcher_mean: iterate left the convex ball");
  }
  throw NumericalError("karcher_mean: no convergence within max_iters (|F| = " + std::to_string(out.grad_norm) + ")");
}

TangentVector KarcherChart::sigma(const BarycentricWeight& lambda, const SimplexTangent& v) const {
  require(v.n() == n(), "sigma: dimension mismatch");
  const Point x = karcher_mean(lambda);
  Vec s = Vec::Zero(manifold_->ambient_dim());
  for (int i = 0; i <= n(); ++i) {
    if (v.values()(i) == 0.0) continue;
    s += v.values()(i) * manifold_->log(x, vertices_[i]).components;
  }
  return {x, s};
}

Mat KarcherChart::a_matrix(const Point& x, const BarycentricWeight& lambda) const {
  check_weight(lambda);
  const Manifold& M = *manifold_;
  const Mat B = M.tangent_basis(x.coords);
  Mat A = Mat::Zero(B.cols(), B.cols());
  for (int i = 0; i <= n(); ++i) {
    if (lambda[i] == 0.0) continue;
    A += lambda[i] * hessian_matrix(M, vertices_[i], x, B);
  }
  return A;
}

TangentVector KarcherChart::a_operator(const BarycentricWeight& lambda, const TangentVector& V) const {
  check_weight(lambda);
  manifold_->check_tangent(V);
  Vec out = Vec::Zero(manifold_->ambient_dim());
  for (int i = 0; i <= n(); ++i) {
    if (lambda[i] == 0.0) continue;
    out += lambda[i] * manifold_->hess_half_dist_sq(vertices_[i], V.base, V).components;
  }
  return {V.base, out};
}

ChartJet KarcherChart::differential(const BarycentricWeight& lambda) const { return build_jet(lambda, false); }

ChartJet KarcherChart::hessian(const BarycentricWeight& lambda) const { return build_jet(lambda, true); }

ChartJet KarcherChart::build_jet(const BarycentricWeight& lambda, bool with_hessian) const {
  check_weight(lambda);
  const Manifold& M = *manifold_;
  const int nn = n();
  ChartJet jet;
  jet.point = karcher_mean(lambda);
  const Point& x = jet.point;
  jet.basis = M.tangent_basis(x.coords);
  const Mat& B = jet.basis;
  const auto m = B.cols();

  std::vector<Mat> H(nn + 1);
  jet.a_matrix = Mat::Zero(m, m);
  jet.sigma_coords.resize(m, nn + 1);
  for (int i = 0; i <= nn; ++i) {
    jet.sigma_coords.col(i) = coords(M, x.coords, B, M.log(x, vertices_[i]).components);
    if (lambda[i] != 0.0 || with_hessian) H[i] = hessian_matrix(M, vertices_[i], x, B);
    if (lambda[i] != 0.0) jet.a_matrix += lambda[i] * H[i];
  }
  const auto lu = factor_a(jet.a_matrix);
  jet.dx_coords = lu.solve(jet.sigma_coords);
  if (!with_hessian) return jet;

  // A(nabla dx(v,w)) = -(sum w^i nabla_V X_i + sum v^i nabla_W X_i + sum lambda^i nabla^2_{W,V} X_i)
  jet.nabla_coords.resize(nn * nn);
  for (int j = 1; j <= nn; ++j) {
    const Vec Vc = jet.dx_coords.col(j) - jet.dx_coords.col(0);
    const TangentVector V{x, B * Vc};
    for (int k = 1; k <= nn; ++k) {
      const Vec Wc = jet.dx_coords.col(k) - jet.dx_coords.col(0);
      const TangentVector W{x, B * Wc};
      Vec rhs = (H[k] - H[0]) * Vc + (H[j] - H[0]) * Wc;
      for (int i = 0; i <= nn; ++i) {
        if (lambda[i] == 0.0) continue;
        rhs += lambda[i] * coords(M, x.coords, B, M.second_deriv_X(vertices_[i], x, W, V).components);
      }
      jet.nabla_coords[(j - 1) * nn + (k - 1)] = -lu.solve(rhs);
    }
  }
  return jet;
}

}  // namespace karcher
