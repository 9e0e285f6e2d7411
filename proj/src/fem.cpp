#include "karcher/fem.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace karcher {

namespace {

using Edge = std::pair<int, int>;

Edge edge_key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct QuadNode {
  double u1, u2, w;  // unit-simplex coordinates, weight (weights sum to 1)
};

// Degree 2, interior nodes.
const std::array<QuadNode, 3> kRule3{{{1.0 / 6, 1.0 / 6, 1.0 / 3}, {2.0 / 3, 1.0 / 6, 1.0 / 3}, {1.0 / 6, 2.0 / 3, 1.0 / 3}}};

// Degree 4 (Dunavant).
const std::array<QuadNode, 6> kRule6 = [] {
  const double a = 0.445948490915965, wa = 0.223381589678011;
  const double b = 0.091576213509771, wb = 0.109951743655322;
  return std::array<QuadNode, 6>{{{a, a, wa},
                                  {1 - 2 * a, a, wa},
                                  {a, 1 - 2 * a, wa},
                                  {b, b, wb},
                                  {1 - 2 * b, b, wb},
                                  {b, 1 - 2 * b, wb}}};
}();

Vec weights_of(const QuadNode& q) { return Eigen::Vector3d(1.0 - q.u1 - q.u2, q.u1, q.u2); }

// Rows: d phi_k on the unit-coordinate directions e_1 - e_0, e_2 - e_0.
const Eigen::Matrix<double, 2, 3> kDphi = (Eigen::Matrix<double, 2, 3>() << -1, 1, 0, -1, 0, 1).finished();

Vec deflate(Vec v) { return v.array() - v.mean(); }

}  // namespace

SphereMesh icosphere(int level) {
  require(level >= 0, "icosphere: level must be >= 0");
  const double phi = std::numbers::phi;
  SphereMesh mesh;
  for (double s1 : {-1.0, 1.0})
    for (double s2 : {-1.0, 1.0}) {
      mesh.vertices.emplace_back(0.0, s1, s2 * phi);
      mesh.vertices.emplace_back(s1, s2 * phi, 0.0);
      mesh.vertices.emplace_back(s2 * phi, 0.0, s1);
    }
  // Faces are the triples of mutually adjacent vertices (edge length 2), oriented outward.
  const int nv = static_cast<int>(mesh.vertices.size());
  auto adjacent = [&](int i, int j) { return std::abs((mesh.vertices[i] - mesh.vertices[j]).squaredNorm() - 4.0) < 1e-9; };
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      for (int k = j + 1; k < nv; ++k) {
        if (!adjacent(i, j) || !adjacent(j, k) || !adjacent(i, k)) continue;
        const auto& a = mesh.vertices[i];
        const auto& b = mesh.vertices[j];
        const auto& c = mesh.vertices[k];
        if ((b - a).cross(c - a).dot(a + b + c) > 0.0)
          mesh.triangles.push_back({i, j, k});
        else
          mesh.triangles.push_back({i, k, j});
      }
  for (auto& v : mesh.vertices) v.normalize();

  for (int l = 0; l < level; ++l) {
    std::map<Edge, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      return it->second;
    };
    std::vector<Triangle> next;
    next.reserve(4 * mesh.triangles.size());
    for (const auto& [a, b, c] : mesh.triangles) {
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  return mesh;
}

double KarcherTriangulation::edge_length(int t, int i, int j) const {
  const Triangle& tr = triangles.at(t);
  auto local = [&](int g) {
    for (int k = 0; k < 3; ++k)
      if (tr[k] == g) return k;
    throw DomainError("edge_length: vertex not in triangle");
  };
  return std::sqrt(-2.0 * metrics[t].E(local(i), local(j)));
}

KarcherTriangulation build_triangulation(const ManifoldPtr& manifold, int level, double min_fullness) {
  const auto* sphere = dynamic_cast<const Sphere*>(manifold.get());
  require(sphere != nullptr && sphere->dim() == 2, "build_triangulation: manifold must be the 2-sphere");
  const SphereMesh mesh = icosphere(level);
  KarcherTriangulation tri;
  tri.manifold = manifold;
  tri.triangles = mesh.triangles;
  for (const auto& v : mesh.vertices) tri.vertices.emplace_back(sphere->radius() * Vec(v));

  std::map<Edge, double> lengths;
  for (const auto& t : tri.triangles)
    for (int k = 0; k < 3; ++k) {
      const Edge e = edge_key(t[k], t[(k + 1) % 3]);
      if (!lengths.count(e)) lengths[e] = manifold->dist(tri.vertices[e.first], tri.vertices[e.second]);
    }

  tri.min_theta = std::numeric_limits<double>::infinity();
  tri.metrics.reserve(tri.triangles.size());
  tri.charts.reserve(tri.triangles.size());
  for (const auto& t : tri.triangles) {
    Mat l = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) l(i, j) = l(j, i) = lengths.at(edge_key(t[i], t[j]));
    const FlatMetric gm = flat_metric_from_lengths(EdgeLengthSystem(l));
    if (!gm.realizable) throw DomainError("build_triangulation: triangle is not realizable");
    const double hmax = l.maxCoeff();
    const double theta = fullness(gm, hmax);
    tri.h = std::max(tri.h, hmax);
    tri.min_theta = std::min(tri.min_theta, theta);
    if (theta < min_fullness) throw DomainError("build_triangulation: triangle fullness below the minimum");
    tri.metrics.push_back(gm);
    tri.charts.emplace_back(manifold, std::vector<Point>{tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]});
  }
  return tri;
}

std::string to_string(AssemblyMode mode) { return mode == AssemblyMode::Flat ? "flat" : "pulled-back"; }

AssemblyMode assembly_mode_from_string(const std::string& s) {
  if (s == "flat") return AssemblyMode::Flat;
  if (s == "pulled-back") return AssemblyMode::PulledBack;
  throw DomainError("unknown assembly mode '" + s + "'");
}

FemSystem assemble(const KarcherTriangulation& tri, const ScalarField& f, AssemblyMode mode) {
  const auto nv = static_cast<Eigen::Index>(tri.vertices.size());
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(9 * tri.triangles.size());
  mt.reserve(9 * tri.triangles.size());
  FemSystem sys;
  sys.mode = mode;
  sys.load = Vec::Zero(nv);

  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const Triangle& tr = tri.triangles[t];
    const KarcherChart& chart = tri.charts[t];
    Eigen::Matrix3d Kt = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d Mt = Eigen::Matrix3d::Zero();
    Eigen::Vector3d bt = Eigen::Vector3d::Zero();
    const Mat& Gflat = tri.metrics[t].G;
    const double flat_area = 0.5 * std::sqrt(Gflat.determinant());
    if (mode == AssemblyMode::Flat) Kt = flat_area * kDphi.transpose() * Gflat.inverse() * kDphi;

    for (const auto& q : kRule3) {
      const BarycentricWeight lambda(weights_of(q));
      double area = flat_area;
      Point x;
      if (mode == AssemblyMode::PulledBack) {
        const ChartJet jet = chart.differential(lambda);
        const Mat P = jet.pullback_metric();
        area = 0.5 * std::sqrt(P.determinant());
        Kt += q.w * area * kDphi.transpose() * P.inverse() * kDphi;
        x = jet.point;
      } else {
        x = chart.karcher_mean(lambda);
      }
      const Eigen::Vector3d phi = lambda.values();
      Mt += q.w * area * phi * phi.transpose();
      bt -= q.w * area * f(x) * phi;
    }
    for (int i = 0; i < 3; ++i) {
      sys.load(tr[i]) += bt(i);
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tr[i], tr[j], Kt(i, j));
        mt.emplace_back(tr[i], tr[j], Mt(i, j));
      }
    }
  }
  sys.stiffness.resize(nv, nv);
  sys.mass.resize(nv, nv);
  sys.stiffness.setFromTriplets(kt.begin(), kt.end());
  sys.mass.setFromTriplets(mt.begin(), mt.end());
  return sys;
}

Vec solve_poisson(const FemSystem& sys, SolveInfo* info) {
  const auto n = sys.stiffness.rows();
  require(sys.load.size() == n, "solve_poisson: load has wrong size");
  const SparseMatrix& K = sys.stiffness;
  const Vec b = deflate(sys.load);
  SolveInfo local;
  SolveInfo& out = info ? *info : local;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out = SolveInfo{0, 0.0, n < 500};
    return Vec::Zero(n);
  }

  Vec u;
  if (n < 500) {
    // K + 1 1^T is nonsingular and maps zero-mean vectors to K u.
    const Mat dense = Mat(K) + Mat::Ones(n, n);
    u = deflate(dense.ldlt().solve(b));
    out.dense = true;
    out.iterations = 0;
  } else {
    const Vec dinv = K.diagonal().cwiseInverse();
    u = Vec::Zero(n);
    Vec r = b;
    Vec z = deflate(dinv.cwiseProduct(r));
    Vec p = z;
    double rz = r.dot(z);
    const int max_iters = static_cast<int>(10 * n);
    int it = 0;
    for (; it < max_iters && r.norm() > 1e-12 * bnorm; ++it) {
      const Vec Kp = K * p;
      const double alpha = rz / p.dot(Kp);
      u += alpha * p;
      r = deflate(r - alpha * Kp);
      z = deflate(dinv.cwiseProduct(r));
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    u = deflate(u);
    out.iterations = it;
    out.dense = false;
  }
  out.relative_residual = (K * u - b).norm() / bnorm;
  if (!(out.relative_residual <= 1e-10)) {
    throw NumericalError("solve_poisson: no convergence (relative residual " + std::to_string(out.relative_residual) + ")");
  }
  return u;
}

ErrorNorms error_norms(const KarcherTriangulation& tri, const Vec& u_h, const ScalarField& u_exact,
                       const GradientField& grad_u_exact) {
  require(u_h.size() == static_cast<Eigen::Index>(tri.vertices.size()), "error_norms: u_h has wrong size");
  const Manifold& M = *tri.manifold;
  double l2 = 0.0, semi = 0.0;
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const Triangle& tr = tri.triangles[t];
    const Eigen::Vector3d nodal(u_h(tr[0]), u_h(tr[1]), u_h(tr[2]));
    const Eigen::Vector2d du_h = kDphi * nodal;
    for (const auto& q : kRule6) {
      const BarycentricWeight lambda(weights_of(q));
      const ChartJet jet = tri.charts[t].differential(lambda);
      const Mat P = jet.pullback_metric();
      const double area = 0.5 * std::sqrt(P.determinant());
      const double diff = lambda.values().dot(nodal) - u_exact(jet.point);
      const Vec grad = grad_u_exact(jet.point);
      Eigen::Vector2d c;
      for (int j = 0; j < 2; ++j) {
        const Vec dxj = jet.basis * (jet.dx_coords.col(j + 1) - jet.dx_coords.col(0));
        c(j) = du_h(j) - M.inner(jet.point.coords, grad, dxj);
      }
      l2 += q.w * area * diff * diff;
      semi += q.w * area * c.dot(P.ldlt().solve(Vec(c)));
    }
  }
  return ErrorNorms{std::sqrt(l2), std::sqrt(l2 + semi)};
}

Vec interpolate(const KarcherTriangulation& tri, const ScalarField& u) {
  Vec out(tri.vertices.size());
  for (std::size_t i = 0; i < tri.vertices.size(); ++i) out(static_cast<Eigen::Index>(i)) = u(tri.vertices[i]);
  return out;
}

void write_off(const KarcherTriangulation& tri, std::ostream& os) {
  os << "OFF\n" << tri.vertices.size() << ' ' << tri.triangles.size() << " 0\n";
  const auto old = os.precision(17);
  for (const auto& v : tri.vertices) {
    for (Eigen::Index k = 0; k < v.coords.size(); ++k) os << (k ? " " : "") << v.coords(k);
    os << '\n';
  }
  for (const auto& t : tri.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os.precision(old);
}

FemLevelResult run_poisson_level(int level, AssemblyMode mode) {
  auto M = std::make_shared<Sphere>(2);
  const KarcherTriangulation tri = build_triangulation(M, level);
  const ScalarField f = [](const Point& p) { return -2.0 * p.coords(2); };
  const ScalarField u = [](const Point& p) { return p.coords(2); };
  const GradientField grad_u = [](const Point& p) -> Vec { return Vec(Eigen::Vector3d::UnitZ()) - p.coords(2) * p.coords; };
  const FemSystem sys = assemble(tri, f, mode);
  const Vec u_h = solve_poisson(sys);
  const ErrorNorms e = error_norms(tri, u_h, u, grad_u);
  return FemLevelResult{level, tri.h, static_cast<int>(tri.vertices.size()), e.l2, e.h1};
}

}  // namespace karcher
