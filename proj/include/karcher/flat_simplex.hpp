#pragma once

// Euclidean simplex geometry from edge lengths.
//
// A flat metric on the standard simplex is determined by the matrix
// E_ij = -1/2 l_ij^2 acting on tangent vectors (components summing to zero).
// Over the unit simplex the same metric is the Gram matrix
// G_ij = E_ij - E_0i - E_0j, i,j = 1..n.

#include "karcher/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

namespace karcher {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weights lambda in the standard simplex: nonnegative, summing to one.
template <class Scalar>
class BasicBarycentricWeight {
 public:
  explicit BasicBarycentricWeight(DenseVector<Scalar> lambda) : lambda_(std::move(lambda)) {
    require(lambda_.size() >= 1, "BarycentricWeight: empty weight vector");
    require(lambda_.minCoeff() >= Scalar(0), "BarycentricWeight: negative entry");
    require(std::abs(lambda_.sum() - Scalar(1)) <= Scalar(1e-14) * lambda_.size(),
            "BarycentricWeight: entries must sum to 1");
  }

  /// Rescales a nonnegative vector onto the simplex.
  static BasicBarycentricWeight normalized(DenseVector<Scalar> w) {
    const Scalar s = w.sum();
    require(s > Scalar(0), "BarycentricWeight: weights sum to zero");
    w /= s;
    // Absorb the rounding residual into the largest entry.
    Eigen::Index imax;
    w.maxCoeff(&imax);
    w(imax) += Scalar(1) - w.sum();
    return BasicBarycentricWeight(std::move(w));
  }
  static BasicBarycentricWeight vertex(int n, int i) {
    DenseVector<Scalar> w = DenseVector<Scalar>::Zero(n + 1);
    w(i) = Scalar(1);
    return BasicBarycentricWeight(std::move(w));
  }
  static BasicBarycentricWeight barycenter(int n) {
    return normalized(DenseVector<Scalar>::Ones(n + 1));
  }

  int n() const { return static_cast<int>(lambda_.size()) - 1; }
  const DenseVector<Scalar>& values() const { return lambda_; }
  Scalar operator[](int i) const { return lambda_(i); }

 private:
  DenseVector<Scalar> lambda_;
};

/// Tangent vector of the standard simplex: components sum to zero.
template <class Scalar>
class BasicSimplexTangent {
 public:
  explicit BasicSimplexTangent(DenseVector<Scalar> v) : v_(std::move(v)) {
    const Scalar scale = std::max(Scalar(1), v_.template lpNorm<1>());
    require(std::abs(v_.sum()) <= Scalar(1e-14) * scale, "SimplexTangent: components must sum to zero");
  }

  /// e_j - e_i
  static BasicSimplexTangent edge(int n, int i, int j) {
    DenseVector<Scalar> v = DenseVector<Scalar>::Zero(n + 1);
    v(j) += Scalar(1);
    v(i) -= Scalar(1);
    return BasicSimplexTangent(std::move(v));
  }
  /// Tangent with components c on e_1 - e_0, ..., e_n - e_0.
  static BasicSimplexTangent from_unit_coords(const DenseVector<Scalar>& c) {
    DenseVector<Scalar> v(c.size() + 1);
    v(0) = -c.sum();
    v.tail(c.size()) = c;
    return BasicSimplexTangent(std::move(v));
  }

  int n() const { return static_cast<int>(v_.size()) - 1; }
  const DenseVector<Scalar>& values() const { return v_; }
  /// Components on the basis e_j - e_0, j = 1..n.
  DenseVector<Scalar> unit_coords() const { return v_.tail(v_.size() - 1); }

 private:
  DenseVector<Scalar> v_;
};

/// Symmetric table l_ij of pairwise lengths on n+1 vertices.
template <class Scalar>
class BasicEdgeLengthSystem {
 public:
  explicit BasicEdgeLengthSystem(DenseMatrix<Scalar> lengths) : l_(std::move(lengths)) {
    require(l_.rows() == l_.cols() && l_.rows() >= 2, "EdgeLengthSystem: need a square table on >= 2 vertices");
    for (Eigen::Index i = 0; i < l_.rows(); ++i) {
      require(l_(i, i) == Scalar(0), "EdgeLengthSystem: diagonal must be zero");
      for (Eigen::Index j = i + 1; j < l_.cols(); ++j) {
        require(l_(i, j) == l_(j, i), "EdgeLengthSystem: table must be symmetric");
        require(l_(i, j) > Scalar(0) && std::isfinite(static_cast<double>(l_(i, j))),
                "EdgeLengthSystem: off-diagonal lengths must be positive");
      }
    }
  }

  /// Pairwise Euclidean distances of the columns of `points`.
  static BasicEdgeLengthSystem from_points(const DenseMatrix<Scalar>& points) {
    const Eigen::Index k = points.cols();
    DenseMatrix<Scalar> l = DenseMatrix<Scalar>::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) l(i, j) = l(j, i) = (points.col(i) - points.col(j)).norm();
    return BasicEdgeLengthSystem(std::move(l));
  }

  int n() const { return static_cast<int>(l_.rows()) - 1; }
  const DenseMatrix<Scalar>& lengths() const { return l_; }
  Scalar operator()(int i, int j) const { return l_(i, j); }
  Scalar max_length() const { return l_.maxCoeff(); }

 private:
  DenseMatrix<Scalar> l_;
};

template <class Scalar>
struct BasicFlatMetric {
  int n = 0;
  DenseMatrix<Scalar> E;  // (n+1) x (n+1), E_ij = -1/2 l_ij^2
  DenseMatrix<Scalar> G;  // n x n Gram matrix over the unit simplex
  bool realizable = false;
};

using BarycentricWeight = BasicBarycentricWeight<double>;
using SimplexTangent = BasicSimplexTangent<double>;
using EdgeLengthSystem = BasicEdgeLengthSystem<double>;
using FlatMetric = BasicFlatMetric<double>;

/// G = E_ij - E_0i - E_0j for i, j >= 1.
template <class Scalar>
DenseMatrix<Scalar> gram_from_e(const DenseMatrix<Scalar>& E) {
  const Eigen::Index n = E.rows() - 1;
  DenseMatrix<Scalar> G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = E(i + 1, j + 1) - E(0, i + 1) - E(0, j + 1);
  return G;
}

/// Positive definiteness by pivoted LDL^T with pivot threshold 1e-12 * trace.
template <class Scalar>
bool is_positive_definite(const DenseMatrix<Scalar>& G) {
  const Scalar tr = G.trace();
  if (!(tr > Scalar(0))) return false;
  Eigen::LDLT<DenseMatrix<Scalar>> ldlt(G);
  if (ldlt.info() != Eigen::Success) return false;
  return ldlt.vectorD().minCoeff() > Scalar(1e-12) * tr;
}

template <class Scalar>
BasicFlatMetric<Scalar> flat_metric_from_lengths(const BasicEdgeLengthSystem<Scalar>& L) {
  BasicFlatMetric<Scalar> gm;
  gm.n = L.n();
  gm.E = Scalar(-0.5) * L.lengths().cwiseProduct(L.lengths());
  gm.G = gram_from_e<Scalar>(gm.E);
  gm.realizable = is_positive_definite<Scalar>(gm.G);
  return gm;
}

/// g^e(v, w) = sum_ij E_ij v^i w^j.
template <class Scalar>
Scalar evaluate(const BasicFlatMetric<Scalar>& gm, const BasicSimplexTangent<Scalar>& v,
                const BasicSimplexTangent<Scalar>& w) {
  require(v.n() == gm.n && w.n() == gm.n, "evaluate: dimension mismatch");
  return v.values().dot(gm.E * w.values());
}

template <class Scalar>
Scalar factorial(int n) {
  Scalar f(1);
  for (int k = 2; k <= n; ++k) f *= Scalar(k);
  return f;
}

/// Volume through the bordered matrix [[0, -e^T/2], [-e/2, E]] (-1/2 times Cayley-Menger):
/// vol = 2/n! sqrt(-det).
template <class Scalar>
Scalar volume(const BasicFlatMetric<Scalar>& gm) {
  require(gm.realizable, "volume: edge lengths are not realizable");
  const int k = gm.n + 2;
  DenseMatrix<Scalar> Mp = DenseMatrix<Scalar>::Zero(k, k);
  Mp.block(1, 1, gm.n + 1, gm.n + 1) = gm.E;
  Mp.block(0, 1, 1, gm.n + 1).setConstant(Scalar(-0.5));
  Mp.block(1, 0, gm.n + 1, 1).setConstant(Scalar(-0.5));
  const Scalar det = Mp.fullPivLu().determinant();
  return Scalar(2) / factorial<Scalar>(gm.n) * std::sqrt(std::max(Scalar(0), -det));
}

/// vol = sqrt(det G) / n!
template <class Scalar>
Scalar volume_gram(const BasicFlatMetric<Scalar>& gm) {
  require(gm.realizable, "volume: edge lengths are not realizable");
  return std::sqrt(std::max(Scalar(0), gm.G.determinant())) / factorial<Scalar>(gm.n);
}

/// Largest edge length recovered from E.
template <class Scalar>
Scalar max_edge_length(const BasicFlatMetric<Scalar>& gm) {
  return std::sqrt(Scalar(-2) * gm.E.minCoeff());
}

/// theta = n! vol / h^n.
template <class Scalar>
Scalar fullness(const BasicFlatMetric<Scalar>& gm, Scalar h) {
  require(h > Scalar(0) && h >= max_edge_length(gm) * (Scalar(1) - Scalar(1e-12)),
          "fullness: h is smaller than an edge length");
  return factorial<Scalar>(gm.n) * volume_gram(gm) / std::pow(h, gm.n);
}

/// Largest fullness of any Euclidean n-simplex (attained by the regular one).
template <class Scalar>
Scalar max_fullness(int n) {
  return std::sqrt(Scalar(n + 1)) / std::pow(Scalar(2), Scalar(n) / Scalar(2));
}

template <class Scalar>
struct BasicEigenBounds {
  Scalar lo = 0;  // (theta h n^{1-n})^2
  Scalar hi = 0;  // (h n)^2
  DenseVector<Scalar> eigenvalues;
  bool contained = false;
};
using EigenBounds = BasicEigenBounds<double>;

/// Eigenvalue bounds for G of a (theta, h)-full simplex: theta h n^{1-n} <= sqrt(ev) <= h n.
template <class Scalar>
BasicEigenBounds<Scalar> gram_eigen_bounds(const BasicFlatMetric<Scalar>& gm, Scalar h) {
  require(gm.realizable, "gram_eigen_bounds: edge lengths are not realizable");
  const Scalar theta = fullness(gm, h);
  const Scalar n = Scalar(gm.n);
  BasicEigenBounds<Scalar> b;
  const Scalar lo_sqrt = theta * h * std::pow(n, Scalar(1) - n);
  b.lo = lo_sqrt * lo_sqrt;
  b.hi = (h * n) * (h * n);
  b.eigenvalues = Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>>(gm.G, Eigen::EigenvaluesOnly).eigenvalues();
  b.contained = b.eigenvalues.minCoeff() >= b.lo && b.eigenvalues.maxCoeff() <= b.hi;
  return b;
}

/// sup over v != 0 of |(g1 - g2)(v,v)| / g1(v,v), the largest generalized
/// eigenvalue magnitude of (G2 - G1, G1).
template <class Scalar>
Scalar compare_metrics(const BasicFlatMetric<Scalar>& g1, const BasicFlatMetric<Scalar>& g2) {
  require(g1.n == g2.n, "compare_metrics: dimension mismatch");
  require(is_positive_definite<Scalar>(g1.G), "compare_metrics: first metric is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix<Scalar>> ges(g2.G - g1.G, g1.G, Eigen::EigenvaluesOnly);
  return ges.eigenvalues().cwiseAbs().maxCoeff();
}

/// Inradius of the unit simplex conv(0, e_1, ..., e_n): 1 / (n + sqrt n).
template <class Scalar = double>
Scalar insphere_radius_unit_simplex(int n) {
  require(n >= 1, "insphere_radius_unit_simplex: n must be >= 1");
  return Scalar(1) / (Scalar(n) + std::sqrt(Scalar(n)));
}

}  // namespace karcher
