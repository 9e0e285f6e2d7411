#include "karcher/manifold.hpp"

#include <cmath>
#include <numbers>

namespace karcher {

ChartManifold::ChartManifold(int m, MetricFn metric, std::optional<ChristoffelFn> christoffel, ManifoldBounds bounds,
                             GeodesicNumerics numerics, std::string label)
    : Manifold(bounds, numerics),
      m_(m),
      metric_(std::move(metric)),
      christoffel_(std::move(christoffel)),
      label_(std::move(label)) {
  require(m >= 1, "ChartManifold: dimension must be >= 1");
  require(static_cast<bool>(metric_), "ChartManifold: metric callback is required");
}

std::vector<Mat> ChartManifold::christoffel(const Vec& x) const {
  if (christoffel_) return (*christoffel_)(x);
  // Gamma^i_{jk} = 1/2 g^{il} (d_j g_{lk} + d_k g_{lj} - d_l g_{jk})
  std::vector<Mat> dg(m_);
  for (int l = 0; l < m_; ++l) {
    Vec e = Vec::Zero(m_);
    e(l) = kMetricFdStep;
    dg[l] = (metric_(x + e) - metric_(x - e)) / (2.0 * kMetricFdStep);
  }
  const Mat ginv = metric_(x).inverse();
  std::vector<Mat> gamma(m_, Mat::Zero(m_, m_));
  for (int j = 0; j < m_; ++j) {
    for (int k = 0; k < m_; ++k) {
      Vec lowered(m_);
      for (int l = 0; l < m_; ++l) lowered(l) = 0.5 * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
      const Vec raised = ginv * lowered;
      for (int i = 0; i < m_; ++i) gamma[i](j, k) = raised(i);
    }
  }
  return gamma;
}

Vec ChartManifold::contract(const std::vector<Mat>& gamma, const Vec& a, const Vec& b) const {
  Vec out(m_);
  for (int i = 0; i < m_; ++i) out(i) = a.dot(gamma[i] * b);
  return out;
}

double ChartManifold::inner(const Vec& x, const Vec& v, const Vec& w) const { return v.dot(metric_(x) * w); }

Mat ChartManifold::tangent_basis(const Vec& x) const {
  const Eigen::LLT<Mat> llt(metric_(x));
  if (llt.info() != Eigen::Success) throw NumericalError(label_ + ": metric is not positive definite");
  // G = L L^T  =>  B = L^{-T} satisfies B^T G B = I.
  return llt.matrixU().solve(Mat::Identity(m_, m_));
}

Vec ChartManifold::geodesic_accel(const Vec& x, const Vec& xdot) const {
  return -contract(christoffel(x), xdot, xdot);
}

Vec ChartManifold::transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const {
  return -contract(christoffel(x), xdot, e);
}

Vec ChartManifold::curvature_operator(const Vec& x, const Vec& J, const Vec& T) const {
  // R(J,T)T = (d_J Gamma)(T,T) - (d_T Gamma)(J,T) + Gamma(J, Gamma(T,T)) - Gamma(T, Gamma(J,T))
  const double h = kMetricFdStep;
  auto directional = [&](const Vec& dir, const Vec& a, const Vec& b) -> Vec {
    const double n = dir.norm();
    if (n == 0.0) return Vec::Zero(m_);
    const Vec step = dir * (h / n);
    return (contract(christoffel(x + step), a, b) - contract(christoffel(x - step), a, b)) * (n / (2.0 * h));
  };
  const auto gamma = christoffel(x);
  return directional(J, T, T) - directional(T, J, T) + contract(gamma, J, contract(gamma, T, T)) -
         contract(gamma, T, contract(gamma, J, T));
}

ManifoldPtr make_conformal_chart(int m, std::function<double(const Vec&)> phi,
                                 std::function<Vec(const Vec&)> grad_phi, ManifoldBounds bounds, std::string label) {
  auto metric = [phi, m](const Vec& x) -> Mat {
    const double s = phi(x);
    return s * s * Mat::Identity(m, m);
  };
  // g = e^{2u} I with u = log phi: Gamma^i_{jk} = delta_ij u_k + delta_ik u_j - delta_jk u_i
  auto christoffel = [phi, grad_phi, m](const Vec& x) -> std::vector<Mat> {
    const Vec du = grad_phi(x) / phi(x);
    std::vector<Mat> gamma(m, Mat::Zero(m, m));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
          double v = 0.0;
          if (i == j) v += du(k);
          if (i == k) v += du(j);
          if (j == k) v -= du(i);
          gamma[i](j, k) = v;
        }
      }
    }
    return gamma;
  };
  return std::make_shared<ChartManifold>(m, metric, ChartManifold::ChristoffelFn(christoffel), bounds,
                                         GeodesicNumerics{}, std::move(label));
}

ManifoldPtr make_stereographic_sphere_chart(int m) {
  ManifoldBounds b;
  b.C0 = 1.0;
  b.injectivity_radius = std::numbers::pi;
  b.convexity_radius = 0.5 * std::numbers::pi;
  return make_conformal_chart(
      m, [](const Vec& x) { return 2.0 / (1.0 + x.squaredNorm()); },
      [](const Vec& x) -> Vec {
        const double s = 1.0 + x.squaredNorm();
        return -4.0 * x / (s * s);
      },
      b, "stereographic-sphere");
}

ManifoldPtr make_poincare_ball_chart(int m) {
  ManifoldBounds b;
  b.C0 = 1.0;
  return make_conformal_chart(
      m, [](const Vec& x) { return 2.0 / (1.0 - x.squaredNorm()); },
      [](const Vec& x) -> Vec {
        const double s = 1.0 - x.squaredNorm();
        return 4.0 * x / (s * s);
      },
      b, "poincare-ball");
}

}  // namespace karcher
