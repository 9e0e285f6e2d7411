#pragma once

#include "karcher/types.hpp"

#include <functional>
#include <vector>

namespace karcher {

/// Right-hand side y' = f(t, y) of a first-order system.
using OdeRhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-3;
  std::size_t max_steps = 200000;
};

/// Adaptive Dormand-Prince 5(4) integration of y from t0 to t1 (either direction).
/// Throws NumericalError on non-finite states or when max_steps is exceeded.
Vec integrate(const OdeRhs& rhs, Vec y0, double t0, double t1, const OdeOptions& opts = {});

/// Integrates through the monotone sequence `times` and returns the state at
/// each entry; times.front() is the initial time of y0.
std::vector<Vec> integrate_at(const OdeRhs& rhs, Vec y0, const std::vector<double>& times,
                              const OdeOptions& opts = {});

}  // namespace karcher
