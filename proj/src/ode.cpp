#include "karcher/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>

namespace karcher {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

struct StepLimiter {
  std::size_t max_steps;
  std::size_t* count;
  void operator()(const State& y, double /*t*/) const {
    if (++*count > max_steps) throw NumericalError("ODE integration exceeded the step limit");
    for (double v : y) {
      if (!std::isfinite(v)) throw NumericalError("ODE integration produced a non-finite state");
    }
  }
};

}  // namespace

Vec integrate(const OdeRhs& rhs, Vec y0, double t0, double t1, const OdeOptions& opts) {
  if (t0 == t1) return y0;
  const auto n = y0.size();
  State state(y0.data(), y0.data() + n);
  Vec y(n), dy(n);
  auto system = [&](const State& s, State& ds, double t) {
    y = Eigen::Map<const Vec>(s.data(), n);
    dy.setZero(n);
    rhs(t, y, dy);
    Eigen::Map<Vec>(ds.data(), n) = dy;
  };
  const double span = t1 - t0;
  const double dt = std::copysign(std::min(opts.initial_step, std::abs(span)), span);
  std::size_t count = 0;
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opts.abs_tol, opts.rel_tol);
  odeint::integrate_adaptive(stepper, system, state, t0, t1, dt, StepLimiter{opts.max_steps, &count});
  return Eigen::Map<const Vec>(state.data(), n);
}

std::vector<Vec> integrate_at(const OdeRhs& rhs, Vec y0, const std::vector<double>& times,
                              const OdeOptions& opts) {
  std::vector<Vec> out;
  if (times.empty()) return out;
  out.reserve(times.size());
  out.push_back(y0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    out.push_back(integrate(rhs, out.back(), times[k - 1], times[k], opts));
  }
  return out;
}

}  // namespace karcher
