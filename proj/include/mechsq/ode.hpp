#pragma once

// Adaptive Dormand-Prince 5(4) integration with dense output, shared by the
// moment, mean-field and density-matrix integrators.

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "mechsq/types.hpp"

namespace mechsq::ode {

using State = std::vector<double>;

struct Tolerances {
  double rel = 1e-9;
  double abs = 1e-12;
};

struct NoGuard {
  void operator()(const State&, double) const {}
};

/// Integrates dx/dt = rhs(x, dxdt, t) from t0 and calls observe(i, x(times[i]))
/// for every requested time. `times` must be nondecreasing and >= t0. `guard`
/// runs after each accepted step and may throw to abort.
template <class Rhs, class Observer, class Guard = NoGuard>
void integrate(Rhs&& rhs, State x, double t0, std::span<const double> times, Tolerances tol, Observer&& observe,
               Guard&& guard = {}) {
  namespace odeint = boost::numeric::odeint;
  if (times.empty()) return;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t0 || (i > 0 && times[i] < times[i - 1])) {
      throw PreconditionError("output times must be nondecreasing and not precede the start time");
    }
  }
  auto stepper = odeint::make_dense_output(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  const double span = times.back() - t0;
  const double dt0 = span > 0.0 ? std::min(1e-2, 1e-3 * span) : 1e-3;
  stepper.initialize(x, t0, dt0);

  State out(x.size());
  std::size_t next = 0;
  while (next < times.size() && times[next] <= t0) observe(next++, x);

  auto system = [&rhs](const State& y, State& dydt, double t) { rhs(y, dydt, t); };
  while (next < times.size()) {
    try {
      stepper.do_step(system);
    } catch (const odeint::odeint_error& e) {
      throw IntegrationError(std::string("integrator failed: ") + e.what(), stepper.current_time());
    }
    const double t = stepper.current_time();
    const double dt = stepper.current_time_step();
    if (!(dt > 1e-14 * std::max(1.0, std::abs(t)))) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << t;
      throw IntegrationError(msg.str(), t);
    }
    const State& current = stepper.current_state();
    for (double v : current) {
      if (!std::isfinite(v)) throw IntegrationError("state became non-finite", t);
    }
    guard(current, t);
    while (next < times.size() && times[next] <= t) {
      stepper.calc_state(times[next], out);
      observe(next, out);
      ++next;
    }
  }
}

}  // namespace mechsq::ode
