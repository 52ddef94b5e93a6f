#ifndef KGSPEC_ODE_HPP
#define KGSPEC_ODE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "kgspec/error.hpp"

namespace kgspec {

/// Local error tolerances for the embedded Runge-Kutta 5(4) integrator.
struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
  std::size_t max_steps = 2'000'000;

  Tolerance tightened(double factor) const { return {abs * factor, rel * factor, max_steps * 4}; }
};

/// Integrate y' = rhs(y, z) from z = 0 to z = z_end with adaptive
/// Dormand-Prince steps, landing exactly on z_end. Complex unknowns are
/// carried as interleaved (re, im) pairs by the caller.
template <std::size_t N, class Rhs>
std::array<double, N> integrate_to(Rhs&& rhs, std::array<double, N> y, double z_end,
                                   const Tolerance& tol, const char* what = "ode") {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, N>;
  if (!(z_end > 0.0) || !std::isfinite(z_end)) {
    if (z_end == 0.0) return y;
    throw Error(ErrorKind::IntegrationFailure, std::string(what) + ": invalid end point");
  }
  auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  auto system = [&rhs](const State& x, State& dxdt, double z) { rhs(x, dxdt, z); };

  double z = 0.0;
  double dz = z_end / 64.0;
  std::size_t steps = 0;
  const double end_slack = 8.0 * std::numeric_limits<double>::epsilon() * z_end;
  while (z_end - z > end_slack) {
    if (++steps > tol.max_steps)
      throw Error(ErrorKind::IntegrationFailure, std::string(what) + ": step budget exhausted");
    const bool last = z + dz >= z_end;
    if (last) dz = z_end - z;
    const auto res = stepper.try_step(system, y, z, dz);
    if (res == odeint::success) {
      if (last) z = z_end;
    } else if (dz < 1e-14 * z_end) {
      throw Error(ErrorKind::IntegrationFailure, std::string(what) + ": step size underflow");
    }
  }
  for (double v : y)
    if (!std::isfinite(v))
      throw Error(ErrorKind::IntegrationFailure, std::string(what) + ": non-finite state");
  return y;
}

}  // namespace kgspec

#endif  // KGSPEC_ODE_HPP
