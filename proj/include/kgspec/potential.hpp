#ifndef KGSPEC_POTENTIAL_HPP
#define KGSPEC_POTENTIAL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "kgspec/error.hpp"

namespace kgspec {

using RealFn = std::function<double(double)>;

/// A C^2 potential V(u) together with its first two derivatives.
struct Potential {
  std::string name;
  RealFn V;
  RealFn dV;
  RealFn d2V;
  bool periodic = false;
  std::optional<double> u_period;
  /// Half-width of the interval searched for critical points of a
  /// non-periodic potential.
  double search_radius = 20.0;
};

inline Potential sine_gordon() {
  Potential p;
  p.name = "sine-gordon";
  p.V = [](double u) { return 1.0 - std::cos(u); };
  p.dV = [](double u) { return std::sin(u); };
  p.d2V = [](double u) { return std::cos(u); };
  p.periodic = true;
  p.u_period = 2.0 * std::numbers::pi;
  return p;
}

/// The phi^4 double well V(u) = u^4/4 - u^2/2.
inline Potential phi4() {
  Potential p;
  p.name = "phi4";
  p.V = [](double u) { return 0.25 * u * u * u * u - 0.5 * u * u; };
  p.dV = [](double u) { return u * u * u - u; };
  p.d2V = [](double u) { return 3.0 * u * u - 1.0; };
  p.periodic = false;
  p.search_radius = 20.0;
  return p;
}

struct CriticalPoint {
  double u;
  double value;      // V(u)
  double curvature;  // V''(u)
};

/// Critical points of V (zeros of V'), sorted by u. For periodic
/// potentials the search covers [-2P, 2P]; otherwise
/// [-search_radius, search_radius].
inline std::vector<CriticalPoint> critical_points(const Potential& pot) {
  double lo, hi;
  if (pot.periodic && pot.u_period) {
    lo = -2.0 * *pot.u_period;
    hi = 2.0 * *pot.u_period;
  } else {
    lo = -pot.search_radius;
    hi = pot.search_radius;
  }
  constexpr int n = 8000;
  const double h = (hi - lo) / n;
  std::vector<CriticalPoint> out;
  auto push = [&](double u) {
    if (!out.empty() && std::abs(out.back().u - u) < 1e-9 * std::max(1.0, std::abs(u))) return;
    out.push_back({u, pot.V(u), pot.d2V(u)});
  };
  double xa = lo, fa = pot.dV(xa);
  for (int i = 1; i <= n; ++i) {
    const double xb = (i == n) ? hi : lo + i * h;
    const double fb = pot.dV(xb);
    if (fa == 0.0) {
      push(xa);
    } else if (fa * fb < 0.0) {
      boost::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(pot.dV, xa, xb, fa, fb,
                                                 boost::math::tools::eps_tolerance<double>(), it);
      push(0.5 * (r.first + r.second));
    }
    xa = xb;
    fa = fb;
  }
  if (fa == 0.0) push(xa);
  return out;
}

/// Samples used to check V, V', V'' consistency (central differences).
/// Returns the largest relative mismatch found.
inline double derivative_mismatch(const Potential& pot, double lo, double hi, int n = 64) {
  double worst = 0.0;
  const double h = 1e-5;
  for (int i = 0; i <= n; ++i) {
    const double u = lo + (hi - lo) * i / n;
    const double d1 = (pot.V(u + h) - pot.V(u - h)) / (2 * h);
    const double d2 = (pot.dV(u + h) - pot.dV(u - h)) / (2 * h);
    const double s1 = std::max(1.0, std::abs(pot.dV(u)));
    const double s2 = std::max(1.0, std::abs(pot.d2V(u)));
    worst = std::max({worst, std::abs(d1 - pot.dV(u)) / s1, std::abs(d2 - pot.d2V(u)) / s2});
  }
  return worst;
}

}  // namespace kgspec

#endif  // KGSPEC_POTENTIAL_HPP
