#ifndef KGSPEC_WAVES_HPP
#define KGSPEC_WAVES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "kgspec/error.hpp"
#include "kgspec/ode.hpp"
#include "kgspec/potential.hpp"

namespace kgspec {

/// Which orbit of the phase plane at a given energy is meant.
///
/// Wells are wells of the effective potential V(u)/(c^2-1): minima of V
/// for superluminal speeds, maxima of V for subluminal ones. RightWell is
/// the well centred at the smallest non-negative such point and LeftWell
/// the one at the largest non-positive point, so for the subluminal phi^4
/// wave both name the orbit around u = 0. OuterOrbit is the bounded orbit
/// through u = 0 that encloses more than one well.
enum class Branch { LeftWell, RightWell, RotationalPlus, RotationalMinus, OuterOrbit };

enum class Regime {
  SubluminalLibrational,
  SubluminalRotational,
  SuperluminalLibrational,
  SuperluminalRotational,
};

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::LeftWell: return "left";
    case Branch::RightWell: return "right";
    case Branch::RotationalPlus: return "rot+";
    case Branch::RotationalMinus: return "rot-";
    case Branch::OuterOrbit: return "outer";
  }
  return "?";
}

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::SubluminalLibrational: return "subluminal librational";
    case Regime::SubluminalRotational: return "subluminal rotational";
    case Regime::SuperluminalLibrational: return "superluminal librational";
    case Regime::SuperluminalRotational: return "superluminal rotational";
  }
  return "?";
}

inline bool is_rotational(Branch b) {
  return b == Branch::RotationalPlus || b == Branch::RotationalMinus;
}

struct WaveParameters {
  double E = 0.0;
  double c = 0.0;
  Potential potential;
  Branch branch = Branch::RightWell;

  /// c^2 - 1, the coefficient of U'' in the profile equation.
  double speed_factor() const { return c * c - 1.0; }
};

struct ProfileSample {
  double z;
  double u;
  double du;
};

struct WaveProfile {
  WaveParameters params;
  double T = 0.0;
  double u0 = 0.0;
  double du0 = 0.0;
  Regime regime = Regime::SuperluminalLibrational;
  std::vector<ProfileSample> samples;
  /// Net change of U over one period: 0 for librational waves, +/- the
  /// potential period for rotational ones.
  double winding = 0.0;

  double speed_factor() const { return params.speed_factor(); }
  double c() const { return params.c; }
};

namespace detail {

inline void validate_speed(const WaveParameters& p) {
  if (!std::isfinite(p.c) || !std::isfinite(p.E))
    throw Error(ErrorKind::InvalidArgument, "E and c must be finite");
  if (std::abs(p.speed_factor()) < 1e-12)
    throw Error(ErrorKind::InvalidArgument, "wave speed must satisfy c^2 != 1");
}

/// Positive exactly where the energy integral admits real U'.
inline double admissibility(const WaveParameters& p, double u) {
  const double sigma = p.speed_factor() > 0 ? 1.0 : -1.0;
  return sigma * (p.E - p.potential.V(u));
}

/// Everything needed to build one period of the wave.
struct OrbitGeometry {
  bool rotational = false;
  double u_min = 0.0;
  double u_max = 0.0;
  double start_u = 0.0;
  double start_du = 0.0;
  double winding = 0.0;
  std::vector<double> separatrix_energies;
};

inline constexpr double separatrix_guard = 1e-10;
inline constexpr double degenerate_guard = 1e-10;

inline double solve_level(const WaveParameters& p, double inside, double outside) {
  auto f = [&](double u) { return p.potential.V(u) - p.E; };
  const double fi = f(inside), fo = f(outside);
  if (fo == 0.0) return outside;
  boost::uintmax_t it = 300;
  auto r = boost::math::tools::toms748_solve(f, std::min(inside, outside), std::max(inside, outside),
                                             inside < outside ? fi : fo, inside < outside ? fo : fi,
                                             boost::math::tools::eps_tolerance<double>(), it);
  return std::abs(f(r.first)) < std::abs(f(r.second)) ? r.first : r.second;
}

/// Walk from an admissible point in one direction until the energy
/// integral forbids further motion. Returns the turning point and the
/// critical point that bounds it, if any.
inline std::pair<double, std::optional<CriticalPoint>> march(const WaveParameters& p,
                                                             const std::vector<CriticalPoint>& cps,
                                                             double x0, int dir,
                                                             std::vector<double>& crossed) {
  double prev = x0;
  auto visit = [&](const CriticalPoint& cp) -> std::optional<std::pair<double, CriticalPoint>> {
    if (admissibility(p, cp.u) <= 0.0) return std::make_pair(solve_level(p, prev, cp.u), cp);
    crossed.push_back(cp.u);
    prev = cp.u;
    return std::nullopt;
  };
  if (dir > 0) {
    for (const auto& cp : cps) {
      if (cp.u <= x0) continue;
      if (auto hit = visit(cp)) return {hit->first, hit->second};
    }
  } else {
    for (auto it = cps.rbegin(); it != cps.rend(); ++it) {
      if (it->u >= x0) continue;
      if (auto hit = visit(*it)) return {hit->first, hit->second};
    }
  }
  double step = 1.0;
  for (int k = 0; k < 64; ++k) {
    const double x = prev + dir * step;
    if (admissibility(p, x) <= 0.0) return {solve_level(p, prev, x), std::nullopt};
    prev = x;
    step *= 2.0;
    if (std::abs(prev) > 1e6) break;
  }
  throw Error(ErrorKind::NoOrbit, "orbit is unbounded for this branch");
}

inline OrbitGeometry orbit_geometry(const WaveParameters& p) {
  validate_speed(p);
  const double s = p.speed_factor();
  const double sigma = s > 0 ? 1.0 : -1.0;
  const auto cps = critical_points(p.potential);
  OrbitGeometry g;

  if (is_rotational(p.branch)) {
    if (!p.potential.periodic || !p.potential.u_period)
      throw Error(ErrorKind::RotationalUnavailable, "potential is not periodic");
    const double P = *p.potential.u_period;
    double worst = admissibility(p, 0.0);
    double worst_v = p.potential.V(0.0);
    for (const auto& cp : cps) {
      if (cp.u < 0.0 || cp.u > P) continue;
      const double a = admissibility(p, cp.u);
      if (a < worst) {
        worst = a;
        worst_v = cp.value;
      }
    }
    constexpr int n = 4096;
    for (int i = 0; i < n; ++i) worst = std::min(worst, admissibility(p, P * i / n));
    if (worst <= 0.0)
      throw Error(ErrorKind::RotationalUnavailable, "U' vanishes on the orbit at this energy");
    g.rotational = true;
    g.u_min = 0.0;
    g.u_max = P;
    g.start_u = 0.0;
    const double speed = std::sqrt(2.0 * (p.E - p.potential.V(0.0)) / s);
    g.start_du = p.branch == Branch::RotationalPlus ? speed : -speed;
    g.winding = p.branch == Branch::RotationalPlus ? P : -P;
    g.separatrix_energies.push_back(worst_v);
    return g;
  }

  double centre = 0.0;
  if (p.branch == Branch::OuterOrbit) {
    centre = 0.0;
  } else {
    std::optional<double> pick;
    for (const auto& cp : cps) {
      if (!(sigma * cp.curvature > 0.0)) continue;
      if (p.branch == Branch::RightWell && cp.u >= -1e-12) {
        if (!pick || cp.u < *pick) pick = cp.u;
      } else if (p.branch == Branch::LeftWell && cp.u <= 1e-12) {
        if (!pick || cp.u > *pick) pick = cp.u;
      }
    }
    if (!pick) throw Error(ErrorKind::NoOrbit, "potential has no well for this branch");
    centre = *pick;
    if (std::abs(p.E - p.potential.V(centre)) < degenerate_guard)
      throw Error(ErrorKind::NoOrbit, "energy sits at the bottom of the well");
  }
  if (admissibility(p, centre) <= 0.0)
    throw Error(ErrorKind::NoOrbit, "energy is outside the admissible range for this branch");

  std::vector<double> crossed;
  auto [right, right_cp] = march(p, cps, centre, +1, crossed);
  auto [left, left_cp] = march(p, cps, centre, -1, crossed);

  int wells_inside = 0;
  for (const auto& cp : cps) {
    if (cp.u <= left || cp.u >= right) continue;
    if (sigma * cp.curvature > 0.0) ++wells_inside;
    else g.separatrix_energies.push_back(cp.value);
  }
  if (right_cp) g.separatrix_energies.push_back(right_cp->value);
  if (left_cp) g.separatrix_energies.push_back(left_cp->value);

  if (p.branch == Branch::OuterOrbit) {
    if (wells_inside < 2) throw Error(ErrorKind::NoOrbit, "no outer orbit at this energy");
  } else if (wells_inside != 1) {
    throw Error(ErrorKind::NoOrbit, "energy lies above the separatrix of this well");
  }
  g.u_min = left;
  g.u_max = right;
  g.start_u = left;
  g.start_du = 0.0;
  return g;
}

inline void check_separatrix(const WaveParameters& p, const OrbitGeometry& g) {
  for (double e : g.separatrix_energies)
    if (std::abs(p.E - e) < separatrix_guard)
      throw Error(ErrorKind::SeparatrixDivergence, "energy is within 1e-10 of a separatrix");
}

}  // namespace detail

/// Regime of the wave selected by params. Librational branches are not
/// checked for orbit existence here; that happens in turning_points.
inline Regime classify_regime(const WaveParameters& params) {
  detail::validate_speed(params);
  const bool sub = params.speed_factor() < 0.0;
  if (is_rotational(params.branch)) {
    (void)detail::orbit_geometry(params);  // throws RotationalUnavailable
    return sub ? Regime::SubluminalRotational : Regime::SuperluminalRotational;
  }
  return sub ? Regime::SubluminalLibrational : Regime::SuperluminalLibrational;
}

/// Turning points (u_min, u_max) of a librational orbit.
inline std::pair<double, double> turning_points(const WaveParameters& params) {
  if (is_rotational(params.branch))
    throw Error(ErrorKind::InvalidArgument, "rotational orbits have no turning points");
  const auto g = detail::orbit_geometry(params);
  return {g.u_min, g.u_max};
}

/// Fundamental period of the wave by quadrature of the energy integral.
inline double compute_period(const WaveParameters& params) {
  const auto g = detail::orbit_geometry(params);
  detail::check_separatrix(params, g);
  const double s = params.speed_factor();
  const double abs_s = std::abs(s);
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  double T = 0.0;
  if (g.rotational) {
    auto f = [&](double u) {
      return 1.0 / std::sqrt(2.0 * detail::admissibility(params, u) / abs_s);
    };
    T = gauss_kronrod<double, 61>::integrate(f, g.u_min, g.u_max, 20, 1e-11, &err);
  } else {
    // u = a + (b - a) sin^2(phi) removes the inverse square roots at the
    // turning points.
    const double a = g.u_min, b = g.u_max, w = b - a;
    const auto& pot = params.potential;
    const double sigma = s > 0 ? 1.0 : -1.0;
    // sigma (E - V(u)) as the integral of V' from the nearer turning point
    // (composite 5-point Gauss-Legendre, panels at most w/50 wide). This
    // never subtracts two nearly equal values of V, and takes E - V(t) as
    // exactly zero at the turning point t, so small orbits keep full
    // relative accuracy.
    auto level = [&](double da, double db) {
      static constexpr std::array<double, 5> x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
      static constexpr std::array<double, 5> wt{0.2369268850561891, 0.4786286704993665,
                                                0.5688888888888889, 0.4786286704993665,
                                                0.2369268850561891};
      const bool from_a = da <= db;
      const double base = from_a ? a : b, d = from_a ? da : db, dir = from_a ? 1.0 : -1.0;
      const int panels = std::max(1, static_cast<int>(std::ceil(d / (0.02 * w))));
      const double hp = d / panels;
      double acc = 0.0;
      for (int j = 0; j < panels; ++j)
        for (std::size_t k = 0; k < 5; ++k) acc += wt[k] * pot.dV(base + dir * (hp * j + 0.5 * hp * (1.0 + x[k])));
      return -sigma * dir * 0.5 * hp * acc;
    };
    auto f = [&](double phi) {
      const double sn = std::sin(phi), cs = std::cos(phi);
      const double h = level(w * sn * sn, w * cs * cs);
      if (!(h > 0.0)) return 0.0;
      return 2.0 * w * sn * cs / std::sqrt(2.0 * h / abs_s);
    };
    T = 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, 0.5 * std::numbers::pi, 20, 1e-11, &err);
    err *= 2.0;
  }
  if (!std::isfinite(T) || !(T > 0.0) || err > 1e-9 * T)
    throw Error(ErrorKind::SeparatrixDivergence, "period quadrature did not converge");
  return T;
}

namespace detail {

inline Tolerance profile_tolerance() { return {1e-13, 1e-12, 2'000'000}; }

}  // namespace detail

/// Build one period of the travelling wave by integrating
/// (c^2-1) U'' + V'(U) = 0 from turning-point (or U = 0) initial data.
inline WaveProfile wave_profile(const WaveParameters& params, std::size_t n_samples) {
  if (n_samples < 16) throw Error(ErrorKind::InvalidArgument, "n_samples must be at least 16");
  WaveProfile prof;
  prof.params = params;
  prof.regime = classify_regime(params);
  const auto g = detail::orbit_geometry(params);
  prof.T = compute_period(params);
  prof.u0 = g.start_u;
  prof.du0 = g.start_du;
  prof.winding = g.winding;

  const double s = params.speed_factor();
  const auto& dV = params.potential.dV;
  auto rhs = [&](const std::array<double, 2>& y, std::array<double, 2>& dy, double) {
    dy[0] = y[1];
    dy[1] = -dV(y[0]) / s;
  };
  prof.samples.reserve(n_samples);
  std::array<double, 2> y{prof.u0, prof.du0};
  prof.samples.push_back({0.0, y[0], y[1]});
  double z = 0.0;
  for (std::size_t i = 1; i < n_samples; ++i) {
    const double z_next = prof.T * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    auto shifted = [&](const std::array<double, 2>& x, std::array<double, 2>& dx, double t) {
      rhs(x, dx, t + z);
    };
    y = integrate_to(shifted, y, z_next - z, detail::profile_tolerance(), "wave_profile");
    z = z_next;
    prof.samples.push_back({z, y[0], y[1]});
  }
  return prof;
}

/// Largest energy-integral residual over the stored samples.
inline double energy_residual(const WaveProfile& prof) {
  const double s = prof.speed_factor();
  double worst = 0.0;
  for (const auto& smp : prof.samples) {
    const double e = 0.5 * s * smp.du * smp.du + prof.params.potential.V(smp.u);
    worst = std::max(worst, std::abs(e - prof.params.E));
  }
  return worst;
}

/// The constant state U = u_eq, a critical point of V, treated as a wave of
/// nominal period T. Its Hill equation has constant coefficients.
inline WaveProfile equilibrium_profile(const WaveParameters& params, double u_eq, double T) {
  detail::validate_speed(params);
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "period must be positive");
  if (std::abs(params.potential.dV(u_eq)) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "u_eq is not a critical point of V");
  WaveProfile prof;
  prof.params = params;
  prof.T = T;
  prof.u0 = u_eq;
  prof.samples = {{0.0, u_eq, 0.0}, {T, u_eq, 0.0}};
  return prof;
}

struct PortraitPoint {
  double u;
  double du;
  double E;
};

struct PortraitWindow {
  double u_lo, u_hi, du_lo, du_hi;
};

/// Grid points of the (u, u') window lying on the level sets
/// 1/2 (c^2-1) u'^2 + V(u) = E. A point belongs to a level set when the
/// energy changes sign across one of its grid edges, or when it is
/// within level_tol of the level. Separatrix energies (values of V at
/// critical points inside the window) are appended to the level list.
inline std::vector<PortraitPoint> phase_portrait(const std::vector<double>& energies,
                                                 const Potential& pot, double c,
                                                 const PortraitWindow& win, std::size_t nu,
                                                 std::size_t ndu, bool with_separatrix = true) {
  if (!(win.u_hi > win.u_lo) || !(win.du_hi > win.du_lo) || nu < 2 || ndu < 2)
    throw Error(ErrorKind::InvalidArgument, "degenerate phase-portrait window");
  const double s = c * c - 1.0;
  if (std::abs(s) < 1e-12) throw Error(ErrorKind::InvalidArgument, "c^2 must differ from 1");
  std::vector<double> levels = energies;
  if (with_separatrix) {
    for (const auto& cp : critical_points(pot)) {
      if (cp.u < win.u_lo || cp.u > win.u_hi || win.du_lo > 0.0 || win.du_hi < 0.0) continue;
      if (s * cp.curvature < 0.0) levels.push_back(cp.value);  // saddle of the phase plane
    }
    std::sort(levels.begin() + static_cast<std::ptrdiff_t>(energies.size()), levels.end());
    levels.erase(std::unique(levels.begin() + static_cast<std::ptrdiff_t>(energies.size()), levels.end()),
                 levels.end());
  }
  const double hu = (win.u_hi - win.u_lo) / static_cast<double>(nu - 1);
  const double hdu = (win.du_hi - win.du_lo) / static_cast<double>(ndu - 1);
  std::vector<double> H(nu * ndu);
  for (std::size_t i = 0; i < nu; ++i) {
    const double u = win.u_lo + hu * static_cast<double>(i);
    const double v = pot.V(u);
    for (std::size_t j = 0; j < ndu; ++j) {
      const double du = win.du_lo + hdu * static_cast<double>(j);
      H[i * ndu + j] = 0.5 * s * du * du + v;
    }
  }
  std::vector<PortraitPoint> out;
  for (double E : levels) {
    const double level_tol = 1e-12 * std::max(1.0, std::abs(E));
    for (std::size_t i = 0; i < nu; ++i) {
      for (std::size_t j = 0; j < ndu; ++j) {
        const double h = H[i * ndu + j] - E;
        bool on = std::abs(h) < level_tol;
        if (!on && i + 1 < nu) on = h * (H[(i + 1) * ndu + j] - E) < 0.0;
        if (!on && j + 1 < ndu) on = h * (H[i * ndu + j + 1] - E) < 0.0;
        if (on)
          out.push_back({win.u_lo + hu * static_cast<double>(i), win.du_lo + hdu * static_cast<double>(j), E});
      }
    }
  }
  return out;
}

}  // namespace kgspec

#endif  // KGSPEC_WAVES_HPP
