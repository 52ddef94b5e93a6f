#ifndef KGSPEC_EVANS_HPP
#define KGSPEC_EVANS_HPP

#include <cmath>
#include <complex>
#include <functional>

#include "kgspec/angle.hpp"
#include "kgspec/error.hpp"
#include "kgspec/hill.hpp"
#include "kgspec/waves.hpp"

namespace kgspec {

/// Non-simple guard on 2 - |tr H| and residual guard on |D2|.
inline constexpr double krein_guard_tol = 1e-6;
inline constexpr double root_tol = 1e-8;

/// A wave together with a Floquet exponent. The profile is referenced,
/// not copied, and must outlive the context.
class EvansContext {
 public:
  EvansContext(const WaveProfile& profile, double theta)
      : profile_(&profile), theta_(wrap_angle(theta)) {}

  const WaveProfile& profile() const { return *profile_; }
  double theta() const { return theta_; }

 private:
  const WaveProfile* profile_;
  double theta_;
};

/// D2(zeta; theta) given an already computed Hill trace.
inline cplx evans_d2_from_trace(const WaveProfile& prof, double theta, cplx zeta, cplx trace) {
  return trace - 2.0 * std::cos(floquet_phase(prof, zeta) + theta);
}

/// D2(zeta; theta) = tr H(T; zeta) - 2 cos(c zeta T/(c^2-1) + theta).
inline cplx evans_d2(const EvansContext& ctx, cplx zeta, const Tolerance& tol = default_tolerance()) {
  const auto h = hill_monodromy(ctx.profile(), zeta, 0.0, tol);
  return evans_d2_from_trace(ctx.profile(), ctx.theta(), zeta, h.trace());
}

/// D1(zeta; theta) = det(F(T; zeta) - e^{-i theta} I), from the directly
/// integrated linearised monodromy. det F is taken from Abel's identity,
/// which is exact; forming it from the entries loses everything once the
/// fundamental solutions grow large.
inline cplx evans_d1(const EvansContext& ctx, cplx zeta, const Tolerance& tol = default_tolerance()) {
  const auto f = integrate_linearised(ctx.profile(), zeta, 0.0, tol);
  const cplx rho = std::polar(1.0, -ctx.theta());
  return abel_determinant(ctx.profile(), f) - rho * f.trace() + rho * rho;
}

/// D1 with the determinant formed from the matrix entries.
inline cplx evans_d1_entrywise(const EvansContext& ctx, cplx zeta,
                               const Tolerance& tol = default_tolerance()) {
  const auto f = integrate_linearised(ctx.profile(), zeta, 0.0, tol);
  const cplx rho = std::polar(1.0, -ctx.theta());
  return (f.a - rho) * (f.d - rho) - f.b * f.c;
}

/// D3(zeta; theta) = det(H(T; zeta) - eta I) with
/// eta = exp(-i c zeta T/(c^2-1) - i theta), expanded as
/// det H - eta tr H + eta^2 with det H = 1 (Abel).
inline cplx evans_d3(const EvansContext& ctx, cplx zeta, const Tolerance& tol = default_tolerance()) {
  const auto h = hill_monodromy(ctx.profile(), zeta, 0.0, tol);
  const cplx I{0.0, 1.0};
  const cplx eta = std::exp(-I * (floquet_phase(ctx.profile(), zeta) + ctx.theta()));
  return 1.0 - eta * h.trace() + eta * eta;
}

/// D3 with the determinant formed from the matrix entries.
inline cplx evans_d3_entrywise(const EvansContext& ctx, cplx zeta,
                               const Tolerance& tol = default_tolerance()) {
  const auto h = hill_monodromy(ctx.profile(), zeta, 0.0, tol);
  const cplx I{0.0, 1.0};
  const cplx eta = std::exp(-I * (floquet_phase(ctx.profile(), zeta) + ctx.theta()));
  return (h.a - eta) * (h.d - eta) - h.b * h.c;
}

/// D_Hill(zeta) = tr H(T; zeta) - 2.
inline cplx evans_hill(const WaveProfile& prof, cplx zeta, const Tolerance& tol = default_tolerance()) {
  return hill_monodromy(prof, zeta, 0.0, tol).trace() - 2.0;
}

struct HillDerivative {
  cplx trace;       // tr H(T; zeta)
  cplx trace_dv;    // d tr H / dv
  cplx derivative;  // D_Hill'(zeta) = 2 zeta/(c^2-1)^2 * d tr H/dv
};

/// D_Hill'(zeta) through the variational equation.
inline HillDerivative evans_hill_derivative(const WaveProfile& prof, cplx zeta,
                                            const Tolerance& tol = default_tolerance()) {
  const double s = prof.speed_factor();
  const auto var = integrate_hill_variational(prof, hill_parameter(prof, zeta), tol);
  const cplx tdv = var.trace_dv();
  return {var.monodromy.trace(), tdv, 2.0 * zeta / (s * s) * tdv};
}

struct KreinGuards {
  double abs_trace = 0.0;       // |tr H(T; zeta0)|
  double abs_hill_slope = 0.0;  // |D_Hill'(zeta0)|
  double residual = 0.0;        // |D2(zeta0; theta)|
};

struct KreinResult {
  double zeta0 = 0.0;
  double mu_prime = 0.0;
  int kappa = 0;
  KreinGuards guards;
};

/// d D2 / d zeta at real zeta, from a Hill derivative already in hand.
inline double evans_d2_slope(const WaveProfile& prof, double theta, double zeta, const HillDerivative& hd) {
  const double a = floquet_phase(prof, 1.0).real();
  return hd.derivative.real() + 2.0 * a * std::sin(a * zeta + theta);
}

/// Krein signature at zeta0 from a precomputed Hill derivative. Guards are
/// checked in order: zero, |tr H| near 2, vanishing slope of D2 (a double
/// root, e.g. at a collision), residual.
inline KreinResult krein_from_derivative(const WaveProfile& prof, double theta, double zeta0,
                                         const HillDerivative& hd) {
  if (zeta0 == 0.0)
    throw Error(ErrorKind::ZeroCharacteristicValue, "zeta0 = 0 is never a simple characteristic value");
  const double s = prof.speed_factor();
  const double a = floquet_phase(prof, 1.0).real();
  KreinResult r;
  r.zeta0 = zeta0;
  r.guards.abs_trace = std::abs(hd.trace.real());
  r.guards.abs_hill_slope = std::abs(hd.derivative.real());
  const double phase = a * zeta0 + theta;
  r.guards.residual = std::abs(hd.trace.real() - 2.0 * std::cos(phase));
  if (r.guards.abs_trace >= 2.0 - krein_guard_tol)
    throw Error(ErrorKind::NonSimple, "|tr H| is within the guard of 2 at zeta0");
  const double slope = evans_d2_slope(prof, theta, zeta0, hd);
  if (std::abs(slope) < krein_guard_tol * (1.0 + r.guards.abs_hill_slope + 2.0 * std::abs(a)))
    throw Error(ErrorKind::NonSimple, "d D2/d zeta vanishes at zeta0");
  if (r.guards.residual >= root_tol)
    throw Error(ErrorKind::NotACharacteristicValue, "|D2(zeta0; theta)| exceeds the root tolerance");
  r.mu_prime = 2.0 * zeta0 / (s * s) +
               4.0 * prof.c() * zeta0 * prof.T / (s * s * s) * std::sin(phase) / hd.derivative.real();
  r.kappa = r.mu_prime > 0.0 ? 1 : (r.mu_prime < 0.0 ? -1 : 0);
  return r;
}

/// Eigenvalue-branch derivative mu'(zeta0) at a simple real
/// characteristic value, together with the guard values.
inline KreinResult krein_signature(const EvansContext& ctx, double zeta0,
                                   const Tolerance& tol = default_tolerance()) {
  if (zeta0 == 0.0)
    throw Error(ErrorKind::ZeroCharacteristicValue, "zeta0 = 0 is never a simple characteristic value");
  const auto hd = evans_hill_derivative(ctx.profile(), zeta0, tol);
  return krein_from_derivative(ctx.profile(), ctx.theta(), zeta0, hd);
}

inline double mu_prime(const EvansContext& ctx, double zeta0, const Tolerance& tol = default_tolerance()) {
  return krein_signature(ctx, zeta0, tol).mu_prime;
}

}  // namespace kgspec

#endif  // KGSPEC_EVANS_HPP
