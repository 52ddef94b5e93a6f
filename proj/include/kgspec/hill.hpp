#ifndef KGSPEC_HILL_HPP
#define KGSPEC_HILL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "kgspec/angle.hpp"
#include "kgspec/error.hpp"
#include "kgspec/ode.hpp"
#include "kgspec/waves.hpp"

namespace kgspec {

using cplx = std::complex<double>;

enum class MonodromyKind { Hill, Linearised };

/// 2x2 principal fundamental solution matrix evaluated at z = T:
/// [[a, b], [c, d]] = [[y1, y2], [y1', y2']].
struct MonodromyMatrix {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};
  MonodromyKind kind = MonodromyKind::Hill;
  cplx zeta{0.0};
  double mu = 0.0;
  double T = 0.0;

  cplx trace() const { return a + d; }
  cplx det() const { return a * d - b * c; }
};

/// Default integrator settings for monodromy computations.
inline Tolerance default_tolerance() { return {}; }

/// v(zeta, mu) = zeta^2 / (c^2 - 1)^2 - mu.
inline cplx hill_parameter(const WaveProfile& prof, cplx zeta, double mu = 0.0) {
  const double s = prof.speed_factor();
  return zeta * zeta / (s * s) - mu;
}

/// Phase c zeta T / (c^2 - 1) that relates the two sets of Floquet multipliers.
inline cplx floquet_phase(const WaveProfile& prof, cplx zeta) {
  return prof.c() * zeta * prof.T / prof.speed_factor();
}

namespace detail {

inline cplx load(const double* p) { return {p[0], p[1]}; }
inline void store(double* p, cplx z) {
  p[0] = z.real();
  p[1] = z.imag();
}

// State layouts (U and U' are re-integrated with the fundamental
// solutions so the coefficient is never interpolated):
//   [U, U', y1, y1', y2, y2']                  with complex y as (re, im)
//   [U, U', q1, q1', q2, q2', w1, w1', w2, w2'] for the v-derivative
struct HillRhs {
  const Potential* pot;
  double s;
  cplx v;

  template <std::size_t N>
  void operator()(const std::array<double, N>& x, std::array<double, N>& dx, double) const {
    const double u = x[0];
    dx[0] = x[1];
    dx[1] = -pot->dV(u) / s;
    const cplx k = v + pot->d2V(u) / s;
    for (std::size_t j = 0; j < 2; ++j) {
      const double* q = &x[2 + 4 * j];
      double* dq = &dx[2 + 4 * j];
      store(dq, load(q + 2));
      store(dq + 2, -k * load(q));
    }
    if constexpr (N == 18) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double* w = &x[10 + 4 * j];
        double* dw = &dx[10 + 4 * j];
        store(dw, load(w + 2));
        store(dw + 2, -k * load(w) - load(&x[2 + 4 * j]));
      }
    }
  }
};

struct LinearisedRhs {
  const Potential* pot;
  double s;
  cplx drift;  // 2 i c zeta / (c^2 - 1)
  cplx shift;  // zeta^2 / (c^2 - 1) + mu

  void operator()(const std::array<double, 10>& x, std::array<double, 10>& dx, double) const {
    const double u = x[0];
    dx[0] = x[1];
    dx[1] = -pot->dV(u) / s;
    const cplx k = shift - pot->d2V(u) / s;
    for (std::size_t j = 0; j < 2; ++j) {
      const double* p = &x[2 + 4 * j];
      double* dp = &dx[2 + 4 * j];
      const cplx dpz = load(p + 2);
      store(dp, dpz);
      store(dp + 2, drift * dpz + k * load(p));
    }
  }
};

template <std::size_t N>
std::array<double, N> identity_state(const WaveProfile& prof) {
  std::array<double, N> x{};
  x[0] = prof.u0;
  x[1] = prof.du0;
  x[2] = 1.0;  // y1(0) = 1
  x[8] = 1.0;  // y2'(0) = 1
  return x;
}

inline void check_profile(const WaveProfile& prof) {
  if (!(prof.T > 0.0) || !std::isfinite(prof.T))
    throw Error(ErrorKind::InvalidArgument, "wave profile has no valid period");
}

}  // namespace detail

/// Monodromy matrix H(T) of Hill's equation q'' + (v + V''(U)/(c^2-1)) q = 0.
inline MonodromyMatrix integrate_hill(const WaveProfile& prof, cplx v,
                                      const Tolerance& tol = default_tolerance()) {
  detail::check_profile(prof);
  detail::HillRhs rhs{&prof.params.potential, prof.speed_factor(), v};
  auto x = integrate_to(rhs, detail::identity_state<10>(prof), prof.T, tol, "integrate_hill");
  MonodromyMatrix m;
  m.a = detail::load(&x[2]);
  m.c = detail::load(&x[4]);
  m.b = detail::load(&x[6]);
  m.d = detail::load(&x[8]);
  m.kind = MonodromyKind::Hill;
  m.T = prof.T;
  const double s = prof.speed_factor();
  m.zeta = std::abs(s) * std::sqrt(v);  // one of the two roots; hill_monodromy sets the caller's
  return m;
}

/// H(T) at the spectral parameter zeta (mu = 0 unless probing Evans-Krein).
inline MonodromyMatrix hill_monodromy(const WaveProfile& prof, cplx zeta, double mu = 0.0,
                                      const Tolerance& tol = default_tolerance()) {
  auto m = integrate_hill(prof, hill_parameter(prof, zeta, mu), tol);
  m.zeta = zeta;
  m.mu = mu;
  return m;
}

struct HillVariation {
  MonodromyMatrix monodromy;
  /// Entrywise derivative of H(T) with respect to v.
  std::array<cplx, 4> dv{};  // a, b, c, d

  cplx trace_dv() const { return dv[0] + dv[3]; }
};

/// H(T) together with dH(T)/dv from the variational system
/// w'' + (v + W) w = -q with zero initial data.
inline HillVariation integrate_hill_variational(const WaveProfile& prof, cplx v,
                                                const Tolerance& tol = default_tolerance()) {
  detail::check_profile(prof);
  detail::HillRhs rhs{&prof.params.potential, prof.speed_factor(), v};
  auto x = integrate_to(rhs, detail::identity_state<18>(prof), prof.T, tol,
                        "integrate_hill_variational");
  HillVariation out;
  auto& m = out.monodromy;
  m.a = detail::load(&x[2]);
  m.c = detail::load(&x[4]);
  m.b = detail::load(&x[6]);
  m.d = detail::load(&x[8]);
  m.kind = MonodromyKind::Hill;
  m.T = prof.T;
  out.dv = {detail::load(&x[10]), detail::load(&x[14]), detail::load(&x[12]), detail::load(&x[16])};
  return out;
}

/// Monodromy matrix F(T) of the linearised travelling-wave equation
/// p'' - (2icz/(c^2-1)) p' + (-(z^2)/(c^2-1) - mu + V''(U)/(c^2-1)) p = 0.
inline MonodromyMatrix integrate_linearised(const WaveProfile& prof, cplx zeta, double mu = 0.0,
                                            const Tolerance& tol = default_tolerance()) {
  detail::check_profile(prof);
  const double s = prof.speed_factor();
  const cplx I{0.0, 1.0};
  detail::LinearisedRhs rhs{&prof.params.potential, s, 2.0 * I * prof.c() * zeta / s,
                            zeta * zeta / s + mu};
  // the first-order system carries the exp(icz zeta/s) growth that the Hill
  // form removes, so it runs two decades tighter for the same accuracy
  auto x = integrate_to(rhs, detail::identity_state<10>(prof), prof.T, tol.tightened(0.01), "integrate_linearised");
  MonodromyMatrix m;
  m.a = detail::load(&x[2]);
  m.c = detail::load(&x[4]);
  m.b = detail::load(&x[6]);
  m.d = detail::load(&x[8]);
  m.kind = MonodromyKind::Linearised;
  m.zeta = zeta;
  m.mu = mu;
  m.T = prof.T;
  return m;
}

/// Expected determinant from Abel's identity.
inline cplx abel_determinant(const WaveProfile& prof, const MonodromyMatrix& m) {
  if (m.kind == MonodromyKind::Hill) return cplx{1.0};
  const cplx I{0.0, 1.0};
  return std::exp(2.0 * I * prof.c() * m.T * m.zeta / prof.speed_factor());
}

/// F(T) rebuilt from H(T) through p = exp(i c zeta z/(c^2-1)) q.
inline MonodromyMatrix linearised_from_hill(const WaveProfile& prof, const MonodromyMatrix& h) {
  const cplx I{0.0, 1.0};
  const cplx k = I * prof.c() * h.zeta / prof.speed_factor();
  const cplx e = std::exp(k * h.T);
  MonodromyMatrix f;
  f.a = e * (h.a - k * h.b);
  f.b = e * h.b;
  f.c = e * (k * (h.a - k * h.b) + h.c - k * h.d);
  f.d = e * (k * h.b + h.d);
  f.kind = MonodromyKind::Linearised;
  f.zeta = h.zeta;
  f.mu = h.mu;
  f.T = h.T;
  return f;
}

/// Eigenvalues of the monodromy matrix, ordered by ascending modulus and
/// then by argument in [0, 2pi).
inline std::pair<cplx, cplx> floquet_multipliers(const MonodromyMatrix& m) {
  const cplx tr = m.trace(), det = m.det();
  const cplx half = 0.5 * tr;
  const cplx disc = std::sqrt(half * half - det);
  cplx big = std::abs(half + disc) >= std::abs(half - disc) ? half + disc : half - disc;
  cplx small = big == cplx{0.0} ? cplx{0.0} : det / big;
  auto key = [](cplx z) { return std::make_pair(std::abs(z), wrap_angle(std::arg(z))); };
  // moduli that agree to rounding are treated as equal
  const double scale = std::max({1.0, std::abs(big), std::abs(small)});
  if (std::abs(std::abs(big) - std::abs(small)) <= 1e-12 * scale) {
    if (wrap_angle(std::arg(big)) < wrap_angle(std::arg(small))) std::swap(big, small);
    return {small, big};
  }
  if (key(big) < key(small)) std::swap(big, small);
  return {small, big};
}

}  // namespace kgspec

#endif  // KGSPEC_HILL_HPP
