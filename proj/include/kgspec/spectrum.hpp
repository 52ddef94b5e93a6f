#ifndef KGSPEC_SPECTRUM_HPP
#define KGSPEC_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "kgspec/angle.hpp"
#include "kgspec/error.hpp"
#include "kgspec/evans.hpp"
#include "kgspec/hill.hpp"
#include "kgspec/parallel.hpp"
#include "kgspec/waves.hpp"

namespace kgspec {

struct SpectralPoint {
  cplx zeta;
  double theta = 0.0;
  double residual = 0.0;
  cplx lambda;  // i * zeta
};

/// Rate a = c T / (c^2 - 1) in the phase a zeta + theta.
inline double phase_rate(const WaveProfile& prof) { return prof.c() * prof.T / prof.speed_factor(); }

/// Candidates whose imaginary part is below this are still polished and
/// kept if the residual passes. Near a band edge Im arccos(tr/2) behaves
/// like sqrt(|tr - 2|), so residuals of root_tol allow about sqrt(root_tol).
inline constexpr double band_edge_allowance = 1e-4;

inline SpectralPoint make_point(cplx zeta, double theta, double residual) {
  return {zeta, theta, residual, cplx{0.0, 1.0} * zeta};
}

/// Floquet exponents theta in [0, 2pi) with D2(zeta; theta) = 0, given the
/// Hill trace at zeta.
inline std::vector<double> thetas_from_trace(const WaveProfile& prof, cplx zeta, cplx trace,
                                             double imag_tol = 1e-6) {
  const cplx w = principal_acos(0.5 * trace);
  const cplx phase = floquet_phase(prof, zeta);
  std::vector<double> out;
  for (double sgn : {1.0, -1.0}) {
    const cplx cand = sgn * w - phase;
    if (std::abs(cand.imag()) >= imag_tol + band_edge_allowance) continue;
    double th = wrap_angle(cand.real());
    const cplx d = trace - 2.0 * std::cos(phase + th);
    double res = std::abs(d);
    // one Newton step, kept only if it helps (sin vanishes at band edges)
    const cplx dd = 2.0 * std::sin(phase + th);
    if (std::abs(dd) > 0.0) {
      const double th2 = wrap_angle(th - (d / dd).real());
      const double res2 = std::abs(trace - 2.0 * std::cos(phase + th2));
      if (res2 < res) {
        th = th2;
        res = res2;
      }
    }
    if (res >= root_tol) continue;
    // near a band edge 2cos is quadratic, so candidates within sqrt(root_tol)
    // are one double exponent; keep the midpoint
    const double merge = std::sqrt(root_tol);
    auto it = std::find_if(out.begin(), out.end(), [&](double t) {
      const double gap = std::abs(t - th);
      return std::min(gap, two_pi - gap) < merge;
    });
    if (it == out.end()) {
      out.push_back(th);
    } else {
      double gap = th - *it;
      if (gap > 0.5 * two_pi) gap -= two_pi;
      if (gap < -0.5 * two_pi) gap += two_pi;
      *it = wrap_angle(*it + 0.5 * gap);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> theta_of_zeta(const WaveProfile& prof, cplx zeta, double imag_tol = 1e-6,
                                         const Tolerance& tol = default_tolerance()) {
  return thetas_from_trace(prof, zeta, hill_monodromy(prof, zeta, 0.0, tol).trace(), imag_tol);
}

// ---------------------------------------------------------------------------
// Complex-plane scan

/// Axis-aligned rectangle in the zeta-plane.
struct ZetaWindow {
  double re_lo = -1.0, re_hi = 1.0, im_lo = -1.0, im_hi = 1.0;

  double diag() const { return std::hypot(re_hi - re_lo, im_hi - im_lo); }
  bool valid() const { return re_hi > re_lo && im_hi > im_lo; }
};

/// The zeta-window covering a lambda-rectangle (zeta = -i lambda).
inline ZetaWindow zeta_window_from_lambda(double re_lo, double re_hi, double im_lo, double im_hi) {
  return {im_lo, im_hi, -re_hi, -re_lo};
}

struct ScanOptions {
  std::size_t nx = 256;
  std::size_t ny = 256;
  double imag_tol = 1e-6;
  int bisection_levels = 14;
  Tolerance tol = default_tolerance();
};

struct ScanResult {
  std::vector<SpectralPoint> points;
  double max_det_drift = 0.0;  // max |det H - 1| over every evaluation
  std::size_t evaluations = 0;
  std::vector<std::string> warnings;
};

namespace detail {

struct TraceProbe {
  const WaveProfile* prof;
  Tolerance tol;
  double drift = 0.0;
  std::size_t count = 0;

  cplx operator()(cplx zeta) {
    const auto h = hill_monodromy(*prof, zeta, 0.0, tol);
    drift = std::max(drift, std::abs(h.det() - 1.0));
    ++count;
    return h.trace();
  }
};

inline double abs_im_w(cplx trace) { return std::abs(principal_acos(0.5 * trace).imag()); }

inline bool lambda_less(const SpectralPoint& p, const SpectralPoint& q) {
  return std::make_pair(p.lambda.real(), p.lambda.imag()) < std::make_pair(q.lambda.real(), q.lambda.imag());
}

inline void sort_unique(std::vector<SpectralPoint>& pts, double tol) {
  std::sort(pts.begin(), pts.end(), lambda_less);
  std::vector<SpectralPoint> kept;
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (p.lambda.real() - it->lambda.real() > tol) break;
      if (std::abs(p.lambda - it->lambda) <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(p);
  }
  pts = std::move(kept);
}

}  // namespace detail

/// Spectrum inside a zeta-window. A point is spectral when
/// |Im(a zeta)| = |Im arccos(tr H/2)|; the two signed indicators
/// a Im zeta -/+ |Im w| are sampled on the grid, sign changes along grid
/// edges are bisected to diag/2^levels and then polished. The real axis is
/// handled separately since whole bands lie on it.
inline ScanResult spectrum_scan(const WaveProfile& prof, const ZetaWindow& win, const ScanOptions& opt = {}) {
  if (!win.valid()) throw Error(ErrorKind::InvalidArgument, "scan window is degenerate");
  if (opt.nx < 32 || opt.ny < 32) throw Error(ErrorKind::InvalidArgument, "scan grid must be at least 32x32");
  const std::size_t nx = opt.nx, ny = opt.ny;
  const double a = phase_rate(prof);
  const double diag = win.diag();
  auto node = [&](std::size_t i, std::size_t j) {
    return cplx{win.re_lo + (win.re_hi - win.re_lo) * double(i) / double(nx - 1),
                win.im_lo + (win.im_hi - win.im_lo) * double(j) / double(ny - 1)};
  };

  ScanResult out;
  std::vector<cplx> tr(nx * ny);
  std::vector<double> drift(ny, 0.0);
  parallel_for(ny, [&](std::size_t j) {
    detail::TraceProbe probe{&prof, opt.tol};
    for (std::size_t i = 0; i < nx; ++i) tr[j * nx + i] = probe(node(i, j));
    drift[j] = probe.drift;
  });
  out.evaluations += nx * ny;
  for (double d : drift) out.max_det_drift = std::max(out.max_det_drift, d);

  auto indicator = [&](cplx z, cplx t, double sgn) { return a * z.imag() + sgn * detail::abs_im_w(t); };

  struct Task {
    cplx za, zb;
    double fa, fb, sgn;
  };
  std::vector<Task> tasks;
  for (double sgn : {-1.0, 1.0}) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const cplx z = node(i, j);
        const double f = indicator(z, tr[j * nx + i], sgn);
        if (i + 1 < nx) {
          const cplx z2 = node(i + 1, j);
          const double f2 = indicator(z2, tr[j * nx + i + 1], sgn);
          if (f * f2 < 0.0) tasks.push_back({z, z2, f, f2, sgn});
        }
        if (j + 1 < ny) {
          const cplx z2 = node(i, j + 1);
          const double f2 = indicator(z2, tr[(j + 1) * nx + i], sgn);
          if (f * f2 < 0.0) tasks.push_back({z, z2, f, f2, sgn});
        }
      }
    }
  }

  const double resolution = diag / std::ldexp(1.0, opt.bisection_levels);
  std::vector<std::optional<SpectralPoint>> found(tasks.size());
  std::vector<double> task_drift(tasks.size(), 0.0);
  std::vector<std::size_t> task_count(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t k) {
    const Task& t = tasks[k];
    detail::TraceProbe probe{&prof, opt.tol};
    const cplx dir = t.zb - t.za;
    const double len = std::abs(dir);
    cplx last_tr;
    auto f = [&](double s) {
      const cplx z = t.za + s * dir;
      last_tr = probe(z);
      return indicator(z, last_tr, t.sgn);
    };
    double lo = 0.0, hi = 1.0, flo = t.fa, fhi = t.fb;
    while ((hi - lo) * len > resolution) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    double s = lo;
    if (hi > lo) {
      boost::uintmax_t it = 60;
      const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                       boost::math::tools::eps_tolerance<double>(50), it);
      s = 0.5 * (r.first + r.second);
    }
    const cplx z = t.za + s * dir;
    const cplx trz = probe(z);
    const auto thetas = thetas_from_trace(prof, z, trz, opt.imag_tol);
    if (!thetas.empty()) {
      const double th = thetas.front();
      found[k] = make_point(z, th, std::abs(trz - 2.0 * std::cos(floquet_phase(prof, z) + th)));
    }
    task_drift[k] = probe.drift;
    task_count[k] = probe.count;
  });

  std::size_t rejected = 0;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    out.max_det_drift = std::max(out.max_det_drift, task_drift[k]);
    out.evaluations += task_count[k];
    if (found[k])
      out.points.push_back(*found[k]);
    else
      ++rejected;
  }
  if (rejected > 0)
    out.warnings.push_back(std::to_string(rejected) + " refined crossings failed the residual check");

  // Real axis: bands |tr| <= 2 and their edges.
  if (win.im_lo <= 0.0 && win.im_hi >= 0.0) {
    std::vector<double> xs(nx), rt(nx);
    detail::TraceProbe probe{&prof, opt.tol};
    for (std::size_t i = 0; i < nx; ++i) {
      xs[i] = win.re_lo + (win.re_hi - win.re_lo) * double(i) / double(nx - 1);
      rt[i] = probe(cplx{xs[i], 0.0}).real();
    }
    auto add = [&](double x, double t) {
      const auto thetas = thetas_from_trace(prof, x, t, opt.imag_tol);
      if (!thetas.empty())
        out.points.push_back(make_point(x, thetas.front(),
                                        std::abs(t - 2.0 * std::cos(floquet_phase(prof, x).real() + thetas.front()))));
    };
    for (std::size_t i = 0; i < nx; ++i)
      if (std::abs(rt[i]) <= 2.0) add(xs[i], rt[i]);
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      for (double edge : {2.0, -2.0}) {
        const double fa = rt[i] - edge, fb = rt[i + 1] - edge;
        if (fa * fb >= 0.0) continue;
        auto g = [&](double x) { return probe(cplx{x, 0.0}).real() - edge; };
        boost::uintmax_t it = 60;
        const auto r = boost::math::tools::toms748_solve(g, xs[i], xs[i + 1], fa, fb,
                                                         boost::math::tools::eps_tolerance<double>(50), it);
        const double x = 0.5 * (r.first + r.second);
        add(x, probe(cplx{x, 0.0}).real());
      }
    }
    out.max_det_drift = std::max(out.max_det_drift, probe.drift);
    out.evaluations += probe.count;
  }

  detail::sort_unique(out.points, 1e-10 * diag);
  if (out.points.empty()) out.warnings.push_back("EmptyWindow: no spectral points found");
  return out;
}

/// Largest distance from a mirrored point (lambda -> -lambda and
/// lambda -> conj(lambda)) to the nearest point of the set.
inline double hamiltonian_symmetry_defect(const std::vector<SpectralPoint>& pts) {
  double worst = 0.0;
  for (const auto& p : pts) {
    for (cplx m : {-p.lambda, std::conj(p.lambda)}) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : pts) best = std::min(best, std::abs(q.lambda - m));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Real characteristic values

struct RealRoot {
  double zeta = 0.0;
  bool suspected_nonsimple = false;
};

/// tr H sampled on a uniform real grid. The trace does not depend on theta,
/// so one table serves every theta of a sweep.
struct TraceTable {
  const WaveProfile* prof = nullptr;
  Tolerance tol;
  std::vector<double> zeta;
  std::vector<double> trace;

  double lo() const { return zeta.front(); }
  double hi() const { return zeta.back(); }
  double trace_at(double z) const { return hill_monodromy(*prof, z, 0.0, tol).trace().real(); }
};

inline TraceTable make_trace_table(const WaveProfile& prof, double lo, double hi, std::size_t n,
                                   const Tolerance& tol = default_tolerance()) {
  if (!(hi > lo)) throw Error(ErrorKind::InvalidArgument, "zeta interval is degenerate");
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least two seed points");
  TraceTable t{&prof, tol, std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) t.zeta[i] = lo + (hi - lo) * double(i) / double(n - 1);
  t.zeta.back() = hi;
  parallel_for(n, [&](std::size_t i) { t.trace[i] = t.trace_at(t.zeta[i]); });
  return t;
}

namespace detail {

inline double d2_real(double a, double theta, double zeta, double trace) {
  return trace - 2.0 * std::cos(a * zeta + theta);
}

/// Root of D2(.; theta) in a sign-changing bracket, to width w.
inline double refine_real_root(const TraceTable& t, double a, double theta, double x0, double x1, double f0,
                               double f1, double w) {
  auto f = [&](double x) { return d2_real(a, theta, x, t.trace_at(x)); };
  auto tol = [w](double l, double r) { return std::abs(r - l) <= w; };
  boost::uintmax_t it = 100;
  const auto r = boost::math::tools::toms748_solve(f, x0, x1, f0, f1, tol, it);
  return 0.5 * (r.first + r.second);
}

/// Extremum of sgn * D2(.; theta) on [x0, x1] (a maximum is sought).
inline std::pair<double, double> d2_extremum(const TraceTable& t, double a, double theta, double sgn, double x0,
                                             double x1) {
  auto neg = [&](double x) { return -sgn * d2_real(a, theta, x, t.trace_at(x)); };
  boost::uintmax_t it = 200;
  const auto r = boost::math::tools::brent_find_minima(neg, x0, x1, 40, it);
  return {r.first, -r.second};
}

}  // namespace detail

/// Real zeros of D2(.; theta) over the table's interval. Sign changes are
/// refined to |interval| * 1e-12; near-tangential dips are minimised and
/// either split into a close simple pair or flagged as suspected
/// non-simple roots.
inline std::vector<RealRoot> real_roots(const TraceTable& t, double theta) {
  const auto& prof = *t.prof;
  const double a = phase_rate(prof);
  const std::size_t n = t.zeta.size();
  const double width = (t.hi() - t.lo()) * 1e-12;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = detail::d2_real(a, theta, t.zeta[i], t.trace[i]);

  // Work items: (kind, index). kind 0 = sign change on [i, i+1], 1 = exact
  // zero at node i, 2 = tangential candidate centred on node i.
  std::vector<std::pair<int, std::size_t>> work;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] == 0.0) {
      work.emplace_back(1, i);
      continue;
    }
    if (i + 1 < n && d[i + 1] != 0.0 && (d[i] < 0.0) != (d[i + 1] < 0.0)) work.emplace_back(0, i);
    if (i == 0 || i + 1 == n) continue;
    const double l = d[i - 1], r = d[i + 1];
    if (l == 0.0 || r == 0.0 || (l < 0.0) != (d[i] < 0.0) || (r < 0.0) != (d[i] < 0.0)) continue;
    if (std::abs(d[i]) > std::abs(l) || std::abs(d[i]) > std::abs(r)) continue;
    if (std::abs(d[i]) > 4.0 * std::max(std::abs(l - d[i]), std::abs(r - d[i]))) continue;
    work.emplace_back(2, i);
  }

  std::vector<std::vector<RealRoot>> found(work.size());
  parallel_for(work.size(), [&](std::size_t k) {
    const auto [kind, i] = work[k];
    auto& out = found[k];
    if (kind == 0) {
      out.push_back({detail::refine_real_root(t, a, theta, t.zeta[i], t.zeta[i + 1], d[i], d[i + 1], width)});
    } else if (kind == 1) {
      const bool simple = i > 0 && i + 1 < n && (d[i - 1] < 0.0) != (d[i + 1] < 0.0);
      out.push_back({t.zeta[i], !simple});
    } else {
      const double sgn = d[i] > 0.0 ? -1.0 : 1.0;  // look for the dip towards zero
      const auto [xm, fm] = detail::d2_extremum(t, a, theta, sgn, t.zeta[i - 1], t.zeta[i + 1]);
      const double dm = sgn * fm;  // D2 at the extremum
      if ((dm < 0.0) != (d[i] < 0.0) && dm != 0.0) {
        out.push_back({detail::refine_real_root(t, a, theta, t.zeta[i - 1], xm, d[i - 1], dm, width)});
        out.push_back({detail::refine_real_root(t, a, theta, xm, t.zeta[i + 1], dm, d[i + 1], width)});
      } else if (std::abs(dm) < root_tol) {
        out.push_back({xm, true});
      }
    }
  });

  std::vector<RealRoot> roots;
  for (auto& f : found) roots.insert(roots.end(), f.begin(), f.end());
  std::sort(roots.begin(), roots.end(), [](const RealRoot& p, const RealRoot& q) { return p.zeta < q.zeta; });
  std::vector<RealRoot> unique;
  for (const auto& r : roots) {
    if (!unique.empty() && r.zeta - unique.back().zeta <= 2.0 * width) {
      unique.back().suspected_nonsimple = unique.back().suspected_nonsimple || r.suspected_nonsimple;
      continue;
    }
    unique.push_back(r);
  }
  return unique;
}

inline std::vector<RealRoot> real_characteristic_values(const EvansContext& ctx, double zeta_lo, double zeta_hi,
                                                        std::size_t n_seed = 2000,
                                                        const Tolerance& tol = default_tolerance()) {
  const auto table = make_trace_table(ctx.profile(), zeta_lo, zeta_hi, n_seed, tol);
  return real_roots(table, ctx.theta());
}

// ---------------------------------------------------------------------------
// Theta sweeps

enum class EventKind { HopfOnset, HopfOffset, PassThrough };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::HopfOnset: return "HopfOnset";
    case EventKind::HopfOffset: return "HopfOffset";
    case EventKind::PassThrough: return "PassThrough";
  }
  return "?";
}

struct SweepEvent {
  EventKind kind = EventKind::HopfOnset;
  double theta_star = 0.0;
  double zeta_star = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
};

struct TrackPoint {
  double theta = 0.0;
  double zeta = 0.0;
  double mu_prime = 0.0;
  int kappa = 0;
  bool simple = false;  // false when a Krein guard failed or at an event
};

struct Track {
  std::vector<TrackPoint> points;
};

struct SweepResult {
  std::vector<Track> tracks;
  std::vector<SweepEvent> events;
  std::vector<std::string> warnings;
};

struct SweepOptions {
  std::size_t n_seed = 2000;
  double event_width = 1e-4;
  double max_step = 0.02;
  double guard_factor = 5.0;  // match radius in units of local root spacing
  Tolerance tol = default_tolerance();
};

namespace detail {

struct RootState {
  double zeta = 0.0;
  double velocity = 0.0;  // d zeta / d theta along the zero set
  double mu_prime = 0.0;
  int kappa = 0;
  bool simple = false;
};

inline RootState root_state(const WaveProfile& prof, double theta, double zeta, const Tolerance& tol) {
  RootState st;
  st.zeta = zeta;
  const auto hd = evans_hill_derivative(prof, zeta, tol);
  const double a = phase_rate(prof);
  const double slope = evans_d2_slope(prof, theta, zeta, hd);
  const double dth = 2.0 * std::sin(a * zeta + theta);
  st.velocity = slope != 0.0 ? -dth / slope : std::numeric_limits<double>::infinity();
  try {
    const auto k = krein_from_derivative(prof, theta, zeta, hd);
    st.mu_prime = k.mu_prime;
    st.kappa = k.kappa;
    st.simple = true;
  } catch (const Error&) {
    st.simple = false;
  }
  return st;
}

inline std::vector<RootState> states_at(const TraceTable& t, double theta, const Tolerance& tol) {
  std::vector<double> zs;
  for (const auto& r : real_roots(t, theta))
    if (!r.suspected_nonsimple) zs.push_back(r.zeta);
  std::vector<RootState> out(zs.size());
  parallel_for(zs.size(), [&](std::size_t i) { out[i] = root_state(*t.prof, theta, zs[i], tol); });
  return out;
}

inline double hermite(double t0, double t1, double y0, double v0, double y1, double v1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * v0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * v1;
}

/// Bisection for the theta at which a pair of real roots near
/// [z0, z1] exists on one side and not the other. The pair exists when
/// the extremum of D2 between the neighbouring roots has the inner sign.
struct PairBisection {
  const TraceTable* table;
  double a;
  double sgn;     // sign of D2 between the two roots where they exist
  double x0, x1;  // search window
  std::vector<double> xs, tr;

  PairBisection(const TraceTable& t, double sign_inside, double lo, double hi) : table(&t), sgn(sign_inside) {
    a = phase_rate(*t.prof);
    x0 = std::max(lo, t.lo());
    x1 = std::min(hi, t.hi());
    const std::size_t n = 33;
    xs.resize(n);
    tr.resize(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x0 + (x1 - x0) * double(i) / double(n - 1);
    parallel_for(n, [&](std::size_t i) { tr[i] = t.trace_at(xs[i]); });
  }

  /// (location, sgn * D2) at the best extremum.
  std::pair<double, double> extremum(double theta) const {
    std::size_t best = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double v = sgn * d2_real(a, theta, xs[i], tr[i]);
      if (v > bv) {
        bv = v;
        best = i;
      }
    }
    const double l = xs[best == 0 ? 0 : best - 1];
    const double r = xs[std::min(best + 1, xs.size() - 1)];
    auto e = d2_extremum(*table, a, theta, sgn, l, r);
    if (e.second < bv) e = {xs[best], bv};
    return e;
  }

  bool exists(double theta) const { return extremum(theta).second > 0.0; }
};

}  // namespace detail

namespace detail {

class Sweeper {
 public:
  Sweeper(const WaveProfile& prof, double zeta_lo, double zeta_hi, const SweepOptions& opt)
      : prof_(prof), lo_(zeta_lo), hi_(zeta_hi), opt_(opt),
        table_(make_trace_table(prof, zeta_lo, zeta_hi, opt.n_seed, opt.tol)), a_(phase_rate(prof)) {}

  void start(double theta) {
    theta_ = theta;
    roots_ = states_at(table_, theta, opt_.tol);
    track_of_.resize(roots_.size());
    for (std::size_t i = 0; i < roots_.size(); ++i) {
      track_of_[i] = res_.tracks.size();
      res_.tracks.push_back({{point_of(theta, roots_[i])}});
    }
  }

  void advance(double theta1, int depth = 0) {
    auto cur = states_at(table_, theta1, opt_.tol);
    auto m = match(roots_, cur, theta1 - theta_);
    if (!clean(m, roots_, cur, theta1 - theta_) && depth < max_depth) {
      const double mid = 0.5 * (theta_ + theta1);
      advance(mid, depth + 1);
      advance(theta1, depth + 1);
      return;
    }
    commit(m, std::move(cur), theta1);
  }

  SweepResult finish() {
    std::stable_sort(res_.events.begin(), res_.events.end(),
                     [](const SweepEvent& p, const SweepEvent& q) { return p.theta_star < q.theta_star; });
    return std::move(res_);
  }

 private:
  static constexpr int max_depth = 10;

  struct Matching {
    std::vector<long> to_new, to_old;  // -1 unmatched, -2 consumed by an event
    std::vector<bool> ambiguous;
  };

  const WaveProfile& prof_;
  double lo_, hi_;
  SweepOptions opt_;
  TraceTable table_;
  double a_;
  double theta_ = 0.0;
  std::vector<RootState> roots_;
  std::vector<std::size_t> track_of_;
  SweepResult res_;

  static TrackPoint point_of(double theta, const RootState& s) {
    return {theta, s.zeta, s.mu_prime, s.kappa, s.simple};
  }

  double spacing(const std::vector<RootState>& rs, std::size_t i) const {
    double g = hi_ - lo_;
    if (i > 0) g = std::min(g, rs[i].zeta - rs[i - 1].zeta);
    if (i + 1 < rs.size()) g = std::min(g, rs[i + 1].zeta - rs[i].zeta);
    return g;
  }

  bool near_boundary(const std::vector<RootState>& rs, std::size_t i, double dth) const {
    const double reach = std::abs(rs[i].velocity * dth) + opt_.guard_factor * spacing(rs, i);
    return rs[i].zeta - lo_ < reach || hi_ - rs[i].zeta < reach;
  }

  std::pair<double, double> neighbour_window(const std::vector<RootState>& rs, std::size_t i, std::size_t j) const {
    const double l = i > 0 ? 0.5 * (rs[i - 1].zeta + rs[i].zeta) : lo_;
    const double r = j + 1 < rs.size() ? 0.5 * (rs[j].zeta + rs[j + 1].zeta) : hi_;
    return {l, r};
  }

  // Greedy nearest-prediction matching inside the spacing guard.
  Matching match(const std::vector<RootState>& prev, const std::vector<RootState>& cur, double dth) const {
    Matching m{std::vector<long>(prev.size(), -1), std::vector<long>(cur.size(), -1),
               std::vector<bool>(prev.size(), false)};
    std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < prev.size(); ++i) {
      const double pred = prev[i].zeta + prev[i].velocity * dth;
      const double guard = opt_.guard_factor * spacing(prev, i);
      double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        const double dist = std::abs(cur[j].zeta - pred);
        if (!(dist < guard)) continue;
        cand.emplace_back(dist, i, j);
        if (dist < d1) {
          d2 = d1;
          d1 = dist;
        } else if (dist < d2) {
          d2 = dist;
        }
      }
      if (std::isfinite(d2) && d2 < 2.0 * d1) m.ambiguous[i] = true;
    }
    std::sort(cand.begin(), cand.end());
    for (const auto& [dist, i, j] : cand) {
      if (m.ambiguous[i] || m.to_new[i] >= 0 || m.to_old[j] >= 0) continue;
      m.to_new[i] = long(j);
      m.to_old[j] = long(i);
    }
    return m;
  }

  // Every unmatched root is either half of an adjacent pair or leaves
  // through the interval ends.
  bool clean(const Matching& m, const std::vector<RootState>& prev, const std::vector<RootState>& cur,
             double dth) const {
    for (bool b : m.ambiguous)
      if (b) return false;
    auto singles_ok = [&](const std::vector<long>& map, const std::vector<RootState>& rs) {
      for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] != -1) continue;
        const bool paired = (i > 0 && map[i - 1] == -1) || (i + 1 < map.size() && map[i + 1] == -1);
        if (!paired && !near_boundary(rs, i, dth)) return false;
      }
      return true;
    };
    return singles_ok(m.to_new, prev) && singles_ok(m.to_old, cur);
  }

  void warn(const std::string& s) { res_.warnings.push_back("TrackingAmbiguity: " + s); }

  SweepEvent hopf(EventKind kind, const std::vector<RootState>& rs, std::size_t i, double th_in, double th0,
                  double th1) {
    const auto [wl, wr] = neighbour_window(rs, i, i + 1);
    const double mid = 0.5 * (rs[i].zeta + rs[i + 1].zeta);
    const double sgn = d2_real(a_, th_in, mid, table_.trace_at(mid)) > 0.0 ? 1.0 : -1.0;
    PairBisection pb(table_, sgn, wl, wr);
    const bool onset = kind == EventKind::HopfOnset;
    double lo = th0, hi = th1;
    if (pb.exists(lo) == onset && pb.exists(hi) != onset) {
      while (hi - lo > opt_.event_width) {
        const double m = 0.5 * (lo + hi);
        (pb.exists(m) == onset ? lo : hi) = m;
      }
    } else {
      warn(std::string(to_string(kind)) + " near theta " + std::to_string(th_in) + " could not be bracketed");
    }
    const double ts = 0.5 * (lo + hi);
    return {kind, ts, pb.extremum(ts).first, lo, hi};
  }

  SweepEvent pass_through(const RootState& A, const RootState& B, const RootState& A1, const RootState& B1,
                          double th0, double th1) {
    const double dth = th1 - th0;
    const double s0 = (A.velocity - B.velocity) >= 0.0 ? 1.0 : -1.0;
    auto pa = [&](double t) { return hermite(th0, th1, A.zeta, A.velocity, A1.zeta, A1.velocity, t); };
    auto pb = [&](double t) { return hermite(th0, th1, B.zeta, B.velocity, B1.zeta, B1.velocity, t); };
    double lo = th0, hi = th1;
    while (hi - lo > opt_.event_width) {
      const double m = 0.5 * (lo + hi);
      const double za = pa(m), zb = pb(m);
      const double c = 0.5 * (za + zb);
      const double half = 0.75 * std::abs(za - zb) + 0.5 * std::abs(A.velocity - B.velocity) * (hi - lo) +
                          0.25 * dth * (std::abs(A.velocity - A1.velocity) + std::abs(B.velocity - B1.velocity)) +
                          1e-9 * (1.0 + std::abs(c));
      const double wl = std::max(lo_, c - half), wr = std::min(hi_, c + half);
      const std::size_t ns = 33;
      std::vector<double> xs(ns), ds(ns);
      parallel_for(ns, [&](std::size_t q) {
        xs[q] = wl + (wr - wl) * double(q) / double(ns - 1);
        ds[q] = d2_real(a_, m, xs[q], table_.trace_at(xs[q]));
      });
      std::vector<double> rts;
      for (std::size_t q = 0; q + 1 < ns; ++q)
        if ((ds[q] < 0.0) != (ds[q + 1] < 0.0))
          rts.push_back(refine_real_root(table_, a_, m, xs[q], xs[q + 1], ds[q], ds[q + 1], (hi_ - lo_) * 1e-12));
      if (rts.size() < 2) {
        // closer than the sampling resolves: m is near the crossing
        const double q = 0.25 * (hi - lo);
        lo = std::max(lo, m - q);
        hi = std::min(hi, m + q);
        continue;
      }
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      const double zl = std::min(za, zb), zr = std::max(za, zb);
      for (std::size_t q = 0; q + 1 < rts.size(); ++q) {
        const double dist = std::abs(rts[q] - zl) + std::abs(rts[q + 1] - zr);
        if (dist < bd) {
          bd = dist;
          best = q;
        }
      }
      const auto s1 = root_state(prof_, m, rts[best], opt_.tol);
      const auto s2 = root_state(prof_, m, rts[best + 1], opt_.tol);
      const bool before = ((s1.velocity - s2.velocity) >= 0.0 ? 1.0 : -1.0) == s0;
      (before ? lo : hi) = m;
    }
    const double ts = 0.5 * (lo + hi);
    return {EventKind::PassThrough, ts, 0.5 * (pa(ts) + pb(ts)), lo, hi};
  }

  void commit(Matching& m, std::vector<RootState> cur, double th1) {
    const double th0 = theta_, dth = th1 - th0;
    const auto& prev = roots_;
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (m.ambiguous[i])
        warn("theta in [" + std::to_string(th0) + ", " + std::to_string(th1) + "], zeta ~ " +
             std::to_string(prev[i].zeta));

    std::vector<std::size_t> new_track(cur.size(), 0);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      if (m.to_old[j] >= 0) {
        new_track[j] = track_of_[std::size_t(m.to_old[j])];
        res_.tracks[new_track[j]].points.push_back(point_of(th1, cur[j]));
      } else {
        new_track[j] = res_.tracks.size();
        res_.tracks.push_back({{point_of(th1, cur[j])}});
      }
    }

    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      if (m.to_new[i] != -1 || m.to_new[i + 1] != -1 || m.ambiguous[i] || m.ambiguous[i + 1]) continue;
      const auto e = hopf(EventKind::HopfOnset, prev, i, th0, th0, th1);
      res_.events.push_back(e);
      for (std::size_t q : {i, i + 1}) res_.tracks[track_of_[q]].points.push_back({e.theta_star, e.zeta_star, 0.0, 0, false});
      m.to_new[i] = m.to_new[i + 1] = -2;
    }
    for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
      if (m.to_old[j] != -1 || m.to_old[j + 1] != -1) continue;
      const auto e = hopf(EventKind::HopfOffset, cur, j, th1, th0, th1);
      res_.events.push_back(e);
      for (std::size_t q : {j, j + 1}) {
        auto& pts = res_.tracks[new_track[q]].points;
        pts.insert(pts.begin(), TrackPoint{e.theta_star, e.zeta_star, 0.0, 0, false});
      }
      m.to_old[j] = m.to_old[j + 1] = -2;
    }
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (m.to_new[i] == -1 && !m.ambiguous[i] && !near_boundary(prev, i, dth))
        warn("root at zeta ~ " + std::to_string(prev[i].zeta) + " lost after theta " + std::to_string(th0));
    for (std::size_t j = 0; j < cur.size(); ++j)
      if (m.to_old[j] == -1 && !near_boundary(cur, j, dth))
        warn("root at zeta ~ " + std::to_string(cur[j].zeta) + " appeared at theta " + std::to_string(th1));

    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (m.to_new[i] < 0) continue;
      for (std::size_t j = i + 1; j < prev.size(); ++j) {
        if (m.to_new[j] < 0 || m.to_new[j] > m.to_new[i]) continue;
        res_.events.push_back(pass_through(prev[i], prev[j], cur[std::size_t(m.to_new[i])],
                                           cur[std::size_t(m.to_new[j])], th0, th1));
      }
    }

    roots_ = std::move(cur);
    track_of_ = std::move(new_track);
    theta_ = th1;
  }
};

}  // namespace detail

/// Track real characteristic values of D2 across a theta grid and report
/// Hamiltonian-Hopf onsets and offsets and pass-throughs. Steps whose
/// roots cannot be matched cleanly are halved, up to ten times.
inline SweepResult sweep_theta(const WaveProfile& prof, const std::vector<double>& theta_grid, double zeta_lo,
                               double zeta_hi, const SweepOptions& opt = {}) {
  if (theta_grid.size() < 2) throw Error(ErrorKind::InvalidArgument, "theta grid needs at least two values");
  for (std::size_t k = 1; k < theta_grid.size(); ++k) {
    const double step = theta_grid[k] - theta_grid[k - 1];
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta grid must be strictly increasing");
    if (step > opt.max_step + 1e-12) throw Error(ErrorKind::InvalidArgument, "theta step exceeds the sweep maximum");
  }
  detail::Sweeper sw(prof, zeta_lo, zeta_hi, opt);
  sw.start(theta_grid.front());
  for (std::size_t k = 1; k < theta_grid.size(); ++k) sw.advance(theta_grid[k]);
  return sw.finish();
}

/// Uniform grid start, start + step, ... up to stop (inclusive within
/// rounding).
inline std::vector<double> theta_range(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw Error(ErrorKind::InvalidArgument, "bad theta range");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(start + double(i) * step);
  return g;
}

}  // namespace kgspec

#endif  // KGSPEC_SPECTRUM_HPP
