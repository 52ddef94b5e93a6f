#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "kgspec/spectrum.hpp"

using namespace kgspec;

namespace {

ScanOptions coarse(std::size_t n) {
  ScanOptions o;
  o.nx = o.ny = n;
  return o;
}

double nearest(const std::vector<SpectralPoint>& pts, cplx lambda) {
  double best = 1e300;
  for (const auto& p : pts) best = std::min(best, std::abs(p.lambda - lambda));
  return best;
}

}  // namespace

TEST(ThetaOfZeta, ZeroHasOnlyTheTrivialExponent) {
  for (const auto& p : {fixture::sg_sub_rot(), fixture::sg_sub_lib(), fixture::sg_super_rot(),
                        fixture::sg_super_lib(), fixture::phi4_tracked()}) {
    const auto prof = fixture::profile(p);
    const auto th = theta_of_zeta(prof, 0.0);
    ASSERT_EQ(th.size(), 1u);
    EXPECT_LT(std::min(th[0], two_pi - th[0]), 1e-6);
  }
}

TEST(ThetaOfZeta, RecoversExponentOfARoot) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  const EvansContext ctx(prof, 4.36);
  const auto roots = real_characteristic_values(ctx, 1.0, 2.4);
  ASSERT_FALSE(roots.empty());
  const auto th = theta_of_zeta(prof, roots.front().zeta);
  EXPECT_TRUE(std::any_of(th.begin(), th.end(), [](double t) { return std::abs(t - 4.36) < 1e-7; }));
}

TEST(ThetaOfZeta, OffSpectrumIsEmpty) {
  // deep in a gap of the superluminal librational wave tr H is far from [-2, 2]
  const auto prof = fixture::profile(fixture::sg_super_lib());
  EXPECT_TRUE(theta_of_zeta(prof, cplx(0.0, 1.5)).empty());
}

TEST(Scan, SubluminalRotationalIsOnTheAxis) {
  const auto prof = fixture::profile(fixture::sg_sub_rot());
  const auto res = spectrum_scan(prof, zeta_window_from_lambda(-0.6, 0.6, -2.0, 2.0), coarse(64));
  ASSERT_GT(res.points.size(), 10u);
  for (const auto& p : res.points) EXPECT_LT(std::abs(p.lambda.real()), 1e-6);
  EXPECT_LT(res.max_det_drift, 1e-8);
  EXPECT_LT(hamiltonian_symmetry_defect(res.points), 1e-8);
}

TEST(Scan, AcceptedPointsSurviveTighterIntegration) {
  const auto prof = fixture::profile(fixture::sg_sub_lib());
  const auto res = spectrum_scan(prof, zeta_window_from_lambda(-0.6, 0.6, -2.0, 2.0), coarse(48));
  ASSERT_FALSE(res.points.empty());
  const auto tight = default_tolerance().tightened(0.5);
  for (std::size_t i = 0; i < res.points.size(); i += 7) {
    const auto& p = res.points[i];
    const EvansContext ctx(prof, p.theta);
    EXPECT_LT(std::abs(evans_d2(ctx, p.zeta, tight)), root_tol) << p.lambda;
  }
}

TEST(Scan, TranslationKeepsInteriorSpectrum) {
  const auto prof = fixture::profile(fixture::sg_sub_lib());
  const auto a = spectrum_scan(prof, zeta_window_from_lambda(-0.6, 0.6, -1.0, 1.0), coarse(64));
  const auto b = spectrum_scan(prof, zeta_window_from_lambda(-0.55, 0.65, -0.93, 1.07), coarse(64));
  // grid cell diagonal of either scan
  const double cell = std::hypot(1.2 / 63.0, 2.0 / 63.0);
  auto inside = [](cplx l, double x0, double x1, double y0, double y1) {
    return l.real() > x0 && l.real() < x1 && l.imag() > y0 && l.imag() < y1;
  };
  std::size_t checked = 0;
  for (const auto& p : a.points)
    if (inside(p.lambda, -0.5, 0.5, -0.85, 0.95)) {
      EXPECT_LT(nearest(b.points, p.lambda), cell) << p.lambda;
      ++checked;
    }
  for (const auto& p : b.points) {
    if (inside(p.lambda, -0.5, 0.5, -0.85, 0.95)) {
      EXPECT_LT(nearest(a.points, p.lambda), cell) << p.lambda;
    }
  }
  EXPECT_GT(checked, 20u);
}

TEST(Scan, DeterministicAcrossRuns) {
  const auto prof = fixture::profile(fixture::sg_super_lib());
  const auto win = zeta_window_from_lambda(-0.3, 0.3, -1.0, 1.0);
  const auto a = spectrum_scan(prof, win, coarse(40));
  const auto b = spectrum_scan(prof, win, coarse(40));
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].zeta, b.points[i].zeta);
    EXPECT_EQ(a.points[i].theta, b.points[i].theta);
  }
}

TEST(Scan, RejectsBadInput) {
  const auto prof = fixture::profile(fixture::sg_super_lib());
  EXPECT_THROW(spectrum_scan(prof, {1.0, 1.0, -1.0, 1.0}, coarse(64)), Error);
  EXPECT_THROW(spectrum_scan(prof, {-1.0, 1.0, -1.0, 1.0}, coarse(8)), Error);
}

TEST(RealRoots, ZeroIsAFlaggedDoubleRoot) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  const auto roots = real_characteristic_values(EvansContext(prof, 0.0), -0.5, 0.5);
  const auto it = std::find_if(roots.begin(), roots.end(), [](const RealRoot& r) { return std::abs(r.zeta) < 1e-6; });
  ASSERT_NE(it, roots.end());
  EXPECT_TRUE(it->suspected_nonsimple);
}

TEST(RealRoots, MirrorUnderThetaReflection) {
  const auto prof = fixture::profile(fixture::phi4_tracked());
  const auto a = real_characteristic_values(EvansContext(prof, 2.2), 0.05, 1.2);
  const auto b = real_characteristic_values(EvansContext(prof, two_pi - 2.2), -1.2, -0.05);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].zeta, -b[b.size() - 1 - i].zeta, 1e-9);
}

TEST(RealRoots, TwoValuesLeaveTheAxisAfterOnset) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  const auto before = real_characteristic_values(EvansContext(prof, 4.36), 1.0, 2.4);
  const auto after = real_characteristic_values(EvansContext(prof, 4.88), 1.0, 2.4);
  EXPECT_EQ(before.size(), after.size() + 2);
}

TEST(Sweep, QuietRangeHasNoEvents) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  const auto res = sweep_theta(prof, theta_range(0.5, 1.0, 0.01), 1.0, 2.0);
  EXPECT_TRUE(res.events.empty());
  EXPECT_FALSE(res.tracks.empty());
}

TEST(Sweep, OnsetAndSignatureConservation) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  const auto res = sweep_theta(prof, theta_range(4.2, 4.8, 0.005), 1.0, 2.4);
  ASSERT_EQ(res.events.size(), 1u);
  const auto& ev = res.events.front();
  EXPECT_EQ(ev.kind, EventKind::HopfOnset);
  EXPECT_GE(ev.theta_star, 4.51);
  EXPECT_LE(ev.theta_star, 4.55);
  EXPECT_LE(ev.theta_hi - ev.theta_lo, 1e-4 + 1e-12);
  EXPECT_NEAR(ev.zeta_star, 1.88, 0.02);
  // kappa = 0 marks the collision on both merging tracks
  int zero_marks = 0;
  std::map<double, int> total;
  for (const auto& t : res.tracks)
    for (const auto& p : t.points) {
      if (p.kappa == 0 && std::abs(p.theta - ev.theta_star) < 1e-12) ++zero_marks;
      if (p.simple) total[p.theta] += p.kappa;
    }
  EXPECT_EQ(zero_marks, 2);
  // signed count is conserved: the onset removes one value of each sign
  for (const auto& [theta, sum] : total) EXPECT_EQ(sum, 0) << theta;
}

TEST(Sweep, ValidatesGrid) {
  const auto prof = fixture::profile(fixture::sg_super_rot());
  try {
    sweep_theta(prof, {0.0, 0.05}, 1.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  EXPECT_THROW(sweep_theta(prof, {0.1, 0.1, 0.11}, 1.0, 2.0), Error);
  EXPECT_THROW(sweep_theta(prof, {0.1}, 1.0, 2.0), Error);
}

TEST(ThetaRange, InclusiveEndpoints) {
  const auto g = theta_range(4.2, 5.4, 0.005);
  EXPECT_EQ(g.size(), 241u);
  EXPECT_NEAR(g.back(), 5.4, 1e-12);
  EXPECT_THROW(theta_range(1.0, 0.0, 0.1), Error);
}
