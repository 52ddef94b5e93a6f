#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "kgspec/waves.hpp"
#include "oracles.hpp"

using namespace kgspec;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Period, SineGordonPanelsMatchEllipticOracle) {
  for (const auto& p : {fixture::sg_sub_rot(), fixture::sg_sub_lib(), fixture::sg_super_rot(), fixture::sg_super_lib()}) {
    const double T = compute_period(p);
    EXPECT_LT(rel(T, oracle::sine_gordon_period(p.E, p.c)), 1e-8) << "E=" << p.E << " c=" << p.c;
  }
}

TEST(Period, SineGordonSweepOfEnergies) {
  for (double E : {0.05, 0.7, 1.3, 1.95}) {
    WaveParameters sup{E, 1.6, sine_gordon(), Branch::RightWell};
    EXPECT_LT(rel(compute_period(sup), oracle::sine_gordon_period(E, 1.6)), 1e-8) << E;
    WaveParameters sub{E, 0.3, sine_gordon(), Branch::RightWell};
    EXPECT_LT(rel(compute_period(sub), oracle::sine_gordon_period(E, 0.3)), 1e-8) << E;
  }
  for (double E : {2.2, 4.0, 15.0}) {
    WaveParameters p{E, 1.2, sine_gordon(), Branch::RotationalMinus};
    EXPECT_LT(rel(compute_period(p), oracle::sine_gordon_period(E, 1.2)), 1e-8) << E;
  }
}

TEST(Period, HarmonicLimitNearTheCentre) {
  WaveParameters p{2.0 - 1e-6, 0.5, sine_gordon(), Branch::RightWell};
  const double harmonic = 2.0 * std::numbers::pi * std::sqrt(1.0 - 0.25);
  EXPECT_LT(rel(compute_period(p), harmonic), 1e-3);
}

TEST(Period, Phi4MatchesQuadratureOracle) {
  struct Case {
    WaveParameters p;
    double a, b;  // brackets for the turning points
  };
  const auto V = [](long double u) { return 0.25L * u * u * u * u - 0.5L * u * u; };
  const Case cases[] = {
      {fixture::phi4_tracked(), 0.0, 1.0},
      {{-0.05, 1.1, phi4(), Branch::RightWell}, 1.0, 2.0},
      {{0.5, 1.1, phi4(), Branch::OuterOrbit}, 0.0, 3.0},
  };
  for (const auto& cs : cases) {
    long double lo, hi;
    if (cs.p.speed_factor() < 0.0) {
      hi = oracle::turning_point(V, cs.p.E, cs.a, cs.b);
      lo = -hi;
    } else if (cs.p.branch == Branch::OuterOrbit) {
      hi = oracle::turning_point(V, cs.p.E, 1.0, cs.b);
      lo = -hi;
    } else {
      lo = oracle::turning_point(V, cs.p.E, 0.0, 1.0);
      hi = oracle::turning_point(V, cs.p.E, cs.a, cs.b);
    }
    const auto [ulo, uhi] = turning_points(cs.p);
    EXPECT_NEAR(ulo, static_cast<double>(lo), 1e-10);
    EXPECT_NEAR(uhi, static_cast<double>(hi), 1e-10);
    const double Tref = oracle::quadrature_period(V, cs.p.E, cs.p.c, lo, hi);
    EXPECT_LT(rel(compute_period(cs.p), Tref), 1e-8) << "E=" << cs.p.E;
  }
}

TEST(Profile, ConservesEnergyAndCloses) {
  for (const auto& p : {fixture::sg_sub_lib(), fixture::sg_super_lib(), fixture::phi4_tracked()}) {
    const auto prof = wave_profile(p, 200);
    EXPECT_LT(energy_residual(prof), 1e-9);
    EXPECT_NEAR(prof.samples.back().u, prof.samples.front().u, 1e-8);
    EXPECT_NEAR(prof.samples.back().du, prof.samples.front().du, 1e-8);
    EXPECT_DOUBLE_EQ(prof.winding, 0.0);
  }
}

TEST(Profile, RotationalWindsByOnePeriod) {
  const auto plus = wave_profile(fixture::sg_super_rot(), 100);
  EXPECT_NEAR(plus.samples.back().u - plus.samples.front().u, 2.0 * std::numbers::pi, 1e-8);
  EXPECT_GT(plus.winding, 0.0);
  auto minus_params = fixture::sg_super_rot();
  minus_params.branch = Branch::RotationalMinus;
  const auto minus = wave_profile(minus_params, 100);
  EXPECT_LT(minus.winding, 0.0);
  EXPECT_DOUBLE_EQ(minus.T, plus.T);
}

TEST(Profile, IsDeterministic) {
  const auto a = wave_profile(fixture::sg_sub_rot(), 64);
  const auto b = wave_profile(fixture::sg_sub_rot(), 64);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].u, b.samples[i].u);
    EXPECT_EQ(a.samples[i].du, b.samples[i].du);
  }
}

TEST(Regime, Classification) {
  EXPECT_EQ(classify_regime(fixture::sg_sub_rot()), Regime::SubluminalRotational);
  EXPECT_EQ(classify_regime(fixture::sg_sub_lib()), Regime::SubluminalLibrational);
  EXPECT_EQ(classify_regime(fixture::sg_super_rot()), Regime::SuperluminalRotational);
  EXPECT_EQ(classify_regime(fixture::sg_super_lib()), Regime::SuperluminalLibrational);
}

TEST(Errors, InvalidSpeed) {
  WaveParameters p{0.5, 1.0, sine_gordon(), Branch::RightWell};
  try {
    compute_period(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Errors, RotationalNeedsPeriodicPotential) {
  WaveParameters p{0.5, 1.1, phi4(), Branch::RotationalPlus};
  try {
    wave_profile(p, 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RotationalUnavailable);
  }
}

TEST(Errors, SeparatrixIsRejected) {
  WaveParameters p{2.0 - 1e-12, 1.5, sine_gordon(), Branch::RightWell};
  try {
    compute_period(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeparatrixDivergence);
  }
}

TEST(Errors, EnergyWithoutOrbit) {
  WaveParameters p{3.0, 0.5, sine_gordon(), Branch::RightWell};
  try {
    compute_period(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoOrbit);
  }
}

TEST(Portrait, PointsLieNearTheirLevel) {
  const PortraitWindow win{-4.0, 4.0, -3.0, 3.0};
  const auto pts = phase_portrait({0.5, 4.0}, sine_gordon(), 1.45, win, 201, 151);
  ASSERT_FALSE(pts.empty());
  const double s = 1.45 * 1.45 - 1.0;
  const double hu = 8.0 / 200.0, hdu = 6.0 / 150.0;
  bool separatrix = false;
  for (const auto& p : pts) {
    const double H = 0.5 * s * p.du * p.du + 1.0 - std::cos(p.u);
    // one grid step in either direction bounds the level error
    const double slack = std::abs(std::sin(p.u)) * hu + s * std::abs(p.du) * hdu + s * hdu * hdu + hu * hu;
    EXPECT_LT(std::abs(H - p.E), slack);
    separatrix |= std::abs(p.E - 2.0) < 1e-12;
  }
  EXPECT_TRUE(separatrix);
}

TEST(Portrait, DegenerateWindow) {
  EXPECT_THROW(phase_portrait({0.1}, phi4(), 0.5, {1.0, 1.0, -1.0, 1.0}, 10, 10), Error);
}

TEST(Equilibrium, RequiresCriticalPoint) {
  WaveParameters p{0.0, 0.5, sine_gordon(), Branch::RightWell};
  EXPECT_NO_THROW(equilibrium_profile(p, std::numbers::pi, 3.0));
  EXPECT_THROW(equilibrium_profile(p, 1.0, 3.0), Error);
}
