#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "kgspec/expr.hpp"
#include "kgspec/io.hpp"

using namespace kgspec;

TEST(Expression, Arithmetic) {
  auto f = parse_expression("0.25*u^4 - 0.5*u^2");
  for (double u : {-1.3, 0.0, 0.7, 2.0}) EXPECT_DOUBLE_EQ(f(u), phi4().V(u));
  EXPECT_DOUBLE_EQ(parse_expression("-u^2")(3.0), -9.0);
  EXPECT_DOUBLE_EQ(parse_expression("2^3^2")(0.0), 512.0);
  EXPECT_DOUBLE_EQ(parse_expression("(1+u)*(1-u)/2")(3.0), -4.0);
  EXPECT_DOUBLE_EQ(parse_expression(" 1 - cos( u ) ")(1.1), 1.0 - std::cos(1.1));
  EXPECT_DOUBLE_EQ(parse_expression("pi*tanh(u)+exp(-u)")(0.5), std::numbers::pi * std::tanh(0.5) + std::exp(-0.5));
  EXPECT_DOUBLE_EQ(parse_expression("1.5e-1")(0.0), 0.15);
}

TEST(Expression, Errors) {
  for (const char* bad : {"sin(u", "foo(u)", "u +", "2 3", "u*$", "", "sqrt u"}) {
    try {
      parse_expression(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument) << bad;
    }
  }
}

TEST(Expression, PotentialReproducesBuiltIn) {
  auto pot = expression_potential("1 - cos(u)", "sin(u)", "cos(u)", 2.0 * std::numbers::pi);
  WaveParameters mine{6.0, 1.45, pot, Branch::RotationalPlus};
  EXPECT_NEAR(compute_period(mine), compute_period(fixture::sg_super_rot()), 1e-12);
  auto quartic = expression_potential("u^4/4 - u^2/2", "u^3 - u", "3*u^2 - 1");
  WaveParameters q{-0.082875, 0.95, quartic, Branch::RightWell};
  EXPECT_NEAR(compute_period(q), compute_period(fixture::phi4_tracked()), 1e-10);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int k = 0; k < 2000; ++k) {
    const double x = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(io::fmt(x)), x);
  }
  EXPECT_EQ(std::stod(io::fmt(0.1)), 0.1);
  EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
}

TEST(Format, CsvHeaders) {
  auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  std::ostringstream a, b, c, d, e;
  io::write_profile_csv(a, fixture::profile(fixture::sg_sub_lib(), 16));
  io::write_portrait_csv(b, {});
  io::write_spectrum_csv(c, {});
  io::write_krein_csv(d, {{1.5, -1, -0.25, 3.4}});
  io::write_tracks_csv(e, {});
  EXPECT_EQ(first_line(a.str()), "z,u,du");
  EXPECT_EQ(first_line(b.str()), "u,du,E");
  EXPECT_EQ(first_line(c.str()), "re_lambda,im_lambda,theta,residual");
  EXPECT_EQ(d.str(), "zeta0,kappa,mu_prime,theta\n1.5,-1,-0.25,3.3999999999999999\n");
  EXPECT_EQ(first_line(e.str()), "track,theta,zeta,kappa,mu_prime,simple");
  // 16 samples plus the header
  const auto prof_csv = a.str();
  EXPECT_EQ(std::count(prof_csv.begin(), prof_csv.end(), '\n'), 17);
}

TEST(Format, EventSchema) {
  SweepEvent ev{EventKind::HopfOffset, 5.19, 1.42, 5.18995, 5.19005};
  const auto j = io::events_json({ev});
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["kind"], "HopfOffset");
  EXPECT_EQ(j[0]["theta_star"].get<double>(), 5.19);
  EXPECT_EQ(j[0]["zeta_star"].get<double>(), 1.42);
  EXPECT_EQ(j[0]["bracket"][0].get<double>(), 5.18995);
  EXPECT_EQ(j[0]["bracket"][1].get<double>(), 5.19005);
  EXPECT_EQ(j[0].size(), 4u);
  const auto back = nlohmann::json::parse(j.dump());
  EXPECT_EQ(back, j);
}

TEST(Format, MonodromyDump) {
  MonodromyMatrix m;
  m.a = {1.0, 2.0};
  m.d = {-0.5, 0.0};
  const auto j = io::monodromy_json(m);
  EXPECT_EQ(j["a"][1].get<double>(), 2.0);
  EXPECT_EQ(j["d"][0].get<double>(), -0.5);
  EXPECT_TRUE(j.contains("b") && j.contains("c"));
}

TEST(AtomicWrite, ReplacesWholeFile) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kgspec_io_test";
  fs::create_directories(dir);
  const auto path = (dir / "out.csv").string();
  io::atomic_write(path, "old contents that are longer\n");
  io::atomic_write(path, "new\n");
  std::ifstream f(path);
  std::string s((std::istreambuf_iterator<char>(f)), {});
  EXPECT_EQ(s, "new\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  fs::remove_all(dir);
}

TEST(AtomicWrite, MissingDirectoryFails) {
  EXPECT_THROW(io::atomic_write("/nonexistent-kgspec-dir/x.csv", "x"), Error);
}
