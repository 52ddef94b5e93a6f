// kgspec: command-line front end for Floquet spectra of Klein-Gordon wavetrains.
//
//   kgspec wave      -E 6 -c 1.45 --branch rot+
//   kgspec spectrum  -E -0.5 -c 0.5 --branch rot+ --window -2:2:-2:2 --grid 256x256
//   kgspec krein     --potential phi4 -E -0.082875 -c 0.95 --theta 3.4
//   kgspec sweep     -E 6 -c 1.45 --theta 4.2:5.4:0.005
//
// Exit status: 0 success, 2 invalid input, 3 numerical failure.

#include <boost/math/special_functions/ellint_1.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kgspec/evans.hpp"
#include "kgspec/expr.hpp"
#include "kgspec/io.hpp"
#include "kgspec/spectrum.hpp"
#include "kgspec/waves.hpp"

namespace {

using namespace kgspec;
using json = nlohmann::json;

constexpr int exit_invalid = 2;
constexpr int exit_numeric = 3;

struct RunConfig {
  std::string command;
  std::string potential = "sine-gordon";
  std::string V, dV, d2V;
  double period = 0.0;
  double E = 0.0;
  double c = 0.0;
  std::string branch = "auto";
  std::string theta = "0";
  std::string window = "-2:2:-2:2";
  std::string grid = "256x256";
  std::string zeta = "0.05:3";
  std::string plane = "-7:7:-4:4";
  std::vector<double> energies;
  std::size_t samples = 1025;
  std::size_t seeds = 2000;
  std::string output = "-";
  std::string format;  // csv, except json for sweep
  std::string events;
};

// Thrown for malformed flag values; maps to exit status 2.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> split_numbers(const std::string& s, char sep, std::size_t want, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw BadValue(std::string(flag) + ": '" + tok + "' is not a number");
    }
    if (!std::isfinite(out.back())) throw BadValue(std::string(flag) + ": values must be finite");
  }
  if (want && out.size() != want)
    throw BadValue(std::string(flag) + ": expected " + std::to_string(want) + " values in '" + s + "'");
  return out;
}

std::vector<double> parse_theta(const std::string& s) {
  if (s.find(':') == std::string::npos) return split_numbers(s, ':', 1, "--theta");
  const auto v = split_numbers(s, ':', 3, "--theta");
  if (!(v[2] > 0.0)) throw BadValue("--theta: step must be positive");
  if (!(v[1] >= v[0])) throw BadValue("--theta: stop must not precede start");
  return theta_range(v[0], v[1], v[2]);
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw BadValue("--grid: expected NxM");
  try {
    const long nx = std::stol(s.substr(0, x));
    const long ny = std::stol(s.substr(x + 1));
    if (nx < 2 || ny < 2) throw BadValue("--grid: both sizes must be at least 2");
    return {static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)};
  } catch (const std::logic_error&) {
    throw BadValue("--grid: expected NxM");
  }
}

Potential make_potential(const RunConfig& cfg) {
  if (cfg.potential == "sine-gordon") return sine_gordon();
  if (cfg.potential == "phi4") return phi4();
  if (cfg.V.empty() || cfg.dV.empty() || cfg.d2V.empty())
    throw BadValue("--potential expr needs --V, --dV and --d2V");
  return expression_potential(cfg.V, cfg.dV, cfg.d2V, cfg.period);
}

std::optional<Branch> parse_branch(const std::string& b) {
  if (b == "left") return Branch::LeftWell;
  if (b == "right") return Branch::RightWell;
  if (b == "rot+") return Branch::RotationalPlus;
  if (b == "rot-") return Branch::RotationalMinus;
  if (b == "outer") return Branch::OuterOrbit;
  return std::nullopt;  // auto
}

// Operation label shown with numerical failures.
const char* g_stage = "setup";

WaveProfile build_profile(const RunConfig& cfg) {
  WaveParameters p{cfg.E, cfg.c, make_potential(cfg), Branch::RightWell};
  g_stage = "wave_profile";
  if (auto b = parse_branch(cfg.branch)) {
    p.branch = *b;
    return wave_profile(p, cfg.samples);
  }
  // auto: the well orbit when one exists, else the forward rotational orbit
  try {
    return wave_profile(p, cfg.samples);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoOrbit || !p.potential.periodic) throw;
  }
  p.branch = Branch::RotationalPlus;
  return wave_profile(p, cfg.samples);
}

std::pair<double, double> parse_zeta(const RunConfig& cfg) {
  const auto z = split_numbers(cfg.zeta, ':', 2, "--zeta");
  if (!(z[1] > z[0])) throw BadValue("--zeta: interval is empty");
  return {z[0], z[1]};
}

void warn(const std::vector<std::string>& ws) {
  for (const auto& w : ws) std::cerr << "kgspec: warning: " << w << '\n';
}

std::string run_wave(const RunConfig& cfg) {
  const auto prof = build_profile(cfg);
  std::ostringstream os;
  if (cfg.format == "json") {
    g_stage = "hill_monodromy";
    const auto m = hill_monodromy(prof, 0.0);
    json j{{"E", cfg.E}, {"c", cfg.c}, {"branch", to_string(prof.params.branch)},
           {"regime", to_string(prof.regime)}, {"T", prof.T}, {"monodromy_zeta0", io::monodromy_json(m)}};
    auto s = json::array();
    for (const auto& p : prof.samples) s.push_back({p.z, p.u, p.du});
    j["samples"] = s;
    os << j.dump(1) << '\n';
  } else {
    io::write_profile_csv(os, prof);
  }
  std::cerr << "kgspec: T = " << io::fmt(prof.T) << " (" << to_string(prof.regime) << ")\n";
  return os.str();
}

std::string run_portrait(const RunConfig& cfg) {
  const auto pot = make_potential(cfg);
  const auto w = split_numbers(cfg.plane, ':', 4, "--plane");
  const auto [nu, ndu] = parse_grid(cfg.grid);
  std::vector<double> levels = cfg.energies.empty() ? std::vector<double>{cfg.E} : cfg.energies;
  g_stage = "phase_portrait";
  const auto pts = phase_portrait(levels, pot, cfg.c, {w[0], w[1], w[2], w[3]}, nu, ndu);
  std::ostringstream os;
  if (cfg.format == "json") {
    auto arr = json::array();
    for (const auto& p : pts) arr.push_back({{"u", p.u}, {"du", p.du}, {"E", p.E}});
    os << arr.dump(1) << '\n';
  } else {
    io::write_portrait_csv(os, pts);
  }
  return os.str();
}

std::string run_spectrum(const RunConfig& cfg) {
  const auto w = split_numbers(cfg.window, ':', 4, "--window");
  if (!(w[1] > w[0]) || !(w[3] > w[2])) throw BadValue("--window: rectangle is degenerate");
  const auto [nx, ny] = parse_grid(cfg.grid);
  const auto prof = build_profile(cfg);
  ScanOptions opt;
  // the lambda window's imaginary axis is the zeta window's real axis
  opt.nx = ny;
  opt.ny = nx;
  g_stage = "spectrum_scan";
  const auto res = spectrum_scan(prof, zeta_window_from_lambda(w[0], w[1], w[2], w[3]), opt);
  warn(res.warnings);
  std::cerr << "kgspec: " << res.points.size() << " spectral points, max |det H - 1| = "
            << io::fmt(res.max_det_drift) << '\n';
  std::ostringstream os;
  if (cfg.format == "json") {
    auto arr = json::array();
    for (const auto& p : res.points)
      arr.push_back({{"re_lambda", p.lambda.real()}, {"im_lambda", p.lambda.imag()}, {"theta", p.theta},
                     {"residual", p.residual}});
    os << arr.dump(1) << '\n';
  } else {
    io::write_spectrum_csv(os, res.points);
  }
  return os.str();
}

std::string run_krein(const RunConfig& cfg) {
  const auto thetas = parse_theta(cfg.theta);
  const auto [zlo, zhi] = parse_zeta(cfg);
  const auto prof = build_profile(cfg);
  g_stage = "make_trace_table";
  const auto table = make_trace_table(prof, zlo, zhi, cfg.seeds);
  std::vector<io::KreinRow> rows;
  for (double th : thetas) {
    g_stage = "real_characteristic_values";
    const auto roots = real_roots(table, th);
    g_stage = "krein_signature";
    const EvansContext ctx(prof, th);
    for (const auto& r : roots) {
      if (r.suspected_nonsimple) {
        std::cerr << "kgspec: skipping suspected non-simple value zeta0 = " << io::fmt(r.zeta) << '\n';
        continue;
      }
      try {
        const auto k = krein_signature(ctx, r.zeta);
        rows.push_back({r.zeta, k.kappa, k.mu_prime, th});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonSimple) throw;
        std::cerr << "kgspec: skipping zeta0 = " << io::fmt(r.zeta) << ": " << e.what() << '\n';
      }
    }
  }
  std::ostringstream os;
  if (cfg.format == "json") {
    auto arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"zeta0", r.zeta0}, {"kappa", r.kappa}, {"mu_prime", r.mu_prime}, {"theta", r.theta}});
    os << arr.dump(1) << '\n';
  } else {
    io::write_krein_csv(os, rows);
  }
  return os.str();
}

std::string run_sweep(const RunConfig& cfg, std::string& events_doc) {
  const auto thetas = parse_theta(cfg.theta);
  if (thetas.size() < 2) throw BadValue("--theta: sweep needs a range start:stop:step");
  const auto [zlo, zhi] = parse_zeta(cfg);
  const auto prof = build_profile(cfg);
  SweepOptions opt;
  opt.n_seed = cfg.seeds;
  g_stage = "sweep_theta";
  const auto res = sweep_theta(prof, thetas, zlo, zhi, opt);
  warn(res.warnings);
  for (const auto& e : res.events)
    std::cerr << "kgspec: " << to_string(e.kind) << " theta* = " << io::fmt(e.theta_star)
              << " zeta* = " << io::fmt(e.zeta_star) << '\n';
  events_doc = io::events_json(res.events).dump(1) + "\n";
  std::ostringstream os;
  if (cfg.format == "json") {
    json j{{"events", io::events_json(res.events)}, {"tracks", io::tracks_json(res.tracks)}};
    os << j.dump(1) << '\n';
  } else {
    io::write_tracks_csv(os, res.tracks);
  }
  return os.str();
}

// Oracle suite independent of any test framework.
int selftest() {
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, double err) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " err=" << io::fmt(err) << '\n';
    if (!ok) ++failures;
  };
  try {
    // Hill at the constant state U = pi: q'' + (v + 4/3) q = 0 for c = 1/2.
    WaveParameters p{2.0, 0.5, sine_gordon(), Branch::RightWell};
    const double T = 5.0, v = 0.3;
    const auto prof = equilibrium_profile(p, std::numbers::pi, T);
    const double w = std::sqrt(v + std::cos(std::numbers::pi) / p.speed_factor());
    const auto hv = integrate_hill_variational(prof, v);
    const double e1 = std::abs(hv.monodromy.trace() - 2.0 * std::cos(w * T));
    const double e2 = std::abs(hv.trace_dv() + T * std::sin(w * T) / w);
    report(std::max(e1, e2) < 1e-7, "constant-coefficient-hill", std::max(e1, e2));

    // Subluminal librational pendulum orbit about pi.
    WaveParameters q{0.5, 0.5, sine_gordon(), Branch::RightWell};
    const double s = std::abs(q.speed_factor());
    const double k = std::sqrt((2.0 - q.E) / 2.0);
    const double Tref = 4.0 * std::sqrt(s) * boost::math::ellint_1(k);
    const double Tp = compute_period(q);
    report(std::abs(Tp - Tref) < 1e-8 * Tref, "pendulum-period", std::abs(Tp - Tref) / Tref);

    // D1 + exp(i a zeta - i theta) D2 = 0 on a rotational wave.
    WaveParameters r{-0.5, 0.5, sine_gordon(), Branch::RotationalPlus};
    const auto wave = wave_profile(r, 64);
    double worst = 0.0;
    for (double th : {0.3, 2.0, 4.4})
      for (cplx z : {cplx(0.7, 0.1), cplx(-1.3, 0.4), cplx(2.1, -0.2)}) {
        const EvansContext ctx(wave, th);
        const cplx d1 = evans_d1_entrywise(ctx, z);
        const cplx d2 = evans_d2(ctx, z);
        const cplx ph = std::exp(cplx(0.0, 1.0) * (floquet_phase(wave, z) - th));
        worst = std::max(worst, std::abs(d1 + ph * d2) / (1.0 + std::abs(d1)));
      }
    report(worst < 1e-7, "d1-d2-relation", worst);
  } catch (const std::exception& e) {
    std::cerr << "kgspec: selftest: " << e.what() << '\n';
    return exit_numeric;
  }
  return failures == 0 ? 0 : exit_numeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet spectra, Krein signatures and Hamiltonian-Hopf events of Klein-Gordon wavetrains",
               "kgspec"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.fallthrough();
  RunConfig cfg;
  bool run_selftest = false;

  app.add_flag("--selftest", run_selftest, "Run the built-in oracle checks and exit");
  app.add_option("--potential", cfg.potential, "sine-gordon, phi4 or expr")
      ->check(CLI::IsMember({"sine-gordon", "phi4", "expr"}));
  app.add_option("--V", cfg.V, "V(u) for --potential expr");
  app.add_option("--dV", cfg.dV, "V'(u) for --potential expr");
  app.add_option("--d2V", cfg.d2V, "V''(u) for --potential expr");
  app.add_option("--period", cfg.period, "Period of an expr potential (0 for none)");
  app.add_option("-E,--energy", cfg.E, "Orbit energy");
  app.add_option("-c,--speed", cfg.c, "Wave speed");
  app.add_option("--branch", cfg.branch, "auto, left, right, rot+, rot- or outer")
      ->check(CLI::IsMember({"auto", "left", "right", "rot+", "rot-", "outer"}));
  app.add_option("--theta", cfg.theta, "Floquet exponent or start:stop:step");
  app.add_option("--window", cfg.window, "lambda-plane rectangle re_lo:re_hi:im_lo:im_hi");
  app.add_option("--grid", cfg.grid, "Grid size NxM (re x im for spectrum, u x u' for portrait)");
  app.add_option("--zeta", cfg.zeta, "Real zeta interval lo:hi for krein and sweep");
  app.add_option("--plane", cfg.plane, "Phase-plane window u_lo:u_hi:du_lo:du_hi");
  app.add_option("--energies", cfg.energies, "Level sets for portrait (default: -E)")->delimiter(',');
  app.add_option("--samples", cfg.samples, "Profile samples per period")->check(CLI::Range(16, 10'000'000));
  app.add_option("--seeds", cfg.seeds, "Real-axis seed points for krein and sweep")->check(CLI::Range(16, 10'000'000));
  app.add_option("-o,--output", cfg.output, "Output file, - for standard output");
  app.add_option("--format", cfg.format, "csv or json (default csv; json for sweep)")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--events", cfg.events, "Also write the sweep event log (JSON) to this path");

  for (const char* name : {"wave", "portrait", "spectrum", "krein", "sweep"}) {
    app.add_subcommand(name, std::string("Emit ") + name + " data")->callback([&cfg, name] { cfg.command = name; });
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return exit_invalid;
  }

  if (run_selftest) return selftest();
  if (cfg.command.empty()) {
    std::cerr << "kgspec: a command is required (wave, portrait, spectrum, krein, sweep)\n";
    return exit_invalid;
  }
  if (cfg.format.empty()) cfg.format = cfg.command == "sweep" ? "json" : "csv";
  if (!cfg.events.empty() && cfg.command != "sweep") {
    std::cerr << "kgspec: --events applies to sweep only\n";
    return exit_invalid;
  }
  if (!std::isfinite(cfg.E) || !std::isfinite(cfg.c)) {
    std::cerr << "kgspec: -E and -c must be finite\n";
    return exit_invalid;
  }

  try {
    std::string events_doc;
    std::string data;
    if (cfg.command == "wave") data = run_wave(cfg);
    else if (cfg.command == "portrait") data = run_portrait(cfg);
    else if (cfg.command == "spectrum") data = run_spectrum(cfg);
    else if (cfg.command == "krein") data = run_krein(cfg);
    else data = run_sweep(cfg, events_doc);

    g_stage = "write output";
    io::atomic_write(cfg.output, data);
    if (!cfg.events.empty()) io::atomic_write(cfg.events, events_doc);
    return 0;
  } catch (const BadValue& e) {
    std::cerr << "kgspec: " << e.what() << '\n';
    return exit_invalid;
  } catch (const Error& e) {
    std::cerr << "kgspec: " << cfg.command << ": " << g_stage << " failed: " << to_string(e.kind()) << ": "
              << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument ? exit_invalid : exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "kgspec: " << cfg.command << ": " << g_stage << " failed: " << e.what() << '\n';
    return exit_numeric;
  }
}
