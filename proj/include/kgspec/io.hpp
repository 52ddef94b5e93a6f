#ifndef KGSPEC_IO_HPP
#define KGSPEC_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgspec/error.hpp"
#include "kgspec/hill.hpp"
#include "kgspec/spectrum.hpp"
#include "kgspec/waves.hpp"

namespace kgspec::io {

inline constexpr int csv_digits = 17;

inline std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(csv_digits) << x;
  return os.str();
}

struct KreinRow {
  double zeta0;
  int kappa;
  double mu_prime;
  double theta;
};

inline void write_profile_csv(std::ostream& os, const WaveProfile& prof) {
  os << "z,u,du\n";
  for (const auto& s : prof.samples) os << fmt(s.z) << ',' << fmt(s.u) << ',' << fmt(s.du) << '\n';
}

inline void write_portrait_csv(std::ostream& os, const std::vector<PortraitPoint>& pts) {
  os << "u,du,E\n";
  for (const auto& p : pts) os << fmt(p.u) << ',' << fmt(p.du) << ',' << fmt(p.E) << '\n';
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectralPoint>& pts) {
  os << "re_lambda,im_lambda,theta,residual\n";
  for (const auto& p : pts)
    os << fmt(p.lambda.real()) << ',' << fmt(p.lambda.imag()) << ',' << fmt(p.theta) << ',' << fmt(p.residual)
       << '\n';
}

inline void write_krein_csv(std::ostream& os, const std::vector<KreinRow>& rows) {
  os << "zeta0,kappa,mu_prime,theta\n";
  for (const auto& r : rows) os << fmt(r.zeta0) << ',' << r.kappa << ',' << fmt(r.mu_prime) << ',' << fmt(r.theta) << '\n';
}

inline void write_tracks_csv(std::ostream& os, const std::vector<Track>& tracks) {
  os << "track,theta,zeta,kappa,mu_prime,simple\n";
  for (std::size_t k = 0; k < tracks.size(); ++k)
    for (const auto& p : tracks[k].points)
      os << k << ',' << fmt(p.theta) << ',' << fmt(p.zeta) << ',' << p.kappa << ',' << fmt(p.mu_prime) << ','
         << (p.simple ? 1 : 0) << '\n';
}

inline nlohmann::json to_json(const SweepEvent& e) {
  return {{"kind", to_string(e.kind)},
          {"theta_star", e.theta_star},
          {"zeta_star", e.zeta_star},
          {"bracket", {e.theta_lo, e.theta_hi}}};
}

inline nlohmann::json events_json(const std::vector<SweepEvent>& events) {
  auto arr = nlohmann::json::array();
  for (const auto& e : events) arr.push_back(to_json(e));
  return arr;
}

inline nlohmann::json tracks_json(const std::vector<Track>& tracks) {
  auto arr = nlohmann::json::array();
  for (const auto& t : tracks) {
    auto pts = nlohmann::json::array();
    for (const auto& p : t.points)
      pts.push_back({{"theta", p.theta}, {"zeta", p.zeta}, {"kappa", p.kappa}, {"mu_prime", p.mu_prime},
                     {"simple", p.simple}});
    arr.push_back(pts);
  }
  return arr;
}

/// Debug dump of monodromy entries, each as [re, im].
inline nlohmann::json monodromy_json(const MonodromyMatrix& m) {
  auto pair = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
  return {{"a", pair(m.a)}, {"b", pair(m.b)}, {"c", pair(m.c)}, {"d", pair(m.d)}};
}

/// Writes content to path through a temporary file in the same directory
/// and a rename, so a failed run never leaves a partial file. "-" means
/// standard output.
inline void atomic_write(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open output file " + path);
    f << content;
    f.flush();
    if (!f) {
      f.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::InvalidArgument, "cannot write output file " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::InvalidArgument, "cannot move output into place at " + path);
  }
}

}  // namespace kgspec::io

#endif  // KGSPEC_IO_HPP
