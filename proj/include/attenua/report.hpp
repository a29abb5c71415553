#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "attenua/errors.hpp"
#include "attenua/observables.hpp"

namespace attenua {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// t,E,l2_sq,local_E,dissipation_cum,X with full double precision.
inline std::string energy_csv(std::span<const EnergyRecord> records) {
  std::string out = "t,E,l2_sq,local_E,dissipation_cum,X\n";
  for (const auto& r : records) {
    out += format_double(r.t) + ',' + format_double(r.E) + ',' + format_double(r.l2_sq) + ',' +
           format_double(r.local_E) + ',' + format_double(r.dissipation_cum) + ',' + format_double(r.X) + '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

// Line chart of log10 E against log10(1 + t), with a guide of slope -p
// through the first point of the fit window.
inline std::string decay_svg(std::span<const double> t, std::span<const double> E, double claimed_p, double t_lo,
                             double t_hi, const std::string& title) {
  constexpr double W = 640, H = 420, ml = 60, mr = 20, mt = 40, mb = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (E[i] > 0.0) pts.emplace_back(std::log10(1.0 + t[i]), std::log10(E[i]));
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  if (pts.size() < 2) {
    s << "</svg>\n";
    return s.str();
  }
  double x0 = pts.front().first, x1 = pts.front().first, y0 = pts.front().second, y1 = pts.front().second;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  s << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"12\">log10(1+t)</text>\n";
  s << "<text x=\"8\" y=\"" << mt - 8 << "\" font-family=\"sans-serif\" font-size=\"12\">log10 E</text>\n";
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (auto [x, y] : pts) s << px(x) << ',' << py(y) << ' ';
  s << "\"/>\n";
  // guide through the first sample inside the window
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || !(E[i] > 0.0)) continue;
    const double gx0 = std::log10(1.0 + t[i]), gy0 = std::log10(E[i]);
    double gx1 = std::log10(1.0 + t_hi);
    double gy1 = gy0 - claimed_p * (gx1 - gx0);
    if (gy1 < y0 && claimed_p > 0.0) {
      gx1 = gx0 + (gy0 - y0) / claimed_p;
      gy1 = y0;
    }
    s << "<line x1=\"" << px(gx0) << "\" y1=\"" << py(gy0) << "\" x2=\"" << px(gx1) << "\" y2=\""
      << py(gy1) << "\" stroke=\"firebrick\" stroke-dasharray=\"6,4\"/>\n";
    s << "<text x=\"" << px(gx0) + 8 << "\" y=\"" << py(gy0) - 8
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"firebrick\">slope -" << claimed_p << "</text>\n";
    break;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace attenua
