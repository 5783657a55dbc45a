#include "rcbf/report.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

#include "rcbf/vehicle_lateral.hpp"

namespace rcbf {

namespace {

constexpr double kViewHalfWidth = 25.0;
constexpr double kCanvas = 500.0;
constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#9467bd", "#ff7f0e", "#17becf"};

double to_px_x(double s) { return (s + kViewHalfWidth) / (2.0 * kViewHalfWidth) * kCanvas; }
double to_px_y(double e) { return (kViewHalfWidth - e) / (2.0 * kViewHalfWidth) * kCanvas; }

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // avoids "-0"
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (!traj.states.empty() && (traj.states.front().size() != 5 || traj.us.front().size() != 1)) {
    throw std::invalid_argument("write_trajectory_csv: expects the 5-state, 1-input vehicle");
  }
  os << kTrajectoryCsvHeader << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector& x = traj.states[k];
    os << format_number(traj.times[k]);
    for (Eigen::Index i = 0; i < 5; ++i) os << ',' << format_number(x(i));
    os << ',' << format_number(traj.h_vals[k]) << ',' << format_number(traj.hdot_vals[k]) << ','
       << format_number(traj.u0s[k](0)) << ',' << format_number(traj.us[k](0)) << ','
       << format_number(traj.ws[k](0)) << ',' << format_number(traj.margins[k]) << ','
       << (traj.altered[k] ? 1 : 0) << '\n';
  }
}

void write_metrics(std::ostream& os, const std::string& scenario, const TrajectoryMetrics& m) {
  os << "scenario=" << scenario << '\n';
  os << "min_h=" << format_number(m.min_h) << '\n';
  os << "argmin_t=" << format_number(m.argmin_t) << '\n';
  if (m.min_distance) os << "min_distance=" << format_number(*m.min_distance) << '\n';
  os << "violation=" << (m.violation ? "true" : "false") << '\n';
  os << "steps_altered=" << m.steps_altered << '\n';
  os << "steps_infeasible=" << m.steps_infeasible << '\n';
  os << "max_abs_u=" << format_number(m.max_abs_u) << '\n';
}

void write_trajectory_svg(std::ostream& os, const std::vector<SvgSeries>& series, double d) {
  const std::string size = format_number(kCanvas);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes through the origin
  os << "<line x1=\"0\" y1=\"" << format_number(to_px_y(0.0)) << "\" x2=\"" << size << "\" y2=\""
     << format_number(to_px_y(0.0)) << "\" stroke=\"#bbbbbb\"/>\n";
  os << "<line x1=\"" << format_number(to_px_x(0.0)) << "\" y1=\"0\" x2=\""
     << format_number(to_px_x(0.0)) << "\" y2=\"" << size << "\" stroke=\"#bbbbbb\"/>\n";
  os << "<circle cx=\"" << format_number(to_px_x(0.0)) << "\" cy=\"" << format_number(to_px_y(0.0))
     << "\" r=\"" << format_number(d / (2.0 * kViewHalfWidth) * kCanvas)
     << "\" fill=\"#888888\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Trajectory& traj = *series[i].traj;
    const char* colour = kPalette[i % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (k > 0) os << ' ';
      const Vector& x = traj.states[k];
      os << format_number(to_px_x(x(kS))) << ',' << format_number(to_px_y(x(kE)));
    }
    os << "\"/>\n";
    os << "<text x=\"8\" y=\"" << format_number(18.0 + 16.0 * static_cast<double>(i))
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << colour << "\">"
       << xml_escape(series[i].label) << "</text>\n";
  }
  os << "<text x=\"" << format_number(kCanvas - 8.0) << "\" y=\"" << format_number(kCanvas - 8.0)
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">s [m] vs e [m]</text>\n";
  os << "</svg>\n";
}

}  // namespace rcbf
