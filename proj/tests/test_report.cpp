#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "rcbf/report.hpp"
#include "rcbf/vehicle_lateral.hpp"

using namespace rcbf;

namespace {

Trajectory short_recbf_run() {
  VehicleScenarioConfig cfg = find_preset("fig3_recbf")->base;
  cfg.horizon = 0.05;
  return simulate(build_scenario(cfg));
}

}  // namespace

TEST(FormatNumber, Examples) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1.5), "1.5");
  EXPECT_EQ(format_number(-2.82), "-2.82");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(1e-12), "1e-12");
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const Trajectory traj = short_recbf_run();
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,e,edot,psi,psidot,s,h,hdot,u0,u,w,margin,altered");
  std::getline(in, line);
  // t, e, edot, psi, psidot, s, h, hdot, u0 at x0
  EXPECT_EQ(line.substr(0, line.find(",-2.82,")), "0,2,0,0,0,-20,395,-1120");
  std::size_t rows = 1;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12);
  }
  EXPECT_EQ(rows, traj.size());
}

TEST(TrajectoryCsv, ByteIdenticalAcrossRuns) {
  std::ostringstream a, b;
  write_trajectory_csv(a, short_recbf_run());
  write_trajectory_csv(b, short_recbf_run());
  EXPECT_EQ(a.str(), b.str());
}

TEST(TrajectoryCsv, RejectsOtherShapes) {
  Trajectory traj;
  traj.times = {0.0};
  traj.states = {Vector::Zero(2)};
  traj.us = {Vector::Zero(1)};
  std::ostringstream os;
  EXPECT_THROW(write_trajectory_csv(os, traj), std::invalid_argument);
}

TEST(Metrics, KeyValueLines) {
  TrajectoryMetrics m;
  m.min_h = 0.25;
  m.argmin_t = 1.5;
  m.min_distance = 3.1;
  m.violation = false;
  m.steps_altered = 7;
  m.steps_infeasible = 0;
  m.max_abs_u = 2.0;
  std::ostringstream os;
  write_metrics(os, "demo", m);
  EXPECT_EQ(os.str(),
            "scenario=demo\nmin_h=0.25\nargmin_t=1.5\nmin_distance=3.1\nviolation=false\n"
            "steps_altered=7\nsteps_infeasible=0\nmax_abs_u=2\n");
}

TEST(Svg, ContainsObstacleAndSeries) {
  const Trajectory traj = short_recbf_run();
  std::ostringstream os;
  write_trajectory_svg(os, {{"a <b>", &traj}, {"second", &traj}}, 3.0);
  const std::string svg = os.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<circle cx=\"250\" cy=\"250\" r=\"30\""), std::string::npos);
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  EXPECT_EQ(polylines, 2u);
  EXPECT_NE(svg.find("a &lt;b&gt;"), std::string::npos);
  EXPECT_NE(svg.find("</svg>\n"), std::string::npos);
}
