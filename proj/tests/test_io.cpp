#include <filesystem>
#include <fstream>
#include <sstream>

#include "datareach/config.hpp"
#include "datareach/io.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace datareach;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DATAREACH_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("datareach_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::size_t count_lines(const std::string& s) {
  std::size_t k = 0;
  for (char c : s) k += c == '\n';
  return k;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t k = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++k;
  return k;
}

std::string what_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

Trajectory sample_trajectory(std::uint64_t seed = 4) {
  return gen_initial_trajectory(unicycle(), testing::unicycle_x0(), 12, 0.1, seed);
}

const char* kCustom = R"({
  "system": { "name": "custom", "n": 1, "m": 1, "X": [[-5, 5]], "U": [[-1, 1]] },
  "side_info": { "lipschitz": { "L_f": [1.0], "L_G": [[0.0]] } },
  "trajectory": { "csv": "data.csv" },
  "reach": { "dt": 0.05, "steps": 10, "order": 1 }
})";

}  // namespace

TEST_CASE("trajectory CSV round trip is lossless") {
  const Trajectory a = sample_trajectory();
  std::stringstream ss;
  write_trajectory_csv(ss, a);
  const std::string text = ss.str();
  CHECK(text.substr(0, text.find('\n')) == "t,x_1,x_2,x_3,xdot_1,xdot_2,xdot_3,u_1,u_2");
  CHECK(count_lines(text) == a.size() + 1);

  const Trajectory b = read_trajectory_csv(ss);
  REQUIRE(b.size() == a.size());
  CHECK(b.n() == 3);
  CHECK(b.m() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].t == a[i].t);
    CHECK(b[i].x == a[i].x);
    CHECK(b[i].xdot == a[i].xdot);
    CHECK(b[i].u == a[i].u);
  }
}

TEST_CASE("trajectory CSV through a file") {
  const fs::path d = scratch("file");
  const Trajectory a = sample_trajectory(9);
  write_trajectory_csv(d / "nested" / "traj.csv", a);
  const Trajectory b = read_trajectory_csv(d / "nested" / "traj.csv");
  CHECK(b.size() == a.size());
  CHECK(b.back().x == a.back().x);

  const std::string msg = what_of([&] { read_trajectory_csv(d / "missing.csv"); });
  CHECK(msg.find("missing.csv") != std::string::npos);
}

TEST_CASE("malformed trajectory CSV reports the line") {
  auto err = [](const std::string& text) {
    std::istringstream is(text);
    return what_of([&] { read_trajectory_csv(is); });
  };
  const std::string head = "t,x_1,xdot_1,u_1\n";
  CHECK(err("").find("empty") != std::string::npos);
  CHECK(err("time,x_1,xdot_1,u_1\n0,1,2,3\n").find("line 1") != std::string::npos);
  CHECK(err("t,x_1,xdot_1\n0,1,2\n").find("line 1") != std::string::npos);
  CHECK(err("t,x_1,xdot_1,xdot_2,u_1\n").find("line 1") != std::string::npos);
  CHECK(err(head).find("no data rows") != std::string::npos);
  CHECK(err(head + "0,1,2,3\n0.1,1,2\n").find("line 3") != std::string::npos);
  CHECK(err(head + "0,1,2,3\n0.1,1,abc,3\n").find("line 3: 'abc'") != std::string::npos);
  CHECK(err(head + "0,1,2,3\n0.1,1,2,3,\n").find("line 3") != std::string::npos);
  // time must strictly increase
  CHECK(err(head + "0,1,2,3\n\n0,1,2,3\n").find("line 4") != std::string::npos);
  CHECK(err(head + "0,1,2,3\n0.1,nan,2,3\n").find("line 3") != std::string::npos);

  std::istringstream ok(head + " 0 , 1 ,2,3\r\n\n0.5,1,2,3\n");
  const Trajectory t = read_trajectory_csv(ok);
  CHECK(t.size() == 2);
  CHECK(t[1].t == 0.5);
}

TEST_CASE("tube CSV layout") {
  ReachTube tube;
  tube.times = {0.0, 0.25};
  tube.boxes = {IntervalVector{{-1, 1}, {0, 0.5}}, IntervalVector{{-2, 1.5}, {0.125, 3}}};
  std::stringstream ss;
  write_tube_csv(ss, tube);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,x1_lo,x1_hi,x2_lo,x2_hi");
  std::getline(ss, line);
  CHECK(line == "0,-1,1,0,0.5");
  std::getline(ss, line);
  CHECK(line == "0.25,-2,1.5,0.125,3");
  CHECK_FALSE(std::getline(ss, line));
}

TEST_CASE("decision log layout") {
  ClosedLoopResult res;
  StepRecord r;
  r.t = 0.25;
  r.x = testing::vec({1, 2});
  r.u = testing::vec({-0.5});
  r.predicted_cost = 3;
  r.true_cost = 3.5;
  r.bound = 0.75;
  r.solve_time_us = 12;
  res.steps.push_back(r);
  std::stringstream ss;
  write_decision_log(ss, res);
  CHECK(ss.str() == "t,x_1,x_2,u_1,predicted_cost,true_cost,subopt_bound,solve_time_us\n0.25,1,2,-0.5,3,3.5,0.75,12\n");
}

TEST_CASE("svg output") {
  const std::vector<IntervalVector> boxes = {IntervalVector{{0, 1}, {0, 1}, {5, 6}},
                                             IntervalVector{{1, 2}, {0.5, 3}, {5, 6}}};
  const Polyline path = state_path({testing::vec({0, 0, 0}), testing::vec({1, 2, 0}), testing::vec({2, 1, 0})});
  CHECK(path.points.size() == 3);
  CHECK(path.points[1] == std::pair<double, double>{1.0, 2.0});

  std::stringstream ss;
  write_svg(ss, boxes, {path}, 0, 1, "tube");
  const std::string s = ss.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(count_of(s, "<rect") == boxes.size() + 1);
  CHECK(count_of(s, "<polyline") == 1);
  CHECK(s.find(">tube<") != std::string::npos);
  CHECK_THROWS_AS(write_svg(ss, boxes, {}, 0, 3), DimensionMismatch);

  std::stringstream empty;
  CHECK_NOTHROW(write_svg(empty, {}, {}));
  CHECK(count_of(empty.str(), "<rect") == 1);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"unicycle_fig3_a.json", "unicycle_fig3_b.json", "unicycle_fig3_c.json",
                           "unicycle_control.json", "quadrotor_vx.json", "quadrotor_py.json"}) {
    CAPTURE(name);
    const Experiment e = load_experiment(kConfigs / name);
    CHECK(e.model.has_value());
    CHECK(e.X.size() == e.n);
    CHECK(e.U.size() == e.m);
  }
  const Experiment b = load_experiment(kConfigs / "unicycle_fig3_b.json");
  CHECK(b.system == "unicycle");
  REQUIRE(b.reach);
  CHECK(b.reach->steps == 200);
  CHECK(b.reach->dt == 0.02);
  CHECK(b.reach->order == 2);
  CHECK(b.reach->signal->dim() == 2);
  REQUIRE(b.trajectory);
  CHECK(b.trajectory->length == 15);
  CHECK_FALSE(b.side.known.has_value());
  CHECK(load_experiment(kConfigs / "unicycle_fig3_c.json").side.known.has_value());
}

TEST_CASE("seed override") {
  const Experiment a = load_experiment(kConfigs / "unicycle_fig3_b.json");
  const Experiment b = load_experiment(kConfigs / "unicycle_fig3_b.json", 7);
  CHECK(a.trajectory->seed == 0);
  CHECK(b.trajectory->seed == 7);
  const Experiment c = load_experiment(kConfigs / "unicycle_control.json", 3);
  REQUIRE(c.control);
  CHECK(c.control->seed == 3);

  const Trajectory ta = experiment_trajectory(a), tb = experiment_trajectory(b);
  CHECK(ta[0].x == tb[0].x);
  CHECK(ta[0].u != tb[0].u);
}

TEST_CASE("config errors name the problem") {
  auto err = [](const std::string& text) { return what_of([&] { parse_experiment(text); }); };
  CHECK(what_of([] { load_experiment("/nonexistent/dir/x.json"); }).find("/nonexistent/dir/x.json") !=
        std::string::npos);
  CHECK_THROWS_AS(load_experiment("/nonexistent/dir/x.json"), ConfigError);
  CHECK(err("{").find("invalid JSON") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "extra": 1})").find("'extra'") != std::string::npos);
  CHECK(err(R"({"reach": {}})").find("missing 'system'") != std::string::npos);
  CHECK(err(R"({"system": {"name": "bicycle"}})").find("system.name") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "side_info": {"preset": "z"}})").find("side_info.preset") !=
        std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "reach": {"order": 3}})").find("reach.order") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "reach": {"dt": -1}})").find("reach.dt") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "reach": {"signal": {"type": "sine"}}})").find("sine") !=
        std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "trajectory": {"x0": [0, 0]}})").find("trajectory.x0") !=
        std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "trajectory": {"x0": [0, 0, 0], "lenght": 3}})")
            .find("'lenght'") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "system2": {}})").find("'system2'") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "control": {"x0": [0, 0, 0]}})").find("needs a cost") !=
        std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle"}, "control": {"x0": [0, 0, 0], "relaxation": "lazy",
                "cost": {"tracking": {"weights": [1, 1, 0], "target": [0, 0, 0]}}}})")
            .find("control.relaxation") != std::string::npos);
  CHECK(err(R"({"system": {"name": "custom", "n": 1, "m": 1, "X": [[-1, 1]], "U": [[-1, 1]]}})")
            .find("side_info") != std::string::npos);
  CHECK(err(R"({"system": {"name": "custom", "n": 1, "m": 1, "X": [[-1, 1]], "U": [[-1, 1]]},
                "side_info": {"lipschitz": {"L_f": [1], "L_G": [[0]]}}, "control": {}})")
            .find("known benchmark") != std::string::npos);
  CHECK(err(R"({"system": {"name": "unicycle", "X": [[1, 0], [0, 1], [0, 1]]}})").find("lo > hi") !=
        std::string::npos);
}

TEST_CASE("custom system with a csv trajectory") {
  const fs::path d = scratch("custom");
  {
    std::ofstream os(d / "cfg.json");
    os << kCustom;
    // xdot = -x + u, u = 0
    std::ofstream data(d / "data.csv");
    data << "t,x_1,xdot_1,u_1\n0,1,-1,0\n0.1,0.5,-0.5,0\n0.2,0,0,0.5\n";
  }
  const Experiment e = load_experiment(d / "cfg.json");
  CHECK_FALSE(e.model.has_value());
  REQUIRE(e.trajectory);
  CHECK(*e.trajectory->csv == d / "data.csv");
  const Trajectory t = experiment_trajectory(e);
  CHECK(t.size() == 3);
  const ReachRun run = run_reach(e, t);
  CHECK(run.start == t.back().x);
  CHECK(run.t_start == 0.2);
  CHECK(run.tube.boxes.size() == 10);
  for (const auto& b : run.tube.boxes) CHECK(b.subset_of(e.X));

  // dimension mismatch between csv and system
  std::ofstream(d / "data.csv") << "t,x_1,x_2,xdot_1,xdot_2,u_1\n0,1,1,0,0,0\n";
  CHECK(what_of([&] { experiment_trajectory(e); }).find("dimensions") != std::string::npos);
}

TEST_CASE("configured reach produces the full tube") {
  const Experiment e = load_experiment(kConfigs / "unicycle_fig3_b.json");
  const Trajectory data = experiment_trajectory(e);
  CHECK(data.size() == 15);
  const ReachRun run = run_reach(e, data);
  CHECK(run.t_start == doctest::Approx(1.5).epsilon(1e-12));
  REQUIRE(run.tube.boxes.size() == 200);
  CHECK(run.tube.times.size() == 200);
  CHECK(run.tube.times.front() == doctest::Approx(1.52).epsilon(1e-12));
  for (const auto& b : run.tube.boxes) CHECK(b.subset_of(e.X));

  std::stringstream ss;
  write_tube_csv(ss, run.tube);
  CHECK(count_lines(ss.str()) == 201);
}
