#include "datareach/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "datareach/io.hpp"
#include "json.hpp"

namespace datareach {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

bool boolean(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<long long>() != 0;
  fail(where, "expected true/false");
}

Vec vec(const json& j, const std::string& where, std::optional<std::size_t> size = std::nullopt) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  if (size && j.size() != *size) fail(where, "expected " + std::to_string(*size) + " entries");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where);
  return v;
}

Mat mat(const json& j, const std::string& where, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) fail(where, "expected " + std::to_string(rows) + " rows");
  Mat a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) a.row(static_cast<Eigen::Index>(i)) = vec(j[i], where, cols).transpose();
  return a;
}

Interval interval(const json& j, const std::string& where) {
  if (j.is_number()) return Interval::point(j.get<double>());
  if (!j.is_array() || j.size() != 2) fail(where, "expected [lo, hi]");
  const double lo = number(j[0], where);
  const double hi = number(j[1], where);
  if (!(lo <= hi)) fail(where, "interval has lo > hi");
  return Interval(lo, hi);
}

IntervalVector box(const json& j, const std::string& where, std::optional<std::size_t> size = std::nullopt) {
  if (!j.is_array() || j.empty()) fail(where, "expected an array of [lo, hi] pairs");
  if (size && j.size() != *size) fail(where, "expected " + std::to_string(*size) + " intervals");
  std::vector<Interval> v;
  for (const auto& e : j) v.push_back(interval(e, where));
  return IntervalVector(std::move(v));
}

IntervalMatrix ibox_matrix(const json& j, const std::string& where, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) fail(where, "expected " + std::to_string(rows) + " rows");
  IntervalMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(where, "expected " + std::to_string(cols) + " columns");
    for (std::size_t c = 0; c < cols; ++c) a(i, c) = interval(j[i][c], where);
  }
  return a;
}

std::vector<char> flags(const json& j, const std::string& where, std::size_t size) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<char> out;
  for (const auto& e : j) {
    if (e.is_array()) {
      for (const auto& x : e) out.push_back(boolean(x, where) ? 1 : 0);
    } else {
      out.push_back(boolean(e, where) ? 1 : 0);
    }
  }
  if (out.size() != size) fail(where, "expected " + std::to_string(size) + " flags");
  return out;
}

std::vector<std::size_t> coords(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array()) fail(where, "expected an array of state indices");
  std::vector<std::size_t> out;
  for (const auto& e : j) {
    const std::size_t c = count(e, where);
    if (c >= n) fail(where, "state index " + std::to_string(c) + " out of range");
    out.push_back(c);
  }
  return out;
}

EnclosureOptions enclosure(const json& j, const std::string& where) {
  check_keys(j, {"rel", "abs", "max_iterations", "strict"}, where);
  EnclosureOptions o;
  if (j.contains("rel")) o.rel_inflation = number(j["rel"], where + ".rel");
  if (j.contains("abs")) o.abs_inflation = number(j["abs"], where + ".abs");
  if (j.contains("max_iterations")) o.max_iterations = static_cast<int>(count(j["max_iterations"], where));
  if (j.contains("strict")) o.strict = boolean(j["strict"], where + ".strict");
  return o;
}

void parse_system(const json& j, Experiment& e) {
  check_keys(j, {"name", "n", "m", "X", "U"}, "system");
  if (!j.contains("name") || !j["name"].is_string()) fail("system.name", "expected unicycle, quadrotor or custom");
  e.system = j["name"].get<std::string>();
  if (e.system == "custom") {
    if (!j.contains("n") || !j.contains("m")) fail("system", "custom systems need n and m");
    e.n = count(j["n"], "system.n");
    e.m = count(j["m"], "system.m");
    if (e.n == 0 || e.m == 0) fail("system", "n and m must be positive");
    if (!j.contains("X")) fail("system", "custom systems need the state domain X");
    if (!j.contains("U")) fail("system", "custom systems need the control box U");
  } else {
    try {
      e.model = make_system(e.system);
    } catch (const std::invalid_argument& ex) {
      fail("system.name", ex.what());
    }
    e.n = e.model->n;
    e.m = e.model->m;
    e.X = e.model->X;
    e.U = e.model->U;
    e.side = e.model->side;
  }
  if (j.contains("X")) e.X = box(j["X"], "system.X", e.n);
  if (j.contains("U")) e.U = box(j["U"], "system.U", e.m);
  if (e.model) {
    e.model->X = e.X;
    e.model->U = e.U;
  }
}

void parse_side(const json& j, Experiment& e) {
  check_keys(j, {"preset", "lipschitz", "ranges", "gradients", "depends_on", "known", "M", "max_sweeps",
                 "invariance_tol"},
             "side_info");
  const std::size_t n = e.n, m = e.m;
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail("side_info.preset", "expected a string");
    const auto p = j["preset"].get<std::string>();
    if (e.system == "unicycle" && p.size() == 1) {
      try {
        e.side = unicycle_side_info(p[0]);
      } catch (const std::invalid_argument& ex) {
        fail("side_info.preset", ex.what());
      }
    } else if (p != "default" || !e.model) {
      fail("side_info.preset", "unknown preset '" + p + "' for system " + e.system);
    }
  } else if (!e.model || j.contains("lipschitz")) {
    e.side = SideInfo{};
  }
  if (j.contains("lipschitz")) {
    const auto& l = j["lipschitz"];
    check_keys(l, {"L_f", "L_G"}, "side_info.lipschitz");
    if (!l.contains("L_f") || !l.contains("L_G")) fail("side_info.lipschitz", "needs L_f and L_G");
    e.side.lipschitz.L_f = vec(l["L_f"], "side_info.lipschitz.L_f", n);
    e.side.lipschitz.L_G = mat(l["L_G"], "side_info.lipschitz.L_G", n, m);
  } else if (!e.model) {
    fail("side_info", "custom systems need lipschitz bounds");
  }
  if (j.contains("ranges")) {
    const auto& r = j["ranges"];
    check_keys(r, {"region", "f", "G"}, "side_info.ranges");
    VectorFieldBounds b;
    b.region = r.contains("region") ? box(r["region"], "side_info.ranges.region", n) : e.X;
    b.f_range = r.contains("f") ? box(r["f"], "side_info.ranges.f", n) : IntervalVector(n, Interval::symmetric(e.build.M));
    b.G_range = r.contains("G") ? ibox_matrix(r["G"], "side_info.ranges.G", n, m)
                                : IntervalMatrix(n, m, Interval::symmetric(e.build.M));
    e.side.ranges = b;
  }
  if (j.contains("gradients")) {
    const auto& g = j["gradients"];
    check_keys(g, {"jf", "jG"}, "side_info.gradients");
    GradientBounds gb;
    if (g.contains("jf")) gb.jf = ibox_matrix(g["jf"], "side_info.gradients.jf", n, n);
    if (g.contains("jG")) {
      const auto& t = g["jG"];
      const std::string where = "side_info.gradients.jG";
      if (!t.is_array() || t.size() != n) fail(where, "expected n blocks of m x n intervals");
      IntervalTensor3 T(n, m, n);
      for (std::size_t k = 0; k < n; ++k) {
        const IntervalMatrix blk = ibox_matrix(t[k], where, m, n);
        for (std::size_t l = 0; l < m; ++l) {
          for (std::size_t p = 0; p < n; ++p) T(k, l, p) = blk(l, p);
        }
      }
      gb.jG = T;
    }
    e.side.gradients = gb;
  }
  if (j.contains("depends_on")) {
    const auto& d = j["depends_on"];
    check_keys(d, {"f", "G"}, "side_info.depends_on");
    DependencyMask mask(n, m);
    if (d.contains("f")) mask.restrict_f(coords(d["f"], "side_info.depends_on.f", n));
    if (d.contains("G")) mask.restrict_G(coords(d["G"], "side_info.depends_on.G", n));
    e.side.mask = mask;
  }
  if (j.contains("known")) {
    const auto& k = j["known"];
    check_keys(k, {"A", "c", "G0", "f_exact", "G_exact"}, "side_info.known");
    const Mat A = k.contains("A") ? mat(k["A"], "side_info.known.A", n, n) : Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Vec c = k.contains("c") ? vec(k["c"], "side_info.known.c", n) : Vec::Zero(static_cast<Eigen::Index>(n));
    const Mat G0 = k.contains("G0") ? mat(k["G0"], "side_info.known.G0", n, m) : Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    auto fe = k.contains("f_exact") ? flags(k["f_exact"], "side_info.known.f_exact", n) : std::vector<char>(n, 0);
    auto ge = k.contains("G_exact") ? flags(k["G_exact"], "side_info.known.G_exact", n * m) : std::vector<char>(n * m, 0);
    e.side.known = KnownDynamics::affine(A, c, G0, std::move(fe), std::move(ge));
  }
  if (j.contains("M")) e.build.M = number(j["M"], "side_info.M");
  if (j.contains("max_sweeps")) e.build.max_sweeps = static_cast<int>(count(j["max_sweeps"], "side_info.max_sweeps"));
  if (j.contains("invariance_tol")) e.build.invariance_tol = number(j["invariance_tol"], "side_info.invariance_tol");
  try {
    e.side.validate(n, m);
  } catch (const std::exception& ex) {
    fail("side_info", ex.what());
  }
}

TrajectorySpec parse_trajectory(const json& j, const Experiment& e, const std::filesystem::path& base) {
  check_keys(j, {"csv", "x0", "length", "dt", "seed"}, "trajectory");
  TrajectorySpec t;
  if (j.contains("csv")) {
    if (!j["csv"].is_string()) fail("trajectory.csv", "expected a path");
    std::filesystem::path p = j["csv"].get<std::string>();
    t.csv = p.is_absolute() ? p : base / p;
  } else {
    if (!e.model) fail("trajectory", "custom systems need a csv trajectory");
    if (!j.contains("x0")) fail("trajectory", "generated trajectories need x0");
    t.x0 = vec(j["x0"], "trajectory.x0", e.n);
  }
  if (j.contains("length")) t.length = count(j["length"], "trajectory.length");
  if (j.contains("dt")) t.dt = number(j["dt"], "trajectory.dt");
  if (j.contains("seed")) t.seed = count(j["seed"], "trajectory.seed");
  if (t.length == 0) fail("trajectory.length", "must be at least 1");
  if (!(t.dt > 0.0)) fail("trajectory.dt", "must be positive");
  return t;
}

std::shared_ptr<const ControlSignalEnvelope> parse_signal(const json& j, const Experiment& e) {
  const std::string where = "reach.signal";
  if (!j.contains("type") || !j["type"].is_string()) fail(where, "needs type 'box' or 'cosine'");
  const auto type = j["type"].get<std::string>();
  if (type == "box") {
    check_keys(j, {"type", "box"}, where);
    return std::make_shared<PiecewiseConstantBox>(j.contains("box") ? box(j["box"], where + ".box", e.m) : e.U);
  }
  if (type == "cosine") {
    // u_l(t) = base_l + amp_l cos(freq_l (t - t0)) + a_l, |a_l| <= delta_l
    check_keys(j, {"type", "base", "amp", "freq", "delta", "t0"}, where);
    for (const char* k : {"base", "amp", "freq", "delta"}) {
      if (!j.contains(k)) fail(where, std::string("cosine signals need '") + k + "'");
    }
    const double t0 = j.contains("t0") ? number(j["t0"], where + ".t0") : 0.0;
    try {
      return std::make_shared<ShiftedCosineFamily>(vec(j["base"], where + ".base", e.m), vec(j["amp"], where + ".amp", e.m),
                                                   vec(j["freq"], where + ".freq", e.m),
                                                   vec(j["delta"], where + ".delta", e.m), t0);
    } catch (const std::invalid_argument& ex) {
      fail(where, ex.what());
    }
  }
  fail(where, "unknown signal type '" + type + "'");
}

ReachSpec parse_reach(const json& j, const Experiment& e) {
  check_keys(j, {"dt", "steps", "order", "signal", "start", "t_start", "enclosure"}, "reach");
  ReachSpec r;
  if (j.contains("dt")) r.dt = number(j["dt"], "reach.dt");
  if (j.contains("steps")) r.steps = count(j["steps"], "reach.steps");
  if (j.contains("order")) r.order = static_cast<int>(count(j["order"], "reach.order"));
  if (!(r.dt > 0.0)) fail("reach.dt", "must be positive");
  if (r.steps == 0) fail("reach.steps", "must be at least 1");
  if (r.order != 1 && r.order != 2) fail("reach.order", "must be 1 or 2");
  r.signal = j.contains("signal") ? parse_signal(j["signal"], e) : std::make_shared<PiecewiseConstantBox>(e.U);
  if (j.contains("start")) r.start = vec(j["start"], "reach.start", e.n);
  if (j.contains("t_start")) r.t_start = number(j["t_start"], "reach.t_start");
  if (j.contains("enclosure")) r.enclosure = enclosure(j["enclosure"], "reach.enclosure");
  return r;
}

QuadraticCost parse_cost(const json& j, const Experiment& e) {
  const std::string where = "control.cost";
  const auto n = static_cast<Eigen::Index>(e.n);
  const auto m = static_cast<Eigen::Index>(e.m);
  try {
    if (j.contains("tracking")) {
      check_keys(j, {"tracking"}, where);
      const auto& t = j["tracking"];
      check_keys(t, {"weights", "target"}, where + ".tracking");
      if (!t.contains("weights") || !t.contains("target")) fail(where + ".tracking", "needs weights and target");
      return QuadraticCost::tracking(vec(t["weights"], where + ".tracking.weights", e.n),
                                     vec(t["target"], where + ".tracking.target", e.n), e.m);
    }
    check_keys(j, {"Q", "R", "S", "q", "r", "constant"}, where);
    const Mat Q = j.contains("Q") ? mat(j["Q"], where + ".Q", e.n, e.n) : Mat::Zero(n, n);
    const Mat R = j.contains("R") ? mat(j["R"], where + ".R", e.m, e.m) : Mat::Zero(m, m);
    const Mat S = j.contains("S") ? mat(j["S"], where + ".S", e.n, e.m) : Mat::Zero(n, m);
    const Vec q = j.contains("q") ? vec(j["q"], where + ".q", e.n) : Vec::Zero(n);
    const Vec r = j.contains("r") ? vec(j["r"], where + ".r", e.m) : Vec::Zero(m);
    const double c = j.contains("constant") ? number(j["constant"], where + ".constant") : 0.0;
    return QuadraticCost(Q, R, S, q, r, c);
  } catch (const std::invalid_argument& ex) {
    fail(where, ex.what());
  }
}

ExperimentConfig parse_control(const json& j, const Experiment& e) {
  check_keys(j,
             {"dt", "horizon_steps", "init_traj_len", "seed", "x0", "relaxation", "cost", "stop", "stop_on_reach",
              "excitation_steps", "refine_every", "substeps", "warm_start", "enclosure"},
             "control");
  if (!e.model) fail("control", "closed-loop runs need a known benchmark system");
  ExperimentConfig c;
  c.side = e.side;
  c.M = e.build.M;
  if (j.contains("dt")) c.dt = number(j["dt"], "control.dt");
  if (j.contains("horizon_steps")) c.horizon_steps = count(j["horizon_steps"], "control.horizon_steps");
  if (j.contains("init_traj_len")) c.init_traj_len = count(j["init_traj_len"], "control.init_traj_len");
  if (j.contains("seed")) c.seed = count(j["seed"], "control.seed");
  if (!j.contains("x0")) fail("control", "needs x0");
  c.x0 = vec(j["x0"], "control.x0", e.n);
  if (j.contains("relaxation")) {
    if (!j["relaxation"].is_string()) fail("control.relaxation", "expected a string");
    try {
      c.relaxation = parse_relaxation(j["relaxation"].get<std::string>());
    } catch (const std::invalid_argument& ex) {
      fail("control.relaxation", ex.what());
    }
  }
  if (!j.contains("cost")) fail("control", "needs a cost");
  c.cost = parse_cost(j["cost"], e);
  if (j.contains("stop")) {
    const auto& s = j["stop"];
    check_keys(s, {"cost_threshold", "setpoint"}, "control.stop");
    if (s.contains("cost_threshold") == s.contains("setpoint")) {
      fail("control.stop", "give exactly one of cost_threshold or setpoint");
    }
    if (s.contains("cost_threshold")) {
      c.stop.kind = StopRule::Kind::CostThreshold;
      c.stop.threshold = number(s["cost_threshold"], "control.stop.cost_threshold");
    } else {
      const auto& sp = s["setpoint"];
      check_keys(sp, {"component", "target", "tol"}, "control.stop.setpoint");
      c.stop.kind = StopRule::Kind::Setpoint;
      if (!sp.contains("component") || !sp.contains("target")) fail("control.stop.setpoint", "needs component and target");
      c.stop.component = count(sp["component"], "control.stop.setpoint.component");
      if (c.stop.component >= e.n) fail("control.stop.setpoint.component", "out of range");
      c.stop.target = number(sp["target"], "control.stop.setpoint.target");
      if (sp.contains("tol")) c.stop.tol = number(sp["tol"], "control.stop.setpoint.tol");
    }
  }
  if (j.contains("stop_on_reach")) c.stop_on_reach = boolean(j["stop_on_reach"], "control.stop_on_reach");
  if (j.contains("excitation_steps")) c.excitation_steps = count(j["excitation_steps"], "control.excitation_steps");
  if (j.contains("refine_every")) c.refine_every = count(j["refine_every"], "control.refine_every");
  if (j.contains("substeps")) c.substeps = static_cast<int>(count(j["substeps"], "control.substeps"));
  if (j.contains("warm_start")) c.warm_start = boolean(j["warm_start"], "control.warm_start");
  if (j.contains("enclosure")) c.enclosure = enclosure(j["enclosure"], "control.enclosure");
  if (!(c.dt > 0.0)) fail("control.dt", "must be positive");
  if (c.horizon_steps == 0) fail("control.horizon_steps", "must be at least 1");
  if (c.init_traj_len == 0) fail("control.init_traj_len", "must be at least 1");
  if (c.substeps < 1) fail("control.substeps", "must be at least 1");
  return c;
}

}  // namespace

Experiment parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir,
                            std::optional<std::uint64_t> seed) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("invalid JSON: ") + ex.what());
  }
  check_keys(j, {"system", "side_info", "trajectory", "reach", "control"}, "config");
  if (!j.contains("system")) fail("config", "missing 'system' section");
  Experiment e;
  try {
    parse_system(j["system"], e);
    if (j.contains("side_info")) {
      parse_side(j["side_info"], e);
    } else if (!e.model) {
      fail("config", "custom systems need a 'side_info' section");
    }
    if (j.contains("trajectory")) e.trajectory = parse_trajectory(j["trajectory"], e, base_dir);
    if (j.contains("reach")) e.reach = parse_reach(j["reach"], e);
    if (j.contains("control")) e.control = parse_control(j["control"], e);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
  if (seed) {
    if (e.trajectory) e.trajectory->seed = *seed;
    if (e.control) e.control->seed = *seed;
  }
  return e;
}

Experiment load_experiment(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_experiment(ss.str(), path.parent_path(), seed);
}

Trajectory experiment_trajectory(const Experiment& e) {
  if (!e.trajectory) throw ConfigError("config: missing 'trajectory' section");
  const auto& t = *e.trajectory;
  if (t.csv) {
    Trajectory traj = read_trajectory_csv(*t.csv);
    if (traj.n() != e.n || traj.m() != e.m) {
      throw ConfigError(t.csv->string() + ": trajectory dimensions do not match the system");
    }
    return traj;
  }
  return gen_initial_trajectory(*e.model, t.x0, t.length, t.dt, t.seed);
}

ReachRun run_reach(const Experiment& e, const Trajectory& data) {
  if (!e.reach) throw ConfigError("config: missing 'reach' section");
  const auto& r = *e.reach;
  if (r.signal->dim() != e.m) throw ConfigError("reach.signal: dimension does not match the system");
  const KnowledgeBase kb = KnowledgeBase::build(data, e.side, e.X, e.build);
  ReachRun run;
  const DataPoint& last = data.back();
  double data_dt = e.trajectory ? e.trajectory->dt : 0.0;
  if (e.trajectory && e.trajectory->csv) data_dt = data.size() > 1 ? last.t - data[data.size() - 2].t : 0.0;
  if (r.start) {
    run.start = *r.start;
    run.t_start = r.t_start.value_or(last.t + data_dt);
  } else if (e.model && data_dt > 0.0) {
    run.start = rk4_step(*e.model, last.x, last.u, data_dt);
    run.t_start = r.t_start.value_or(last.t + data_dt);
  } else {
    run.start = last.x;
    run.t_start = r.t_start.value_or(last.t);
  }
  run.tube = datareach(kb, run.start, *r.signal, run.t_start, r.dt, r.steps, r.order, r.enclosure);
  return run;
}

}  // namespace datareach
