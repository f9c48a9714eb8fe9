#include "datareach/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace datareach {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return is;
}

void put(std::ostream& os, double v) { fmt::print(os, ",{:.17g}", v); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error("line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
  return v;
}

// Counts columns named prefix1, prefix2, ... starting at position pos.
std::size_t count_prefix(const std::vector<std::string>& head, std::size_t pos, const std::string& prefix) {
  std::size_t k = 0;
  while (pos + k < head.size() && head[pos + k] == prefix + std::to_string(k + 1)) ++k;
  return k;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (std::size_t k = 1; k <= traj.n(); ++k) os << ",x_" << k;
  for (std::size_t k = 1; k <= traj.n(); ++k) os << ",xdot_" << k;
  for (std::size_t l = 1; l <= traj.m(); ++l) os << ",u_" << l;
  os << '\n';
  for (const auto& p : traj) {
    fmt::print(os, "{:.17g}", p.t);
    for (double v : p.x) put(os, v);
    for (double v : p.xdot) put(os, v);
    for (double v : p.u) put(os, v);
    os << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto os = open_out(path);
  write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory CSV is empty");
  const auto head = split(line);
  if (head.empty() || head[0] != "t") throw std::runtime_error("line 1: first column must be 't'");
  const std::size_t n = count_prefix(head, 1, "x_");
  const std::size_t nd = count_prefix(head, 1 + n, "xdot_");
  const std::size_t m = count_prefix(head, 1 + 2 * n, "u_");
  if (n == 0 || nd != n || m == 0 || head.size() != 1 + 2 * n + m) {
    throw std::runtime_error("line 1: expected header t,x_1..x_n,xdot_1..xdot_n,u_1..u_m");
  }
  Trajectory traj(n, m);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != head.size()) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " + std::to_string(head.size()) +
                               " columns, found " + std::to_string(cells.size()));
    }
    DataPoint p;
    p.t = parse_double(cells[0], lineno);
    p.x.resize(static_cast<Eigen::Index>(n));
    p.xdot.resize(static_cast<Eigen::Index>(n));
    p.u.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < n; ++k) {
      p.x[static_cast<Eigen::Index>(k)] = parse_double(cells[1 + k], lineno);
      p.xdot[static_cast<Eigen::Index>(k)] = parse_double(cells[1 + n + k], lineno);
    }
    for (std::size_t l = 0; l < m; ++l) p.u[static_cast<Eigen::Index>(l)] = parse_double(cells[1 + 2 * n + l], lineno);
    try {
      traj.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (traj.empty()) throw std::runtime_error("trajectory CSV has no data rows");
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  try {
    return read_trajectory_csv(is);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_tube_csv(std::ostream& os, const ReachTube& tube) {
  const std::size_t n = tube.boxes.empty() ? 0 : tube.boxes.front().size();
  os << "t";
  for (std::size_t k = 1; k <= n; ++k) os << ",x" << k << "_lo,x" << k << "_hi";
  os << '\n';
  for (std::size_t i = 0; i < tube.boxes.size(); ++i) {
    fmt::print(os, "{:.17g}", tube.times[i]);
    for (const auto& iv : tube.boxes[i]) {
      put(os, iv.lo());
      put(os, iv.hi());
    }
    os << '\n';
  }
}

void write_tube_csv(const std::filesystem::path& path, const ReachTube& tube) {
  auto os = open_out(path);
  write_tube_csv(os, tube);
}

void write_decision_log(std::ostream& os, const ClosedLoopResult& res) {
  const std::size_t n = res.steps.empty() ? 0 : static_cast<std::size_t>(res.steps.front().x.size());
  const std::size_t m = res.steps.empty() ? 0 : static_cast<std::size_t>(res.steps.front().u.size());
  os << "t";
  for (std::size_t k = 1; k <= n; ++k) os << ",x_" << k;
  for (std::size_t l = 1; l <= m; ++l) os << ",u_" << l;
  os << ",predicted_cost,true_cost,subopt_bound,solve_time_us\n";
  for (const auto& r : res.steps) {
    fmt::print(os, "{:.17g}", r.t);
    for (double v : r.x) put(os, v);
    for (double v : r.u) put(os, v);
    put(os, r.predicted_cost);
    put(os, r.true_cost);
    put(os, r.bound);
    put(os, r.solve_time_us);
    os << '\n';
  }
}

void write_decision_log(const std::filesystem::path& path, const ClosedLoopResult& res) {
  auto os = open_out(path);
  write_decision_log(os, res);
}

Polyline state_path(const std::vector<Vec>& states, std::size_t ix, std::size_t iy) {
  Polyline p;
  for (const auto& x : states) {
    p.points.emplace_back(x[static_cast<Eigen::Index>(ix)], x[static_cast<Eigen::Index>(iy)]);
  }
  return p;
}

void write_svg(std::ostream& os, const std::vector<IntervalVector>& boxes, const std::vector<Polyline>& lines,
               std::size_t ix, std::size_t iy, const std::string& title) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& b : boxes) {
    if (std::max(ix, iy) >= b.size()) throw DimensionMismatch("svg projection index out of range");
    x0 = std::min(x0, b[ix].lo());
    x1 = std::max(x1, b[ix].hi());
    y0 = std::min(y0, b[iy].lo());
    y1 = std::max(y1, b[iy].hi());
  }
  for (const auto& l : lines) {
    for (auto [px, py] : l.points) {
      x0 = std::min(x0, px);
      x1 = std::max(x1, px);
      y0 = std::min(y0, py);
      y1 = std::max(y1, py);
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-9});
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;

  constexpr double W = 640.0;
  const double H = std::clamp(W * (y1 - y0) / (x1 - x0), 120.0, 1280.0);
  auto sx = [&](double v) { return (v - x0) / (x1 - x0) * W; };
  auto sy = [&](double v) { return H - (v - y0) / (y1 - y0) * H; };

  fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" ", W, H + 24);
  fmt::print(os, "viewBox=\"0 -24 {:.0f} {:.0f}\">\n", W, H + 24);
  fmt::print(os, "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\" stroke=\"#888\"/>\n", W, H);
  if (!title.empty()) fmt::print(os, "<text x=\"4\" y=\"-8\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n", title);
  fmt::print(os, "<text x=\"{:.0f}\" y=\"-8\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
                 "x{} [{:.3g}, {:.3g}]  x{} [{:.3g}, {:.3g}]</text>\n",
             W - 4, ix + 1, x0, x1, iy + 1, y0, y1);
  for (const auto& b : boxes) {
    fmt::print(os,
               "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"#ff7f0e\" "
               "fill-opacity=\"0.15\" stroke=\"#d62728\" stroke-width=\"0.5\"/>\n",
               sx(b[ix].lo()), sy(b[iy].hi()), sx(b[ix].hi()) - sx(b[ix].lo()), sy(b[iy].lo()) - sy(b[iy].hi()));
  }
  for (const auto& l : lines) {
    os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.2\" points=\"";
    for (auto [px, py] : l.points) fmt::print(os, "{:.3f},{:.3f} ", sx(px), sy(py));
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_svg(const std::filesystem::path& path, const std::vector<IntervalVector>& boxes,
               const std::vector<Polyline>& lines, std::size_t ix, std::size_t iy, const std::string& title) {
  auto os = open_out(path);
  write_svg(os, boxes, lines, ix, iy, title);
}

}  // namespace datareach
