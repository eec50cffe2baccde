#include "emac/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "emac/basis.hpp"

namespace emac {

namespace {

void require_velocity(const FEFunction& u, const char* who) {
  if (u.kind() != FieldKind::Velocity) throw std::invalid_argument(std::string(who) + ": expected a velocity field");
}

struct PointState {
  Vec2 position;
  Vec2 value;
  double div = 0.0;
};

// Sums w_q * f(state at q) over all cells with the degree-5 rule.
template <class F>
double integrate(const FEFunction& u, F&& f) {
  const TaylorHoodSpace& space = u.space();
  const CellQuadrature& cq = space.system_quadrature();
  const auto coeffs = u.coefficients();
  const int off = space.num_vel_nodes();
  double sum = 0.0;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& nodes = space.cell_nodes(c);
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(c, q);
      PointState s;
      s.position = space.map_to_physical(c, cq.rule.points[q]);
      for (int i = 0; i < 6; ++i) {
        const double cx = coeffs[nodes[i]];
        const double cy = coeffs[off + nodes[i]];
        s.value.x += cq.p2_values[q][i] * cx;
        s.value.y += cq.p2_values[q][i] * cy;
        s.div += cx * g[i].x + cy * g[i].y;
      }
      sum += cq.weight(c, q) * f(s);
    }
  }
  return sum;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("read_csv: line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, int line) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("read_csv: line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

double kinetic_energy(const FEFunction& u) {
  require_velocity(u, "kinetic_energy");
  return 0.5 * integrate(u, [](const PointState& s) { return dot(s.value, s.value); });
}

Vec2 linear_momentum(const FEFunction& u) {
  require_velocity(u, "linear_momentum");
  return {integrate(u, [](const PointState& s) { return s.value.x; }),
          integrate(u, [](const PointState& s) { return s.value.y; })};
}

double angular_momentum(const FEFunction& u) {
  require_velocity(u, "angular_momentum");
  return integrate(u, [](const PointState& s) { return s.value.x * s.position.y - s.value.y * s.position.x; });
}

double div_l2_norm(const FEFunction& u) {
  require_velocity(u, "div_l2_norm");
  return std::sqrt(integrate(u, [](const PointState& s) { return s.div * s.div; }));
}

double l2_error(const FEFunction& u, const TimeVelocityFunction& exact, double t) {
  require_velocity(u, "l2_error");
  const TaylorHoodSpace& space = u.space();
  const QuadratureRule rule = quadrature_rule(8);
  std::vector<std::array<double, 6>> phi;
  for (const auto& p : rule.points) phi.push_back(p2_basis_eval(p).values);
  const auto coeffs = u.coefficients();
  const int off = space.num_vel_nodes();
  double sum = 0.0;
  for (int c = 0; c < space.mesh().num_cells(); ++c) {
    const auto& nodes = space.cell_nodes(c);
    const double det = 2.0 * std::abs(space.mesh().cell_area(c));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec2 uh;
      for (int i = 0; i < 6; ++i) {
        uh.x += phi[q][i] * coeffs[nodes[i]];
        uh.y += phi[q][i] * coeffs[off + nodes[i]];
      }
      const Vec2 e = uh - exact(space.map_to_physical(c, rule.points[q]), t);
      sum += rule.weights[q] * det * dot(e, e);
    }
  }
  return std::sqrt(sum);
}

std::string format_csv_row(const DiagnosticsRecord& r) {
  std::string row = std::to_string(r.step);
  for (double v : {r.t, r.energy, r.momentum_x, r.momentum_y, r.ang_momentum, r.div_norm}) {
    row += ',';
    row += format_double(v);
  }
  row += ',';
  if (r.l2_error) row += format_double(*r.l2_error);
  row += ',' + std::to_string(r.newton_iters) + ',' + format_double(r.nonlinear_residual) + ',';
  row += r.diverged ? "true" : "false";
  return row;
}

void write_csv(std::span<const DiagnosticsRecord> records, std::ostream& out) {
  out << csv_header << '\n';
  for (const DiagnosticsRecord& r : records) out << format_csv_row(r) << '\n';
}

void write_csv(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  write_csv(records, out);
  out.flush();
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

std::vector<DiagnosticsRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header) throw std::runtime_error("read_csv: missing or unexpected header");
  std::vector<DiagnosticsRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw std::runtime_error("read_csv: line " + std::to_string(line_no) + ": expected 11 fields");
    DiagnosticsRecord r;
    r.step = parse_int(f[0], line_no);
    r.t = parse_double(f[1], line_no);
    r.energy = parse_double(f[2], line_no);
    r.momentum_x = parse_double(f[3], line_no);
    r.momentum_y = parse_double(f[4], line_no);
    r.ang_momentum = parse_double(f[5], line_no);
    r.div_norm = parse_double(f[6], line_no);
    if (!f[7].empty()) r.l2_error = parse_double(f[7], line_no);
    r.newton_iters = parse_int(f[8], line_no);
    r.nonlinear_residual = parse_double(f[9], line_no);
    if (f[10] == "true") {
      r.diverged = true;
    } else if (f[10] != "false") {
      throw std::runtime_error("read_csv: line " + std::to_string(line_no) + ": bad diverged flag");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DiagnosticsRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  return read_csv(in);
}

}  // namespace emac
