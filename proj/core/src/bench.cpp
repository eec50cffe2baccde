#include "emac/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "emac/forms.hpp"

namespace emac {

double gresho_c2() { return 6.0 - 4.0 * std::log(0.4); }
double gresho_c1() { return gresho_c2() - 4.0 + 4.0 * std::log(0.2); }

ExactValue gresho_exact(double x, double y) {
  const double r = std::hypot(x, y);
  if (r <= 0.2) return {{-5.0 * y, 5.0 * x}, 12.5 * r * r + gresho_c1()};
  if (r <= 0.4) {
    return {{-2.0 * y / r + 5.0 * y, 2.0 * x / r - 5.0 * x}, 12.5 * r * r - 20.0 * r + 4.0 * std::log(r) + gresho_c2()};
  }
  return {{0.0, 0.0}, 0.0};
}

ExactValue lattice_exact(double x, double y, double t, double nu) {
  using std::numbers::pi;
  const double sx = std::sin(2 * pi * x), cx = std::cos(2 * pi * x);
  const double sy = std::sin(2 * pi * y), cy = std::cos(2 * pi * y);
  const double decay = std::exp(-8.0 * nu * pi * pi * t);
  const double q = -0.5 * (sx * sx + cy * cy);
  return {{sx * sy * decay, cx * cy * decay}, q * decay * decay};
}

BenchmarkProblem gresho_problem() {
  BenchmarkProblem p;
  p.name = "gresho";
  p.domain = {-0.5, 0.5, -0.5, 0.5};
  p.velocity = [](const Vec2& x, double) { return gresho_exact(x.x, x.y).velocity; };
  p.pressure = [](const Vec2& x, double) { return gresho_exact(x.x, x.y).pressure; };
  p.exact_trace_boundary = false;
  p.nu = 0.0;
  p.default_nx = 48;
  return p;
}

BenchmarkProblem lattice_problem(double nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("lattice_problem: viscosity must be non-negative");
  BenchmarkProblem p;
  p.name = "lattice";
  p.domain = {0.0, 1.0, 0.0, 1.0};
  p.velocity = [nu](const Vec2& x, double t) { return lattice_exact(x.x, x.y, t, nu).velocity; };
  p.pressure = [nu](const Vec2& x, double t) { return lattice_exact(x.x, x.y, t, nu).pressure; };
  p.exact_trace_boundary = true;
  p.nu = nu;
  p.default_nx = 32;
  return p;
}

double default_viscosity(const std::string& name) {
  if (name == "gresho") return 0.0;
  if (name == "lattice") return 1e-7;
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

BenchmarkProblem make_benchmark(const std::string& name, double nu) {
  if (name == "gresho") {
    BenchmarkProblem p = gresho_problem();
    p.nu = nu;
    return p;
  }
  if (name == "lattice") return lattice_problem(nu);
  throw std::invalid_argument("unknown benchmark '" + name + "'");
}

SimulationProblem make_simulation_problem(const BenchmarkProblem& problem, int nx, InitialCondition initial) {
  auto mesh = std::make_shared<const TriMesh>(build_uniform_tri_mesh(nx, nx, problem.domain));
  SimulationProblem out;
  out.space = make_space(std::move(mesh));
  const TimeVelocityFunction velocity = problem.velocity;
  out.initial_velocity = [velocity](const Vec2& x) { return velocity(x, 0.0); };
  out.exact_velocity = velocity;
  out.data.forcing = problem.forcing;
  if (problem.exact_trace_boundary) out.data.boundary = velocity;
  out.initial = initial;
  return out;
}

// ---------------------------------------------------------------------------
// Identity battery

namespace {

struct PointJet {
  double value = 0.0;  // |u|
  double grad = 0.0;   // Frobenius norm of grad u
};

std::vector<PointJet> tabulate_jets(const FEFunction& u) {
  const TaylorHoodSpace& space = u.space();
  const CellQuadrature& cq = space.system_quadrature();
  const int off = space.num_vel_nodes();
  const auto c = u.coefficients();
  std::vector<PointJet> out;
  out.reserve(space.mesh().num_cells() * cq.num_points());
  for (int cell = 0; cell < space.mesh().num_cells(); ++cell) {
    const auto& nodes = space.cell_nodes(cell);
    for (std::size_t q = 0; q < cq.num_points(); ++q) {
      const Vec2* g = cq.gradients(cell, q);
      Vec2 val;
      Mat2 grad;
      for (int i = 0; i < 6; ++i) {
        const double cx = c[nodes[i]], cy = c[off + nodes[i]];
        val += cq.p2_values[q][i] * Vec2{cx, cy};
        grad = grad + Mat2{cx * g[i].x, cx * g[i].y, cy * g[i].x, cy * g[i].y};
      }
      out.push_back({norm(val), std::sqrt(grad.xx * grad.xx + grad.xy * grad.xy + grad.yx * grad.yx + grad.yy * grad.yy)});
    }
  }
  return out;
}

// Integral of |a||grad b||c| + |grad a||b||c| + |a||b||grad c|: bounds every
// trilinear term built from a, b, c, and sets the scale of its rounding error.
double magnitude(const FEFunction& a, const FEFunction& b, const FEFunction& c) {
  const TaylorHoodSpace& space = a.space();
  const CellQuadrature& cq = space.system_quadrature();
  const auto ja = tabulate_jets(a), jb = tabulate_jets(b), jc = tabulate_jets(c);
  double sum = 0.0;
  std::size_t k = 0;
  for (int cell = 0; cell < space.mesh().num_cells(); ++cell) {
    for (std::size_t q = 0; q < cq.num_points(); ++q, ++k) {
      sum += cq.weight(cell, q) * (ja[k].value * jb[k].grad * jc[k].value + ja[k].grad * jb[k].value * jc[k].value +
                                   ja[k].value * jb[k].value * jc[k].grad);
    }
  }
  return sum;
}

// |sum| / max(sum |.|, scale), zero when every term vanishes.
double relative_violation(std::span<const double> terms, double scale = 0.0) {
  double sum = 0.0;
  double abs_sum = 0.0;
  for (double t : terms) {
    sum += t;
    abs_sum += std::abs(t);
  }
  scale = std::max(scale, abs_sum);
  return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

// Same measure for sum_i a_i b_i.
double dot_violation(std::span<const double> a, std::span<const double> b, double scale = 0.0) {
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) terms[i] = a[i] * b[i];
  return relative_violation(terms, scale);
}

// Entrywise identity sum_k v_k = 0 for vectors: max |sum| / max sum |.|.
double vector_violation(std::initializer_list<std::span<const double>> parts) {
  const std::size_t n = parts.begin()->size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    double a = 0.0;
    for (const auto& p : parts) {
      s += p[i];
      a += std::abs(p[i]);
    }
    num = std::max(num, std::abs(s));
    den = std::max(den, a);
  }
  return den > 0.0 ? num / den : 0.0;
}

FEFunction draw(const SpacePtr& space, std::mt19937_64& rng, std::span<const int> zero) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> c(space->num_vel_dofs());
  for (double& v : c) v = dist(rng);
  for (int d : zero) c[d] = 0.0;
  return FEFunction(space, FieldKind::Velocity, std::move(c));
}

std::vector<double> scaled_sum(double a, std::span<const double> x, double b, std::span<const double> y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

}  // namespace

FEFunction random_velocity(const SpacePtr& space, std::uint64_t seed, std::span<const int> zero_dofs) {
  std::mt19937_64 rng(seed);
  return draw(space, rng, zero_dofs);
}

bool IdentityReport::passed(double tol) const {
  return std::all_of(results.begin(), results.end(), [tol](const IdentityResult& r) { return r.max_violation <= tol; });
}

IdentityReport verify_identities(const IdentityOptions& opt) {
  if (opt.nx < 1 || opt.trials < 1) throw std::invalid_argument("verify_identities: nx and trials must be positive");
  auto mesh = std::make_shared<const TriMesh>(build_uniform_tri_mesh(opt.nx, opt.nx, {0.0, 1.0, 0.0, 1.0}));
  const SpacePtr space = make_space(mesh);
  const std::vector<int> boundary = boundary_dofs(*mesh, *space);
  const std::vector<int> strip = boundary_strip_dofs(*space);
  const std::vector<int> none;
  const std::span<const int> zero_boundary = opt.zero_boundary ? std::span<const int>(boundary) : none;
  const std::span<const int> zero_strip = opt.zero_boundary ? std::span<const int>(strip) : none;

  // Interior-restricted test functions: interpolants with boundary DOFs zeroed.
  auto restricted = [&](const VelocityFunction& f) {
    FEFunction g = interpolate_velocity(space, f);
    for (int d : boundary) g.coefficients()[d] = 0.0;
    return g;
  };
  const FEFunction e1 = restricted([](const Vec2&) { return Vec2{1.0, 0.0}; });
  const FEFunction e2 = restricted([](const Vec2&) { return Vec2{0.0, 1.0}; });
  const FEFunction phi = restricted([](const Vec2& x) { return Vec2{x.y, -x.x}; });

  const std::vector<std::string> names = {"vecid1",          "vecid2",          "vecid3",
                                          "vecid6b",         "vecid6c",         "vecid7",
                                          "econs",           "momentum_tilde",  "angular_tilde",
                                          "newton_momentum", "newton_angular",  "skew_energy"};
  std::vector<double> worst(names.size(), 0.0);
  auto record = [&](std::size_t k, double v) { worst[k] = std::max(worst[k], v); };

  std::mt19937_64 rng(opt.seed);
  for (int trial = 0; trial < opt.trials; ++trial) {
    const FEFunction u0 = draw(space, rng, zero_boundary);
    const FEFunction v = draw(space, rng, none);
    const FEFunction w = draw(space, rng, none);
    const FEFunction ui = draw(space, rng, zero_strip);
    const FEFunction us = draw(space, rng, zero_strip);
    const FEFunction any = draw(space, rng, none);

    const double b_uvw = trilinear_b(u0, v, w);
    const double m_uvw = magnitude(u0, v, w);
    record(0, relative_violation(std::vector<double>{b_uvw, trilinear_b(u0, w, v), div_product(u0, v, w)}, m_uvw));
    record(1, relative_violation(std::vector<double>{trilinear_b(u0, w, w), 0.5 * div_product(u0, w, w)},
                                 magnitude(u0, w, w)));

    const double b_any = trilinear_b(any, v, w);
    const double via_c = bilinear(convection_matrix(any), w.coefficients(), v.coefficients());
    const double via_t = bilinear(grad_transpose_matrix(v), any.coefficients(), w.coefficients());
    const double m_any = magnitude(any, v, w);
    record(2, std::max(relative_violation(std::vector<double>{b_any, -via_c}, m_any),
                       relative_violation(std::vector<double>{b_any, -via_t}, m_any)));

    const std::vector<double> conv = nl_residual(Formulation::Conv, any);
    const std::vector<double> cons = nl_residual(Formulation::Cons, any);
    const std::vector<double> rot = nl_residual(Formulation::Rot, any);
    const std::vector<double> emac = nl_residual(Formulation::Emac, any);
    const std::vector<double> neg_rot = scaled_sum(-1.0, rot, 0.0, rot);
    const std::vector<double> neg_emac = scaled_sum(-1.0, emac, 0.0, emac);
    record(3, vector_violation({conv, cons, neg_rot, neg_emac}));
    const double m_self = magnitude(any, any, any);
    record(4, relative_violation(std::vector<double>{deformation_product(any, any, any), -trilinear_b(any, any, any)},
                                 m_self));
    // (grad u) u = 2 D(u) u - (grad u)^T u, with (div u) u = CONS - CONV.
    const std::vector<double> gtu = grad_transpose_matrix(any) * any.coefficients();
    const std::vector<double> div_term = scaled_sum(1.0, cons, -1.0, conv);
    record(5, vector_violation({conv, neg_emac, div_term, gtu}));

    const std::vector<double> emac_u0 = nl_residual(Formulation::Emac, u0);
    const double m_u0 = 3.0 * magnitude(u0, u0, u0);
    record(6, std::max(relative_violation(std::vector<double>{2.0 * deformation_product(u0, u0, u0),
                                                              div_product(u0, u0, u0)},
                                          m_u0),
                       dot_violation(emac_u0, u0.coefficients(), m_u0)));

    const std::vector<double> emac_ui = nl_residual(Formulation::Emac, ui);
    record(7, std::max(dot_violation(emac_ui, e1.coefficients(), 3.0 * magnitude(ui, ui, e1)),
                       dot_violation(emac_ui, e2.coefficients(), 3.0 * magnitude(ui, ui, e2))));
    record(8, dot_violation(emac_ui, phi.coefficients(), 3.0 * magnitude(ui, ui, phi)));

    // Linearized EMAC term of one Newton step: J(u*) u_mid - NL(u*).
    const std::vector<double> lin =
        scaled_sum(1.0, nl_jacobian(Formulation::Emac, us) * ui.coefficients(), -1.0, emac_newton_rhs_correction(us));
    auto lin_scale = [&](const FEFunction& test) { return 6.0 * magnitude(us, ui, test) + 3.0 * magnitude(us, us, test); };
    record(9, std::max(dot_violation(lin, e1.coefficients(), lin_scale(e1)),
                       dot_violation(lin, e2.coefficients(), lin_scale(e2))));
    record(10, dot_violation(lin, phi.coefficients(), lin_scale(phi)));

    const std::vector<double> lw = skew_linearized_matrix(us) * any.coefficients();
    record(11, dot_violation(lw, any.coefficients(), 2.0 * magnitude(any, any, us)));
  }

  IdentityReport report;
  for (std::size_t k = 0; k < names.size(); ++k) report.results.push_back({names[k], opt.trials, worst[k]});
  return report;
}

void write_identity_csv(const IdentityReport& report, double tol, std::ostream& out) {
  out << "identity,trials,max_relative_violation,passed\n";
  char buf[64];
  for (const IdentityResult& r : report.results) {
    std::snprintf(buf, sizeof buf, "%.6e", r.max_violation);
    out << r.name << ',' << r.trials << ',' << buf << ',' << (r.max_violation <= tol ? "true" : "false") << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG and VTK output

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

}  // namespace

void write_svg(std::span<const Chart> charts, std::ostream& out) {
  const double width = 720, panel = 300, left = 90, right = 170, top = 40, bottom = 50;
  const double height = std::max<double>(1, charts.size()) * panel;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const Chart& chart = charts[k];
    const double y0 = k * panel;
    const double px0 = left, px1 = width - right, py0 = y0 + top, py1 = y0 + panel - bottom;

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const PlotSeries& s : chart.series) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
    if (!(xmin <= xmax)) xmin = 0.0, xmax = 1.0;
    if (!(ymin <= ymax)) ymin = 0.0, ymax = 1.0;
    if (xmax - xmin <= 0.0) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin <= 1e-14 * std::max(1.0, std::abs(ymax))) {
      const double pad = std::max(1e-12, 0.5 * std::abs(ymax));
      ymin -= pad;
      ymax += pad;
    }
    auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    auto sy = [&](double y) { return py1 - (y - ymin) / (ymax - ymin) * (py1 - py0); };

    out << "<g class=\"chart\">\n";
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << y0 + 22 << "\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(chart.title) << "</text>\n";
    out << "<rect x=\"" << px0 << "\" y=\"" << py0 << "\" width=\"" << px1 - px0 << "\" height=\"" << py1 - py0
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = xmin + i * (xmax - xmin) / 4, yv = ymin + i * (ymax - ymin) / 4;
      out << "<text x=\"" << sx(xv) << "\" y=\"" << py1 + 16 << "\" text-anchor=\"middle\">" << tick_label(xv)
          << "</text>\n";
      out << "<text x=\"" << px0 - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << tick_label(yv)
          << "</text>\n";
    }
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << py1 + 36 << "\" text-anchor=\"middle\">"
        << escape_xml(chart.x_label) << "</text>\n";
    out << "<text x=\"" << 16 << "\" y=\"" << (py0 + py1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (py0 + py1) / 2 << ")\">" << escape_xml(chart.y_label) << "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
      const PlotSeries& series = chart.series[s];
      const char* color = palette[s % std::size(palette)];
      out << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < std::min(series.x.size(), series.y.size()); ++i) {
        if (!std::isfinite(series.x[i]) || !std::isfinite(series.y[i])) continue;
        out << sx(series.x[i]) << ',' << sy(series.y[i]) << ' ';
      }
      out << "\"/>\n";
      const double ly = py0 + 14 + 18 * s;
      out << "<line x1=\"" << px1 + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << px1 + 36 << "\" y2=\"" << ly - 4
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text class=\"legend\" x=\"" << px1 + 42 << "\" y=\"" << ly << "\">" << escape_xml(series.label)
          << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void svg_plot(std::span<const Chart> charts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("svg_plot: cannot open " + path.string());
  write_svg(charts, out);
  if (!out) throw std::runtime_error("svg_plot: write failed for " + path.string());
}

std::vector<Chart> diagnostics_charts(std::span<const std::pair<std::string, std::vector<DiagnosticsRecord>>> runs) {
  struct Quantity {
    const char* title;
    double (*get)(const DiagnosticsRecord&);
  };
  const Quantity quantities[] = {
      {"energy", [](const DiagnosticsRecord& r) { return r.energy; }},
      {"momentum_x", [](const DiagnosticsRecord& r) { return r.momentum_x; }},
      {"momentum_y", [](const DiagnosticsRecord& r) { return r.momentum_y; }},
      {"ang_momentum", [](const DiagnosticsRecord& r) { return r.ang_momentum; }},
      {"l2_error", [](const DiagnosticsRecord& r) { return r.l2_error.value_or(NAN); }},
  };
  std::vector<Chart> charts;
  for (const Quantity& q : quantities) {
    Chart chart{q.title, "t", q.title, {}};
    bool any = false;
    for (const auto& [label, records] : runs) {
      PlotSeries s{label, {}, {}};
      for (const DiagnosticsRecord& r : records) {
        const double y = q.get(r);
        if (std::isnan(y)) continue;
        s.x.push_back(r.t);
        s.y.push_back(y);
      }
      any = any || !s.x.empty();
      chart.series.push_back(std::move(s));
    }
    if (any || std::string(q.title) != "l2_error") charts.push_back(std::move(chart));
  }
  return charts;
}

void write_vtk_fields(const FEFunction& velocity, const FEFunction& pressure, std::ostream& out) {
  if (velocity.kind() != FieldKind::Velocity || pressure.kind() != FieldKind::Pressure) {
    throw std::invalid_argument("write_vtk_fields: expected velocity and pressure fields");
  }
  const TaylorHoodSpace& space = velocity.space();
  const TriMesh& mesh = space.mesh();
  write_vtk(mesh, out);
  const int nv = mesh.num_vertices();
  const int off = space.num_vel_nodes();
  const auto u = velocity.coefficients();
  const auto p = pressure.coefficients();
  out << "POINT_DATA " << nv << '\n';
  out << "VECTORS velocity double\n";
  for (int v = 0; v < nv; ++v) out << u[v] << ' ' << u[off + v] << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) out << p[v] << '\n';
}

struct CsvSink::Impl {
  std::filesystem::path path;
  std::ofstream out;
};

CsvSink::CsvSink(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw std::runtime_error("cannot open CSV output " + path.string());
  impl_->out << csv_header << '\n';
  impl_->out.flush();
}

CsvSink::~CsvSink() = default;

void CsvSink::write(const DiagnosticsRecord& record, const TimeState&) {
  impl_->out << format_csv_row(record) << '\n';
  impl_->out.flush();
  if (!impl_->out) throw std::runtime_error("write failed for " + impl_->path.string());
}

VtkSink::VtkSink(std::filesystem::path prefix, int every) : prefix_(std::move(prefix)), every_(every) {
  if (every_ < 1) throw std::invalid_argument("VtkSink: stride must be positive");
}

void VtkSink::write(const DiagnosticsRecord& record, const TimeState& state) {
  if (record.step % every_ != 0 && !record.diverged) return;
  char suffix[32];
  std::snprintf(suffix, sizeof suffix, "_%06d.vtk", record.step);
  const std::filesystem::path path = prefix_.string() + suffix;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open VTK output " + path.string());
  out.precision(17);
  write_vtk_fields(state.u_curr, state.p_curr, out);
}

// ---------------------------------------------------------------------------
// Temporal convergence

double fitted_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_log_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceStudy temporal_convergence(const SimulationProblem& problem, const SchemeConfig& config,
                                      std::span<const double> dts, double dt_reference) {
  auto final_velocity = [&](double dt) {
    SchemeConfig c = config;
    c.dt = dt;
    SimulationResult r = run_simulation(problem, c);
    if (r.diverged) throw std::runtime_error("temporal_convergence: run with dt " + tick_label(dt) + " diverged");
    return std::move(r.final_state.u_curr);
  };
  ConvergenceStudy study;
  study.dt_reference = dt_reference;
  const FEFunction reference = final_velocity(dt_reference);
  const SparseMatrix mass = assemble_mass(*problem.space);
  std::vector<double> xs, ys;
  for (double dt : dts) {
    const FEFunction u = final_velocity(dt);
    std::vector<double> d(u.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u.coefficients()[i] - reference.coefficients()[i];
    ConvergencePoint p{dt, std::sqrt(std::max(0.0, bilinear(mass, d, d))), 0.0};
    if (problem.exact_velocity) p.exact_error = l2_error(u, problem.exact_velocity, config.t_end);
    study.points.push_back(p);
    xs.push_back(dt);
    ys.push_back(p.difference);
  }
  if (xs.size() >= 2) study.fitted_order = fitted_log_slope(xs, ys);
  return study;
}

}  // namespace emac
