#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emac/bench.hpp"
#include "emac/errors.hpp"

namespace emac {

namespace {

struct RunOptions {
  int nx = 0;
  double dt = 0.01;
  double t_end = 10.0;
  std::string form = "emac";
  std::string mode = "full";
  double tol = 1e-8;
  double nu = NAN;
  double graddiv = 0.0;
  std::string ic = "project";
  std::string out;
  std::string svg;
  int vtk_every = 0;
};

void add_run_options(CLI::App& app, RunOptions& o) {
  app.add_option("--nx", o.nx, "Cells per side (default 48 for gresho, 32 for lattice)")->check(CLI::PositiveNumber);
  app.add_option("--dt", o.dt, "Time step")->capture_default_str();
  app.add_option("--t-end", o.t_end, "Final time")->capture_default_str();
  app.add_option("--form", o.form, "Convective form")
      ->check(CLI::IsMember({"emac", "conv", "skew", "cons", "rot"}))
      ->capture_default_str();
  app.add_option("--mode", o.mode, "Nonlinear solve")
      ->check(CLI::IsMember({"full", "newton1", "newton2", "newton3", "skewlin"}))
      ->capture_default_str();
  app.add_option("--tol", o.tol, "Newton tolerance on the H1 norm of the update")->capture_default_str();
  app.add_option("--nu", o.nu, "Viscosity (problem default when omitted)");
  app.add_option("--graddiv", o.graddiv, "Grad-div coefficient")->capture_default_str();
  app.add_option("--ic", o.ic, "Initial velocity")->check(CLI::IsMember({"project", "interpolate"}))->capture_default_str();
  app.add_option("--out", o.out, "CSV output path")->required();
  app.add_option("--svg", o.svg, "SVG plot path");
}

SchemeConfig scheme_from(const RunOptions& o) {
  SchemeConfig c;
  c.form = *parse_formulation(o.form);
  if (o.mode == "full") {
    c.mode = FullNewton{o.tol, 25};
  } else if (o.mode == "skewlin") {
    c.mode = SkewLinearized{};
  } else {
    c.mode = NewtonK{o.mode.back() - '0'};
  }
  c.dt = o.dt;
  c.t_end = o.t_end;
  c.gamma = o.graddiv;
  c.nu = o.nu;
  return c;
}

int run_benchmark(const std::string& name, RunOptions o) {
  if (o.nx == 0) o.nx = name == "gresho" ? 48 : 32;
  if (std::isnan(o.nu)) o.nu = default_viscosity(name);
  const SchemeConfig config = scheme_from(o);
  validate(config);
  num_steps(config);

  const BenchmarkProblem bench = make_benchmark(name, o.nu);
  const SimulationProblem problem = make_simulation_problem(
      bench, o.nx, o.ic == "project" ? InitialCondition::Project : InitialCondition::Interpolate);

  CsvSink csv(o.out);
  std::vector<RecordSink*> sinks{&csv};
  std::unique_ptr<VtkSink> vtk;
  if (o.vtk_every > 0) {
    std::filesystem::path prefix = o.out;
    prefix.replace_extension();
    vtk = std::make_unique<VtkSink>(prefix, o.vtk_every);
    sinks.push_back(vtk.get());
  }
  const SimulationResult result = run_simulation(problem, config, sinks);

  if (!o.svg.empty()) {
    const std::string label = o.form + "/" + o.mode;
    const std::vector<std::pair<std::string, std::vector<DiagnosticsRecord>>> runs{{label, result.records}};
    svg_plot(diagnostics_charts(runs), o.svg);
  }
  const DiagnosticsRecord& last = result.records.back();
  std::printf("%s %s/%s nx=%d dt=%g: %zu steps, t=%g, energy %.10e -> %.10e%s\n", name.c_str(), o.form.c_str(),
              o.mode.c_str(), o.nx, o.dt, result.records.size() - 1, last.t, result.records.front().energy,
              last.energy, result.diverged ? " (diverged)" : "");
  return result.diverged ? 2 : 0;
}

int run_convergence(const std::string& name, RunOptions o, int levels) {
  if (o.nx == 0) o.nx = name == "gresho" ? 48 : 32;
  if (std::isnan(o.nu)) o.nu = default_viscosity(name);
  if (levels < 2) throw std::invalid_argument("--levels must be at least 2");
  const SchemeConfig config = scheme_from(o);
  validate(config);
  const SimulationProblem problem = make_simulation_problem(
      make_benchmark(name, o.nu), o.nx, o.ic == "project" ? InitialCondition::Project : InitialCondition::Interpolate);
  std::vector<double> dts;
  for (int k = 0; k < levels; ++k) dts.push_back(o.dt / std::pow(2.0, k));
  const double dt_ref = o.dt / std::pow(2.0, levels);
  const ConvergenceStudy study = temporal_convergence(problem, config, dts, dt_ref);

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + o.out);
  out << "dt,difference_to_reference,exact_error,pairwise_order\n";
  char buf[160];
  for (std::size_t i = 0; i < study.points.size(); ++i) {
    const ConvergencePoint& p = study.points[i];
    std::string order;
    if (i > 0) {
      const ConvergencePoint& q = study.points[i - 1];
      std::snprintf(buf, sizeof buf, "%.6f", std::log(q.difference / p.difference) / std::log(q.dt / p.dt));
      order = buf;
    }
    std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e,", p.dt, p.difference, p.exact_error);
    out << buf << order << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + o.out);
  if (!o.svg.empty()) {
    Chart chart{"temporal self-convergence", "dt", "difference to reference", {}};
    PlotSeries s{o.form + "/" + o.mode, {}, {}};
    for (const ConvergencePoint& p : study.points) {
      s.x.push_back(std::log10(p.dt));
      s.y.push_back(std::log10(p.difference));
    }
    chart.x_label = "log10 dt";
    chart.y_label = "log10 difference";
    chart.series.push_back(std::move(s));
    svg_plot(std::span<const Chart>(&chart, 1), o.svg);
  }
  std::printf("reference dt=%g, fitted order %.4f\n", dt_ref, study.fitted_order);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"EMAC Navier-Stokes benchmarks"};
  app.require_subcommand(1);

  RunOptions gresho, lattice, conv;
  CLI::App* g = app.add_subcommand("gresho", "Standing vortex on (-0.5,0.5)^2");
  add_run_options(*g, gresho);
  g->add_option("--vtk-every", gresho.vtk_every, "Write a VTK field dump every N steps");
  CLI::App* l = app.add_subcommand("lattice", "Lattice vortex on (0,1)^2");
  add_run_options(*l, lattice);
  l->add_option("--vtk-every", lattice.vtk_every, "Write a VTK field dump every N steps");

  CLI::App* c = app.add_subcommand("convergence", "Temporal self-convergence against a fine reference run");
  add_run_options(*c, conv);
  std::string conv_problem = "lattice";
  int levels = 3;
  c->add_option("--problem", conv_problem, "Benchmark")->check(CLI::IsMember({"gresho", "lattice"}))->capture_default_str();
  c->add_option("--levels", levels, "Number of halvings of dt below the coarsest")->capture_default_str();

  CLI::App* id = app.add_subcommand("identities", "Randomized identity battery");
  IdentityOptions iopt;
  std::string id_out;
  double id_tol = 1e-12;
  bool keep_boundary = false;
  id->add_option("--seed", iopt.seed, "Random seed")->capture_default_str();
  id->add_option("--nx", iopt.nx, "Cells per side")->capture_default_str();
  id->add_option("--trials", iopt.trials, "Random triples per identity")->capture_default_str();
  id->add_option("--tol", id_tol, "Pass threshold on the relative violation")->capture_default_str();
  id->add_flag("--keep-boundary", keep_boundary, "Do not zero boundary DOFs where the identities require it");
  id->add_option("--out", id_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) return run_benchmark("gresho", gresho);
    if (l->parsed()) return run_benchmark("lattice", lattice);
    if (c->parsed()) return run_convergence(conv_problem, conv, levels);
    iopt.zero_boundary = !keep_boundary;
    const IdentityReport report = verify_identities(iopt);
    std::ofstream out(id_out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + id_out);
    write_identity_csv(report, id_tol, out);
    write_identity_csv(report, id_tol, std::cout);
    return report.passed(id_tol) ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NonconvergenceError& e) {
    std::fprintf(stderr, "error: %s (last update norm %g)\n", e.what(),
                 e.history().empty() ? NAN : e.history().back());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace emac
