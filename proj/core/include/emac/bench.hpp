#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emac/diagnostics.hpp"
#include "emac/timeloop.hpp"

namespace emac {

struct ExactValue {
  Vec2 velocity;
  double pressure = 0.0;
};

/// Pressure constants of the standing vortex, chosen so that p is continuous
/// at r = 0.2 and r = 0.4 and vanishes outside.
double gresho_c2();
double gresho_c1();

/// Standing vortex on (-0.5, 0.5)^2.
ExactValue gresho_exact(double x, double y);

/// Decaying vortex array on (0, 1)^2: u = v exp(-8 nu pi^2 t),
/// p = q exp(-16 nu pi^2 t).
ExactValue lattice_exact(double x, double y, double t, double nu);

using TimeScalarFunction = std::function<double(const Vec2&, double)>;

struct BenchmarkProblem {
  std::string name;
  Rect domain;
  TimeVelocityFunction velocity;
  TimeScalarFunction pressure;
  TimeVelocityFunction forcing;
  /// Dirichlet data are the exact trace (true) or homogeneous (false).
  bool exact_trace_boundary = false;
  double nu = 0.0;
  int default_nx = 32;
};

BenchmarkProblem gresho_problem();
BenchmarkProblem lattice_problem(double nu = 1e-7);
/// "gresho" or "lattice"; throws std::invalid_argument otherwise.
BenchmarkProblem make_benchmark(const std::string& name, double nu);
double default_viscosity(const std::string& name);

/// Uniform nx-by-nx mesh of the problem domain, with the matching initial,
/// exact and boundary data.
SimulationProblem make_simulation_problem(const BenchmarkProblem& problem, int nx,
                                          InitialCondition initial = InitialCondition::Project);

// Identity battery

struct IdentityOptions {
  std::uint64_t seed = 1;
  int nx = 8;
  int trials = 100;
  /// Zero the boundary DOFs of arguments that the identities require to vanish
  /// on the boundary. Switching this off demonstrates that the hypothesis matters.
  bool zero_boundary = true;
};

struct IdentityResult {
  std::string name;
  int trials = 0;
  /// Largest |sum of terms| / max(sum of |terms|, M) over the trials, where M
  /// integrates the absolute integrand (|a||grad b||c| and permutations) and
  /// so bounds each term.
  double max_violation = 0.0;
};

struct IdentityReport {
  std::vector<IdentityResult> results;
  bool passed(double tol) const;
};

IdentityReport verify_identities(const IdentityOptions& options);
void write_identity_csv(const IdentityReport& report, double tol, std::ostream& out);

/// Random velocity with coefficients uniform in [-1, 1] and the listed DOFs zeroed.
FEFunction random_velocity(const SpacePtr& space, std::uint64_t seed, std::span<const int> zero_dofs = {});

// Plots and field output

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Static SVG 1.1 with the charts stacked vertically, linear axes and a legend.
void write_svg(std::span<const Chart> charts, std::ostream& out);
void svg_plot(std::span<const Chart> charts, const std::filesystem::path& path);

/// Time histories of energy, momentum, angular momentum and (when present)
/// L2 error, one curve per run.
std::vector<Chart> diagnostics_charts(std::span<const std::pair<std::string, std::vector<DiagnosticsRecord>>> runs);

/// Triangulation with vertex values of velocity and pressure.
void write_vtk_fields(const FEFunction& velocity, const FEFunction& pressure, std::ostream& out);

/// Appends every record to a CSV file and flushes, so that an aborted run
/// leaves the completed steps on disk.
class CsvSink final : public RecordSink {
 public:
  explicit CsvSink(const std::filesystem::path& path);
  ~CsvSink() override;
  void write(const DiagnosticsRecord& record, const TimeState& state) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes <prefix>_<step>.vtk every `every` steps.
class VtkSink final : public RecordSink {
 public:
  VtkSink(std::filesystem::path prefix, int every);
  void write(const DiagnosticsRecord& record, const TimeState& state) override;

 private:
  std::filesystem::path prefix_;
  int every_;
};

// Temporal self-convergence

struct ConvergencePoint {
  double dt = 0.0;
  /// ||u_dt(T) - u_ref(T)||
  double difference = 0.0;
  /// ||u_dt(T) - u_exact(T)||, when an exact solution exists.
  double exact_error = 0.0;
};

struct ConvergenceStudy {
  double dt_reference = 0.0;
  std::vector<ConvergencePoint> points;
  /// Least-squares slope of log(difference) against log(dt).
  double fitted_order = 0.0;
};

ConvergenceStudy temporal_convergence(const SimulationProblem& problem, const SchemeConfig& config,
                                      std::span<const double> dts, double dt_reference);

/// Least-squares slope of log(y) against log(x).
double fitted_log_slope(std::span<const double> x, std::span<const double> y);

/// Command-line entry point; returns 0 on success, 2 for a diverged run and
/// 1 for usage or runtime errors.
int cli_main(int argc, const char* const* argv);

}  // namespace emac
