#pragma once

#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "emac/diagnostics.hpp"
#include "emac/forms.hpp"
#include "emac/saddle.hpp"
#include "emac/space.hpp"

namespace emac {

/// Newton iteration on u^n until the update satisfies
/// ||du||_{M+K} < tol * max(1, ||u^n||_{M+K}).
struct FullNewton {
  double tol = 1e-8;
  int max_iter = 25;
};

/// Exactly k Newton-linearized solves per step, starting from the
/// extrapolated midpoint 3/2 u^{n-1} - 1/2 u^{n-2}.
struct NewtonK {
  int k = 2;
};

/// One solve with the antisymmetric operator b(v, u, u*) - b(u, v, u*).
struct SkewLinearized {};

using NonlinearMode = std::variant<FullNewton, NewtonK, SkewLinearized>;

struct SchemeConfig {
  Formulation form = Formulation::Emac;
  NonlinearMode mode = FullNewton{};
  double dt = 0.01;
  double t_end = 10.0;
  double nu = 0.0;
  double gamma = 0.0;
};

/// Throws std::invalid_argument for violated parameter constraints.
void validate(const SchemeConfig& config);
/// t_end / dt, which must be within 1e-9 of an integer.
int num_steps(const SchemeConfig& config);

/// Time-dependent data; empty functions mean zero forcing and homogeneous
/// Dirichlet data.
struct FlowData {
  TimeVelocityFunction forcing;
  TimeVelocityFunction boundary;
};

/// Per-step balances that do not go into the CSV.
struct StepStatistics {
  /// ||B u^n||_inf
  double weak_divergence = 0.0;
  /// ||u^n||_{L2}
  double velocity_norm = 0.0;
  /// E^n - E^{n-1} + dt nu |grad u_mid|^2 + dt gamma |div u_mid|^2 - dt (f, u_mid)
  double energy_defect = 0.0;
  /// Work of the last EMAC linearization against u_mid minus the exact EMAC
  /// work, -(2 D(d) d + (div d) d, u_mid) with d = u_mid - u*. Zero for
  /// modes without linearization point.
  double linearization_defect = 0.0;
};

struct TimeState {
  int step = 0;
  double t = 0.0;
  FEFunction u_curr;
  FEFunction u_prev;
  FEFunction p_curr;
  int newton_iters = 0;
  double nonlinear_residual = 0.0;
  StepStatistics stats;
};

/// Divergence-free initial state at step 0; u_prev equals u_curr.
TimeState initial_state(FEFunction u0, FEFunction p0);

/// Constrained L2 projection onto discretely divergence-free fields, with the
/// boundary values of `exact` imposed strongly. Returns the velocity and the
/// constraint multiplier.
std::pair<FEFunction, FEFunction> project_initial_condition(const SpacePtr& space, const VelocityFunction& exact);

/// Crank-Nicolson stepper caching the constant operators and the symbolic
/// factorization. Not thread-safe; one instance per simulation.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(SpacePtr space, SchemeConfig config, FlowData data);
  ~CrankNicolsonStepper();
  CrankNicolsonStepper(CrankNicolsonStepper&&) noexcept;
  CrankNicolsonStepper& operator=(CrankNicolsonStepper&&) noexcept;

  const SchemeConfig& config() const;

  /// Step with the configured mode; the first step always uses FullNewton
  /// (tol 1e-8, max 25 iterations).
  TimeState step(const TimeState& state);

  TimeState step_full_newton(const TimeState& state, const FullNewton& options);
  /// Requires form Emac and state.step >= 1.
  TimeState step_newton_k(const TimeState& state, int k);
  /// Requires form Emac and state.step >= 1.
  TimeState step_skew_linearized(const TimeState& state);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TimeState cn_step_full_newton(const TimeState& state, const SchemeConfig& config, const FlowData& data);
TimeState cn_step_newton_k(const TimeState& state, const SchemeConfig& config, const FlowData& data);
TimeState cn_step_skew_linearized(const TimeState& state, const SchemeConfig& config, const FlowData& data);

enum class InitialCondition { Project, Interpolate };

struct SimulationProblem {
  SpacePtr space;
  /// Velocity at t = 0.
  VelocityFunction initial_velocity;
  /// Optional; enables the l2_error column.
  TimeVelocityFunction exact_velocity;
  FlowData data;
  InitialCondition initial = InitialCondition::Project;
};

/// Receives every record as soon as it is computed.
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write(const DiagnosticsRecord& record, const TimeState& state) = 0;
};

struct SimulationResult {
  std::vector<DiagnosticsRecord> records;
  std::vector<StepStatistics> statistics;
  TimeState final_state;
  bool diverged = false;
};

/// Ratio of kinetic energy to the initial energy that stops a run.
inline constexpr double blowup_factor = 1e16;

/// Runs from t = 0 to t_end. Step errors propagate after the sinks have seen
/// every completed step.
SimulationResult run_simulation(const SimulationProblem& problem, const SchemeConfig& config,
                                std::span<RecordSink* const> sinks = {});

DiagnosticsRecord make_record(const TimeState& state, const TimeVelocityFunction& exact);

}  // namespace emac
