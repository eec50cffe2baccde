#include "emac/timeloop.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "emac/errors.hpp"

namespace emac {

namespace {

std::vector<double> combine(double a, std::span<const double> x, double b, std::span<const double> y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

void add_scaled(std::vector<double>& y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

FEFunction velocity(const SpacePtr& space, std::vector<double> coeffs) {
  return FEFunction(space, FieldKind::Velocity, std::move(coeffs));
}

std::vector<DirichletValue> dirichlet_values(const TaylorHoodSpace& space, std::span<const int> dofs,
                                             const VelocityFunction& g) {
  std::vector<DirichletValue> out;
  out.reserve(dofs.size());
  const int n = space.num_vel_nodes();
  for (int d : dofs) {
    const int comp = d < n ? 0 : 1;
    const Vec2 v = g ? g(space.node_coordinates(d - comp * n)) : Vec2{};
    out.push_back({d, comp == 0 ? v.x : v.y});
  }
  return out;
}

}  // namespace

void validate(const SchemeConfig& c) {
  if (!(c.dt > 0.0)) throw std::invalid_argument("SchemeConfig: dt must be positive");
  if (!(c.t_end >= c.dt)) throw std::invalid_argument("SchemeConfig: t_end must be at least dt");
  if (!(c.nu >= 0.0)) throw std::invalid_argument("SchemeConfig: nu must be non-negative");
  if (!(c.gamma >= 0.0)) throw std::invalid_argument("SchemeConfig: gamma must be non-negative");
  if (to_string(c.form) == "unknown") throw std::invalid_argument("SchemeConfig: unknown formulation");
  if (const auto* fn = std::get_if<FullNewton>(&c.mode)) {
    if (!(fn->tol > 0.0)) throw std::invalid_argument("SchemeConfig: Newton tolerance must be positive");
    if (fn->max_iter < 1) throw std::invalid_argument("SchemeConfig: max_iter must be positive");
  } else {
    if (c.form != Formulation::Emac) {
      throw std::invalid_argument("SchemeConfig: linearized modes require the EMAC formulation");
    }
    if (const auto* nk = std::get_if<NewtonK>(&c.mode); nk && nk->k < 1) {
      throw std::invalid_argument("SchemeConfig: Newton step count must be positive");
    }
  }
}

int num_steps(const SchemeConfig& c) {
  validate(c);
  const double ratio = c.t_end / c.dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9) throw std::invalid_argument("SchemeConfig: t_end is not a multiple of dt");
  return static_cast<int>(n);
}

TimeState initial_state(FEFunction u0, FEFunction p0) {
  FEFunction prev = u0;
  return TimeState{0, 0.0, std::move(u0), std::move(prev), std::move(p0), 0, 0.0, {}};
}

std::pair<FEFunction, FEFunction> project_initial_condition(const SpacePtr& space, const VelocityFunction& exact) {
  const auto dofs = boundary_dofs(space->mesh(), *space);
  SaddleSystem system{space,
                      assemble_mass(*space),
                      assemble_div(*space),
                      assemble_pressure_mean(*space),
                      assemble_load(*space, exact),
                      std::vector<double>(space->num_pr_dofs(), 0.0),
                      dirichlet_values(*space, dofs, exact),
                      false};
  SaddleSolution sol = solve(system);
  return {std::move(sol.velocity), std::move(sol.pressure)};
}

struct CrankNicolsonStepper::Impl {
  SpacePtr space;
  SchemeConfig config;
  FlowData data;
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix graddiv;
  SparseMatrix h1;        // M + K
  SparseMatrix viscous;   // nu K + gamma G
  SparseMatrix base;      // M / dt + 1/2 viscous
  SparseMatrix div;
  std::vector<double> mean;
  std::vector<int> bdofs;
  std::vector<char> fixed;
  SaddleSolver solver;

  Impl(SpacePtr s, SchemeConfig c, FlowData d) : space(std::move(s)), config(c), data(std::move(d)) {
    validate(config);
    mass = assemble_mass(*space);
    stiffness = assemble_stiffness(*space);
    graddiv = assemble_graddiv(*space);
    h1 = mass;
    h1.axpy(1.0, stiffness);
    viscous = SparseMatrix::zeros_like(mass);
    viscous.axpy(config.nu, stiffness).axpy(config.gamma, graddiv);
    base = mass;
    base.scale(1.0 / config.dt).axpy(0.5, viscous);
    div = assemble_div(*space);
    mean = assemble_pressure_mean(*space);
    bdofs = boundary_dofs(space->mesh(), *space);
    fixed.assign(space->num_vel_dofs(), 0);
    for (int d : bdofs) fixed[d] = 1;
  }

  std::vector<double> forcing_mid(double t_mid) const {
    if (!data.forcing) return std::vector<double>(space->num_vel_dofs(), 0.0);
    return assemble_load(*space, [&](const Vec2& x) { return data.forcing(x, t_mid); });
  }

  std::vector<DirichletValue> boundary_at(double t) const {
    if (!data.boundary) return dirichlet_values(*space, bdofs, nullptr);
    return dirichlet_values(*space, bdofs, [&](const Vec2& x) { return data.boundary(x, t); });
  }

  double h1_norm(std::span<const double> v) const { return std::sqrt(std::max(0.0, bilinear(h1, v, v))); }

  // Solves (M/dt + 1/2 (viscous + lin)) u - B^T p = M u_old/dt - 1/2 (viscous + lin) u_old + extra.
  SaddleSolution linear_solve(const SparseMatrix& lin, std::span<const double> u_old, std::span<const double> extra,
                              double t_new) {
    SparseMatrix a = base;
    a.axpy(0.5, lin);
    std::vector<double> rhs = mass * u_old;
    for (double& r : rhs) r /= config.dt;
    const std::vector<double> vu = viscous * u_old;
    const std::vector<double> lu = lin * u_old;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += -0.5 * vu[i] - 0.5 * lu[i] + extra[i];
    SaddleSystem system{space, std::move(a), div, mean, std::move(rhs), std::vector<double>(space->num_pr_dofs(), 0.0),
                        boundary_at(t_new), false};
    return solver.solve(system);
  }

  // Momentum residual of the fully nonlinear scheme on free DOFs.
  double nonlinear_residual(std::span<const double> u_new, std::span<const double> u_old, const FEFunction& p,
                            std::span<const double> f) const {
    const std::vector<double> mid = combine(0.5, u_new, 0.5, u_old);
    const std::vector<double> diff = combine(1.0 / config.dt, u_new, -1.0 / config.dt, u_old);
    std::vector<double> r = mass * diff;
    add_scaled(r, 1.0, viscous * mid);
    add_scaled(r, 1.0, nl_residual(config.form, velocity(space, mid)));
    add_scaled(r, -1.0, f);
    div.transpose_multiply_add(p.coefficients(), r, -1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!fixed[i]) sum += r[i] * r[i];
    }
    return std::sqrt(sum);
  }

  TimeState finish(const TimeState& s, std::vector<double> u_new, FEFunction p, int iters, std::span<const double> f,
                   const std::vector<double>* lin_point) {
    const std::span<const double> u_old = s.u_curr.coefficients();
    TimeState out{s.step + 1,
                  (s.step + 1) * config.dt,
                  velocity(space, std::move(u_new)),
                  s.u_curr,
                  std::move(p),
                  iters,
                  0.0,
                  {}};
    const auto un = out.u_curr.coefficients();
    out.nonlinear_residual = nonlinear_residual(un, u_old, out.p_curr, f);
    const std::vector<double> bu = div * un;
    out.stats.weak_divergence = norm_inf(bu);
    out.stats.velocity_norm = std::sqrt(std::max(0.0, bilinear(mass, un, un)));
    const std::vector<double> mid = combine(0.5, un, 0.5, u_old);
    const double e_new = 0.5 * bilinear(mass, un, un);
    const double e_old = 0.5 * bilinear(mass, u_old, u_old);
    out.stats.energy_defect = e_new - e_old + config.dt * bilinear(viscous, mid, mid) - config.dt * dot(f, mid);
    if (lin_point) {
      const std::vector<double> d = combine(1.0, mid, -1.0, *lin_point);
      out.stats.linearization_defect = -dot(nl_residual(Formulation::Emac, velocity(space, d)), mid);
    }
    return out;
  }

  TimeState full_newton(const TimeState& s, const FullNewton& opt) {
    if (!(opt.tol > 0.0) || opt.max_iter < 1) throw std::invalid_argument("FullNewton: invalid options");
    const double t_new = (s.step + 1) * config.dt;
    const std::vector<double> f = forcing_mid(t_new - 0.5 * config.dt);
    const auto u_old = s.u_curr.coefficients();
    std::vector<double> iterate =
        s.step >= 1 ? combine(2.0, u_old, -1.0, s.u_prev.coefficients()) : std::vector<double>(u_old.begin(), u_old.end());
    std::vector<double> history;
    for (int it = 1; it <= opt.max_iter; ++it) {
      const FEFunction mid = velocity(space, combine(0.5, iterate, 0.5, u_old));
      const SparseMatrix jac = nl_jacobian(config.form, mid);
      // NL(mid) ~ NL(w) + J(w)(mid - w): the known part J(w) w - NL(w) goes to the rhs.
      std::vector<double> extra = config.form == Formulation::Emac ? emac_newton_rhs_correction(mid)
                                                                    : combine(1.0, jac * mid.coefficients(), -1.0,
                                                                              nl_residual(config.form, mid));
      add_scaled(extra, 1.0, f);
      SaddleSolution sol = linear_solve(jac, u_old, extra, t_new);
      std::vector<double> next(sol.velocity.coefficients().begin(), sol.velocity.coefficients().end());
      const double step_norm = h1_norm(combine(1.0, next, -1.0, iterate));
      history.push_back(step_norm);
      iterate = std::move(next);
      if (!std::isfinite(step_norm)) break;
      if (step_norm < opt.tol * std::max(1.0, h1_norm(iterate))) {
        return finish(s, std::move(iterate), std::move(sol.pressure), it, f, nullptr);
      }
    }
    std::string what = "Newton iteration did not converge in step " + std::to_string(s.step + 1) + " after " +
                       std::to_string(history.size()) + " iterations";
    throw NonconvergenceError(what, std::move(history));
  }

  TimeState newton_k(const TimeState& s, int k) {
    if (config.form != Formulation::Emac) throw std::invalid_argument("newton_k: requires the EMAC formulation");
    if (s.step < 1) throw std::invalid_argument("newton_k: needs two previous levels (step >= 1)");
    if (k < 1) throw std::invalid_argument("newton_k: k must be positive");
    const double t_new = (s.step + 1) * config.dt;
    const std::vector<double> f = forcing_mid(t_new - 0.5 * config.dt);
    const auto u_old = s.u_curr.coefficients();
    std::vector<double> star = combine(1.5, u_old, -0.5, s.u_prev.coefficients());
    std::vector<double> iterate;
    FEFunction pressure(space, FieldKind::Pressure);
    for (int j = 0; j < k; ++j) {
      if (j > 0) star = combine(0.5, iterate, 0.5, u_old);
      const FEFunction w = velocity(space, star);
      std::vector<double> extra = emac_newton_rhs_correction(w);
      add_scaled(extra, 1.0, f);
      SaddleSolution sol = linear_solve(nl_jacobian(Formulation::Emac, w), u_old, extra, t_new);
      iterate.assign(sol.velocity.coefficients().begin(), sol.velocity.coefficients().end());
      pressure = std::move(sol.pressure);
    }
    return finish(s, std::move(iterate), std::move(pressure), k, f, &star);
  }

  TimeState skew_linearized(const TimeState& s) {
    if (config.form != Formulation::Emac) {
      throw std::invalid_argument("skew_linearized: requires the EMAC formulation");
    }
    if (s.step < 1) throw std::invalid_argument("skew_linearized: needs two previous levels (step >= 1)");
    const double t_new = (s.step + 1) * config.dt;
    const std::vector<double> f = forcing_mid(t_new - 0.5 * config.dt);
    const auto u_old = s.u_curr.coefficients();
    const FEFunction star = velocity(space, combine(1.5, u_old, -0.5, s.u_prev.coefficients()));
    SaddleSolution sol = linear_solve(skew_linearized_matrix(star), u_old, f, t_new);
    std::vector<double> u_new(sol.velocity.coefficients().begin(), sol.velocity.coefficients().end());
    return finish(s, std::move(u_new), std::move(sol.pressure), 1, f, nullptr);
  }

  void check_state(const TimeState& s) const {
    if (&s.u_curr.space() != space.get() || &s.u_prev.space() != space.get()) {
      throw std::invalid_argument("CrankNicolsonStepper: state lives on a different space");
    }
  }
};

CrankNicolsonStepper::CrankNicolsonStepper(SpacePtr space, SchemeConfig config, FlowData data)
    : impl_(std::make_unique<Impl>(std::move(space), config, std::move(data))) {}
CrankNicolsonStepper::~CrankNicolsonStepper() = default;
CrankNicolsonStepper::CrankNicolsonStepper(CrankNicolsonStepper&&) noexcept = default;
CrankNicolsonStepper& CrankNicolsonStepper::operator=(CrankNicolsonStepper&&) noexcept = default;

const SchemeConfig& CrankNicolsonStepper::config() const { return impl_->config; }

TimeState CrankNicolsonStepper::step(const TimeState& state) {
  impl_->check_state(state);
  if (state.step == 0) return impl_->full_newton(state, FullNewton{1e-8, 25});
  return std::visit(
      [&](const auto& mode) -> TimeState {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, FullNewton>) {
          return impl_->full_newton(state, mode);
        } else if constexpr (std::is_same_v<T, NewtonK>) {
          return impl_->newton_k(state, mode.k);
        } else {
          return impl_->skew_linearized(state);
        }
      },
      impl_->config.mode);
}

TimeState CrankNicolsonStepper::step_full_newton(const TimeState& state, const FullNewton& options) {
  impl_->check_state(state);
  return impl_->full_newton(state, options);
}

TimeState CrankNicolsonStepper::step_newton_k(const TimeState& state, int k) {
  impl_->check_state(state);
  return impl_->newton_k(state, k);
}

TimeState CrankNicolsonStepper::step_skew_linearized(const TimeState& state) {
  impl_->check_state(state);
  return impl_->skew_linearized(state);
}

TimeState cn_step_full_newton(const TimeState& state, const SchemeConfig& config, const FlowData& data) {
  const auto* opt = std::get_if<FullNewton>(&config.mode);
  CrankNicolsonStepper stepper(state.u_curr.space_ptr(), config, data);
  return stepper.step_full_newton(state, opt ? *opt : FullNewton{});
}

TimeState cn_step_newton_k(const TimeState& state, const SchemeConfig& config, const FlowData& data) {
  const auto* opt = std::get_if<NewtonK>(&config.mode);
  if (!opt) throw std::invalid_argument("cn_step_newton_k: config mode is not NewtonK");
  CrankNicolsonStepper stepper(state.u_curr.space_ptr(), config, data);
  return stepper.step_newton_k(state, opt->k);
}

TimeState cn_step_skew_linearized(const TimeState& state, const SchemeConfig& config, const FlowData& data) {
  CrankNicolsonStepper stepper(state.u_curr.space_ptr(), config, data);
  return stepper.step_skew_linearized(state);
}

DiagnosticsRecord make_record(const TimeState& s, const TimeVelocityFunction& exact) {
  DiagnosticsRecord r;
  r.step = s.step;
  r.t = s.t;
  r.energy = kinetic_energy(s.u_curr);
  const Vec2 m = linear_momentum(s.u_curr);
  r.momentum_x = m.x;
  r.momentum_y = m.y;
  r.ang_momentum = angular_momentum(s.u_curr);
  r.div_norm = div_l2_norm(s.u_curr);
  if (exact) r.l2_error = l2_error(s.u_curr, exact, s.t);
  r.newton_iters = s.newton_iters;
  r.nonlinear_residual = s.nonlinear_residual;
  return r;
}

SimulationResult run_simulation(const SimulationProblem& problem, const SchemeConfig& config,
                                std::span<RecordSink* const> sinks) {
  if (!problem.space) throw std::invalid_argument("run_simulation: missing space");
  if (!problem.initial_velocity) throw std::invalid_argument("run_simulation: missing initial velocity");
  const int steps = num_steps(config);
  const SpacePtr& space = problem.space;

  FEFunction u0(space, FieldKind::Velocity);
  FEFunction p0(space, FieldKind::Pressure);
  if (problem.initial == InitialCondition::Project) {
    auto [u, p] = project_initial_condition(space, problem.initial_velocity);
    u0 = std::move(u);
    p0 = std::move(p);
  } else {
    u0 = interpolate_velocity(space, problem.initial_velocity);
  }

  CrankNicolsonStepper stepper(space, config, problem.data);
  SimulationResult result{{}, {}, initial_state(std::move(u0), std::move(p0)), false};
  const auto& u_init = result.final_state.u_curr.coefficients();
  result.final_state.stats.velocity_norm = std::sqrt(2.0 * kinetic_energy(result.final_state.u_curr));
  result.final_state.stats.weak_divergence = norm_inf(assemble_div(*space) * u_init);

  auto emit = [&](DiagnosticsRecord rec) {
    for (RecordSink* sink : sinks) sink->write(rec, result.final_state);
    result.records.push_back(std::move(rec));
    result.statistics.push_back(result.final_state.stats);
  };
  emit(make_record(result.final_state, problem.exact_velocity));
  const double e0 = result.records.front().energy;

  for (int n = 0; n < steps; ++n) {
    result.final_state = stepper.step(result.final_state);
    DiagnosticsRecord rec = make_record(result.final_state, problem.exact_velocity);
    if (!std::isfinite(rec.energy) || (e0 > 0.0 && rec.energy > blowup_factor * e0)) {
      rec.diverged = true;
      result.diverged = true;
    }
    emit(std::move(rec));
    if (result.diverged) break;
  }
  return result;
}

}  // namespace emac
