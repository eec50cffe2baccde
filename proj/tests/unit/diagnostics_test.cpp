#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "emac/bench.hpp"
#include "emac/diagnostics.hpp"
#include "oracle.hpp"

namespace {

using emac::DiagnosticsRecord;

// 1/2 integral of |u|^2 for the standing vortex, by 1D Gauss in r.
double gresho_energy_oracle() {
  const auto g = oracle::gauss_legendre01(20);
  double e = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double r1 = 0.2 * g.x[i];
    const double r2 = 0.2 + 0.2 * g.x[i];
    e += 0.2 * g.w[i] * M_PI * r1 * std::pow(5 * r1, 2);
    e += 0.2 * g.w[i] * M_PI * r2 * std::pow(2 - 5 * r2, 2);
  }
  return e;
}

TEST(Functionals, ZeroField) {
  const auto space = oracle::square_space(3);
  const emac::FEFunction z(space, emac::FieldKind::Velocity);
  EXPECT_EQ(emac::kinetic_energy(z), 0.0);
  EXPECT_EQ(emac::linear_momentum(z), (emac::Vec2{}));
  EXPECT_EQ(emac::angular_momentum(z), 0.0);
  EXPECT_EQ(emac::div_l2_norm(z), 0.0);
}

TEST(Functionals, AngularMomentumOfRigidRotation) {
  const auto space = oracle::square_space(4, {-0.5, 0.5, -0.5, 0.5});
  const auto u = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.y, -p.x}; });
  EXPECT_NEAR(emac::angular_momentum(u), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(emac::div_l2_norm(u), 0.0, 1e-15);
}

TEST(Functionals, GreshoAnalyticValues) {
  const double e0 = 2 * M_PI / 75;
  EXPECT_NEAR(gresho_energy_oracle(), e0, 1e-14);
  const auto space = oracle::square_space(48, {-0.5, 0.5, -0.5, 0.5});
  const emac::FEFunction zero(space, emac::FieldKind::Velocity);
  const auto exact = [](const emac::Vec2& p, double) { return emac::gresho_exact(p.x, p.y).velocity; };
  // degree-8 quadrature across the kinks at r = 0.2, 0.4
  EXPECT_NEAR(emac::l2_error(zero, exact, 0.0), std::sqrt(2 * e0), 1e-4 * std::sqrt(2 * e0));
  const auto ui = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::gresho_exact(p.x, p.y).velocity; });
  EXPECT_NEAR(emac::kinetic_energy(ui), e0, 0.02 * e0);
  const double m_ang = -7 * M_PI / 375;
  EXPECT_NEAR(emac::angular_momentum(ui), m_ang, 0.02 * std::abs(m_ang));
  EXPECT_NEAR(emac::linear_momentum(ui).x, 0.0, 1e-14);
  EXPECT_NEAR(emac::linear_momentum(ui).y, 0.0, 1e-14);
}

TEST(Functionals, LatticeInitialValues) {
  const auto space = oracle::square_space(32);
  const emac::FEFunction zero(space, emac::FieldKind::Velocity);
  const auto exact = [](const emac::Vec2& p, double t) { return emac::lattice_exact(p.x, p.y, t, 0.0).velocity; };
  EXPECT_NEAR(emac::l2_error(zero, exact, 0.0), std::sqrt(0.5), 1e-12);
  const auto ui = emac::interpolate_velocity(space, [&](const emac::Vec2& p) { return exact(p, 0.0); });
  EXPECT_NEAR(emac::kinetic_energy(ui), 0.25, 1e-5);
  EXPECT_NEAR(emac::linear_momentum(ui).x, 0.0, 1e-14);
  EXPECT_NEAR(emac::linear_momentum(ui).y, 0.0, 1e-14);
}

TEST(Functionals, ScalingAndLinearity) {
  const auto space = oracle::square_space(5, {-1, 1, 0, 1});
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    auto u = oracle::random_velocity(space, rng);
    const auto v = oracle::random_velocity(space, rng);
    const double a = std::uniform_real_distribution<double>(-3, 3)(rng);
    const double e = emac::kinetic_energy(u), m = emac::angular_momentum(u), mv = emac::angular_momentum(v);
    const emac::Vec2 p = emac::linear_momentum(u), pv = emac::linear_momentum(v);
    emac::FEFunction w(space, emac::FieldKind::Velocity);
    for (std::size_t i = 0; i < w.size(); ++i) w.coefficients()[i] = a * u.coefficients()[i] + v.coefficients()[i];
    EXPECT_NEAR(emac::angular_momentum(w), a * m + mv, 1e-13);
    EXPECT_NEAR(emac::linear_momentum(w).x, a * p.x + pv.x, 1e-13);
    EXPECT_NEAR(emac::linear_momentum(w).y, a * p.y + pv.y, 1e-13);
    for (double& c : u.coefficients()) c *= a;
    EXPECT_NEAR(emac::kinetic_energy(u), a * a * e, 1e-13 * a * a * e);
  }
}

TEST(Functionals, AngularMomentumIsMassProductWithRotation) {
  const auto space = oracle::square_space(5, {-0.5, 0.5, -0.5, 0.5});
  const auto m = emac::assemble_mass(*space);
  const auto phi = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.y, -p.x}; });
  std::mt19937_64 rng(10);
  for (int t = 0; t < 10; ++t) {
    const auto u = oracle::random_velocity(space, rng);
    const double ref = emac::bilinear(m, u.coefficients(), phi.coefficients());
    EXPECT_NEAR(emac::angular_momentum(u), ref, 1e-12 * std::abs(ref) + 1e-15);
  }
}

TEST(Functionals, DivergenceNormMatchesOracle) {
  const auto space = oracle::square_space(4);
  std::mt19937_64 rng(12);
  const auto u = oracle::random_velocity(space, rng);
  const double ref = oracle::integrate(space->mesh(), 4, [&](int c, const oracle::CellGeometry& g, const auto& l) {
    return std::pow(oracle::div(oracle::eval(u, c, g, l).du), 2);
  });
  EXPECT_NEAR(emac::div_l2_norm(u), std::sqrt(ref), 1e-12 * std::sqrt(ref));
}

TEST(L2Error, FiniteElementExactFieldGivesZero) {
  const auto space = oracle::square_space(4);
  const auto f = [](const emac::Vec2& p, double t) { return emac::Vec2{p.x * p.y * t, 1 - p.x * p.x}; };
  const auto u = emac::interpolate_velocity(space, [&](const emac::Vec2& p) { return f(p, 2.0); });
  EXPECT_LT(emac::l2_error(u, f, 2.0), 1e-13);
}

TEST(L2Error, LatticeInterpolationOrder) {
  std::vector<double> h, err;
  for (int n : {8, 16, 32}) {
    const auto space = oracle::square_space(n);
    const auto exact = [](const emac::Vec2& p, double t) { return emac::lattice_exact(p.x, p.y, t, 1e-7).velocity; };
    const auto u = emac::interpolate_velocity(space, [&](const emac::Vec2& p) { return exact(p, 0.0); });
    h.push_back(1.0 / n);
    err.push_back(emac::l2_error(u, exact, 0.0));
  }
  EXPECT_NEAR(emac::fitted_log_slope(h, err), 3.0, 0.3);
}

DiagnosticsRecord sample(int step, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  DiagnosticsRecord r;
  r.step = step;
  r.t = step * 0.01;
  r.energy = std::abs(u(rng)) * std::pow(10.0, 8 * u(rng));
  r.momentum_x = u(rng) * 1e-17;
  r.momentum_y = u(rng);
  r.ang_momentum = -std::abs(u(rng)) / 3;
  r.div_norm = std::abs(u(rng)) * 1e-300;
  if (step % 3) r.l2_error = std::abs(u(rng));
  r.newton_iters = step % 5;
  r.nonlinear_residual = std::abs(u(rng)) * 1e-14;
  r.diverged = step == 999;
  return r;
}

TEST(Csv, HeaderOnlyForEmptyList) {
  std::ostringstream out;
  emac::write_csv({}, out);
  EXPECT_EQ(out.str(), std::string(emac::csv_header) + "\n");
}

TEST(Csv, OneRecordTwoLines) {
  std::mt19937_64 rng(1);
  const std::vector<DiagnosticsRecord> recs{sample(1, rng)};
  std::ostringstream out;
  emac::write_csv(recs, out);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_EQ(s.find('\r'), std::string::npos);
}

TEST(Csv, RoundTripIsBitExact) {
  std::mt19937_64 rng(2);
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back(sample(i, rng));
  std::stringstream io;
  emac::write_csv(recs, io);
  const auto back = emac::read_csv(io);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], recs[i]) << "row " << i;
}

TEST(Csv, FieldLayout) {
  DiagnosticsRecord r;
  r.step = 3;
  r.t = 0.03;
  r.energy = 0.5;
  r.newton_iters = 4;
  const std::string row = emac::format_csv_row(r);
  EXPECT_EQ(row, "3,2.9999999999999999e-02,5.0000000000000000e-01,0.0000000000000000e+00,0.0000000000000000e+00,"
                 "0.0000000000000000e+00,0.0000000000000000e+00,,4,0.0000000000000000e+00,false");
}

TEST(Csv, MalformedInputRejected) {
  std::istringstream bad_header("step,t\n");
  EXPECT_THROW(emac::read_csv(bad_header), std::runtime_error);
  std::istringstream short_row(std::string(emac::csv_header) + "\n1,2,3\n");
  EXPECT_THROW(emac::read_csv(short_row), std::runtime_error);
}

TEST(Csv, UnwritablePathNamesPath) {
  const std::filesystem::path p = "/nonexistent-dir/x.csv";
  try {
    emac::write_csv({}, p);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("nonexistent-dir"), std::string::npos);
  }
}

}  // namespace
