#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emac/forms.hpp"
#include "emac/space.hpp"
#include "oracle.hpp"

namespace {

using emac::FEFunction;
using emac::Formulation;

constexpr Formulation all_forms[] = {Formulation::Emac, Formulation::Conv, Formulation::Skew, Formulation::Cons,
                                     Formulation::Rot};

// Pointwise nonlinear terms written directly from their definitions.
emac::Vec2 nl_oracle(Formulation f, const oracle::PointEval& p) {
  const auto& g = p.du;
  const emac::Vec2 conv = oracle::apply(g, p.u);
  const double div = oracle::div(g);
  switch (f) {
    case Formulation::Emac: {
      const oracle::Grad d{2 * g.xx, g.xy + g.yx, g.yx + g.xy, 2 * g.yy};
      return oracle::apply(d, p.u) + div * p.u;
    }
    case Formulation::Conv: return conv;
    case Formulation::Skew: return conv + 0.5 * div * p.u;
    case Formulation::Cons: return conv + div * p.u;
    case Formulation::Rot: {
      const double w = g.yx - g.xy;
      return {-w * p.u.y, w * p.u.x};
    }
  }
  return {};
}

double scale(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
  return s;
}

class FormsTest : public ::testing::Test {
 protected:
  emac::SpacePtr space = oracle::square_space(4);
  std::vector<int> boundary = emac::boundary_dofs(space->mesh(), *space);
  std::mt19937_64 rng{2024};
  FEFunction random() { return oracle::random_velocity(space, rng); }
  FEFunction interior() { return oracle::random_velocity(space, rng, boundary); }
};

TEST(FormulationNames, RoundTrip) {
  for (Formulation f : all_forms) EXPECT_EQ(emac::parse_formulation(emac::to_string(f)), f);
  EXPECT_FALSE(emac::parse_formulation("EMAC").has_value());
  EXPECT_FALSE(emac::parse_formulation("upwind").has_value());
}

TEST_F(FormsTest, TrilinearConstantArguments) {
  const auto c1 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{1.5, -2}; });
  const auto c2 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{0.2, 0.7}; });
  EXPECT_NEAR(emac::trilinear_b(c1, c2, random()), 0.0, 1e-14);
}

TEST_F(FormsTest, TrilinearHandValues) {
  const auto u = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.x, 0}; });
  const auto v = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.y, p.x}; });
  const auto e1 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{1, 0}; });
  const auto e2 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{0, 1}; });
  EXPECT_NEAR(emac::trilinear_b(u, v, e1), 0.0, 1e-15);
  EXPECT_NEAR(emac::trilinear_b(u, v, e2), 0.5, 1e-14);
  EXPECT_NEAR(oracle::trilinear(u, v, e2), 0.5, 1e-14);
}

TEST_F(FormsTest, TrilinearMatchesOracle) {
  for (int t = 0; t < 5; ++t) {
    const auto u = random(), v = random(), w = random();
    const double ref = oracle::trilinear(u, v, w);
    EXPECT_NEAR(emac::trilinear_b(u, v, w), ref, 1e-12 * std::abs(ref));
    const double dref = oracle::div_product(u, v, w);
    EXPECT_NEAR(emac::div_product(u, v, w), dref, 1e-12 * std::abs(dref));
  }
}

TEST_F(FormsTest, IntegrationByPartsNeedsZeroTrace) {
  for (int t = 0; t < 20; ++t) {
    const auto u = interior(), v = random(), w = random();
    const double a = emac::trilinear_b(u, v, w), b = emac::trilinear_b(u, w, v), c = emac::div_product(u, v, w);
    EXPECT_LE(std::abs(a + b + c), 1e-12 * (std::abs(a) + std::abs(b) + std::abs(c)));
    const double ww = emac::trilinear_b(u, w, w), dw = emac::div_product(u, w, w);
    EXPECT_LE(std::abs(ww + 0.5 * dw), 1e-12 * (std::abs(ww) + std::abs(dw)));
  }
  const auto u = random(), v = random(), w = random();
  const double a = emac::trilinear_b(u, v, w), b = emac::trilinear_b(u, w, v), c = emac::div_product(u, v, w);
  EXPECT_GT(std::abs(a + b + c), 1e-3 * (std::abs(a) + std::abs(b) + std::abs(c)));
}

TEST_F(FormsTest, DeformationProductEqualsTrilinearOnDiagonal) {
  for (int t = 0; t < 10; ++t) {
    const auto u = random();
    const double d = emac::deformation_product(u, u, u), b = emac::trilinear_b(u, u, u);
    EXPECT_NEAR(d, b, 1e-12 * std::abs(b));
  }
}

TEST_F(FormsTest, ResidualMatchesOracleProjection) {
  for (Formulation f : all_forms) {
    const auto u = random(), w = random();
    const auto r = emac::nl_residual(f, u);
    ASSERT_EQ(r.size(), static_cast<std::size_t>(space->num_vel_dofs()));
    const double ref = oracle::integrate(space->mesh(), 5, [&](int c, const oracle::CellGeometry& g, const auto& l) {
      return oracle::inner(nl_oracle(f, oracle::eval(u, c, g, l)), oracle::eval(w, c, g, l).u);
    });
    EXPECT_NEAR(emac::dot(r, w.coefficients()), ref, 1e-12 * std::abs(ref)) << emac::to_string(f);
  }
}

TEST_F(FormsTest, EnergyNeutralForms) {
  for (int t = 0; t < 10; ++t) {
    // (curl u) x u is orthogonal to u pointwise
    const auto any = random();
    const auto rr = emac::nl_residual(Formulation::Rot, any);
    EXPECT_LE(std::abs(emac::dot(rr, any.coefficients())), 1e-12 * scale(rr, any.coefficients()));
    // the other two rely on integration by parts
    const auto u = interior();
    for (Formulation f : {Formulation::Emac, Formulation::Skew}) {
      const auto r = emac::nl_residual(f, u);
      EXPECT_LE(std::abs(emac::dot(r, u.coefficients())), 1e-12 * scale(r, u.coefficients())) << emac::to_string(f);
      const auto ra = emac::nl_residual(f, any);
      EXPECT_GT(std::abs(emac::dot(ra, any.coefficients())), 1e-6 * scale(ra, any.coefficients())) << emac::to_string(f);
    }
  }
}

TEST_F(FormsTest, ConvEnergyDefectIsHalfDivergenceTerm) {
  const auto u = interior();
  const double got = emac::dot(emac::nl_residual(Formulation::Conv, u), u.coefficients());
  const double ref = -0.5 * oracle::div_product(u, u, u);
  EXPECT_GT(std::abs(ref), 1e-3);
  EXPECT_NEAR(got, ref, 1e-12 * std::abs(ref));
}

TEST_F(FormsTest, ZeroStateGivesZero) {
  const FEFunction zero(space, emac::FieldKind::Velocity);
  for (Formulation f : all_forms) {
    for (double r : emac::nl_residual(f, zero)) EXPECT_EQ(r, 0.0);
    const auto jac = emac::nl_jacobian(f, zero);
    for (double j : jac.values()) EXPECT_EQ(j, 0.0);
  }
  const auto skew = emac::skew_linearized_matrix(zero);
  for (double j : skew.values()) EXPECT_EQ(j, 0.0);
  for (double r : emac::emac_newton_rhs_correction(zero)) EXPECT_EQ(r, 0.0);
}

TEST_F(FormsTest, JacobianFiniteDifferenceSlope) {
  for (Formulation f : all_forms) {
    for (int t = 0; t < 10; ++t) {
      auto u = random();
      const auto w = random();
      const auto r0 = emac::nl_residual(f, u);
      const auto jw = emac::nl_jacobian(f, u) * w.coefficients();
      std::vector<double> eps, err;
      for (double e : {1e-1, 5e-2, 2.5e-2}) {
        FEFunction up(space, emac::FieldKind::Velocity);
        for (std::size_t i = 0; i < up.size(); ++i) up.coefficients()[i] = u.coefficients()[i] + e * w.coefficients()[i];
        const auto r1 = emac::nl_residual(f, up);
        std::vector<double> d(r1.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (r1[i] - r0[i]) / e - jw[i];
        eps.push_back(e);
        err.push_back(emac::norm2(d));
      }
      // quadratic map: the one-sided difference error is exactly linear in eps
      const double slope = std::log(err[0] / err[2]) / std::log(eps[0] / eps[2]);
      EXPECT_NEAR(slope, 1.0, 0.1) << emac::to_string(f);
    }
  }
}

TEST_F(FormsTest, EmacJacobianHomogeneity) {
  for (Formulation f : all_forms) {
    const auto u = random();
    const auto ju = emac::nl_jacobian(f, u) * u.coefficients();
    const auto r = emac::nl_residual(f, u);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(ju[i], 2.0 * r[i], 1e-12 * (1.0 + std::abs(r[i])));
  }
}

TEST_F(FormsTest, SkewLinearizedIsAntisymmetric) {
  const auto us = random();
  const auto L = emac::skew_linearized_matrix(us);
  std::mt19937_64 r2(77);
  for (int t = 0; t < 100; ++t) {
    const auto w = oracle::random_vector(space->num_vel_dofs(), r2);
    const auto lw = L * w;
    EXPECT_LE(std::abs(emac::dot(lw, w)), 1e-12 * scale(lw, w));
  }
  for (int i = 0; i < L.rows(); ++i)
    for (int k = L.row_offsets()[i]; k < L.row_offsets()[i + 1]; ++k)
      EXPECT_NEAR(L.values()[k], -L.at(L.col_indices()[k], i), 1e-14);
}

TEST_F(FormsTest, SkewLinearizedDoesNotConserveMomentum) {
  // tilde e1: interpolant of (1, 0) with boundary DOFs zeroed
  auto e1 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{1, 0}; });
  for (int d : boundary) e1.coefficients()[d] = 0.0;
  const auto strip = emac::boundary_strip_dofs(*space);
  const auto us = oracle::random_velocity(space, rng, strip);
  const auto w = oracle::random_velocity(space, rng, strip);
  const auto lw = emac::skew_linearized_matrix(us) * w.coefficients();
  const double got = emac::dot(lw, e1.coefficients());
  // (L w, v) = b(v, w, u*) - b(w, v, u*); b(w, e1~, u*) vanishes where e1~ is constant
  const double ref = oracle::trilinear(e1, w, us) - oracle::trilinear(w, e1, us);
  EXPECT_GT(std::abs(ref), 1e-4);
  EXPECT_NEAR(got, ref, 1e-12 * std::abs(ref));
  EXPECT_NEAR(ref, oracle::trilinear(e1, w, us), 1e-13);
}

TEST_F(FormsTest, NewtonRhsCorrection) {
  for (int t = 0; t < 5; ++t) {
    const auto us = interior();
    const auto c = emac::emac_newton_rhs_correction(us);
    const auto r = emac::nl_residual(Formulation::Emac, us);
    EXPECT_TRUE(std::ranges::equal(c, r));
    EXPECT_LE(std::abs(emac::dot(c, us.coefficients())), 1e-12 * scale(c, us.coefficients()));
  }
}

TEST_F(FormsTest, ConvectionAndGradTransposeMatrices) {
  for (int t = 0; t < 5; ++t) {
    const auto u = random(), v = random(), w = random();
    const double b = oracle::trilinear(u, v, w);
    EXPECT_NEAR(emac::bilinear(emac::convection_matrix(u), w.coefficients(), v.coefficients()), b, 1e-12 * std::abs(b));
    // ((grad v)^T w, u) = ((grad v) u, w)
    EXPECT_NEAR(emac::bilinear(emac::grad_transpose_matrix(v), u.coefficients(), w.coefficients()), b,
                1e-12 * std::abs(b));
  }
}

TEST_F(FormsTest, TildeMomentumCancellation) {
  const auto strip = emac::boundary_strip_dofs(*space);
  auto e1 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{1, 0}; });
  auto e2 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{0, 1}; });
  auto phi = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.y, -p.x}; });
  for (FEFunction* f : {&e1, &e2, &phi})
    for (int d : boundary) f->coefficients()[d] = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto u = oracle::random_velocity(space, rng, strip);
    const auto r = emac::nl_residual(Formulation::Emac, u);
    for (const FEFunction* f : {&e1, &e2, &phi})
      EXPECT_LE(std::abs(emac::dot(r, f->coefficients())), 1e-12 * scale(r, f->coefficients()));
    // conv does not cancel against phi
    const auto rc = emac::nl_residual(Formulation::Conv, u);
    EXPECT_GT(std::abs(emac::dot(rc, phi.coefficients())), 1e-6 * scale(rc, phi.coefficients()));
  }
}

TEST_F(FormsTest, LinearizedMomentumCancellation) {
  const auto strip = emac::boundary_strip_dofs(*space);
  auto e1 = emac::interpolate_velocity(space, [](const emac::Vec2&) { return emac::Vec2{1, 0}; });
  auto phi = emac::interpolate_velocity(space, [](const emac::Vec2& p) { return emac::Vec2{p.y, -p.x}; });
  for (FEFunction* f : {&e1, &phi})
    for (int d : boundary) f->coefficients()[d] = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto us = oracle::random_velocity(space, rng, strip);
    const auto um = oracle::random_velocity(space, rng, strip);
    auto lin = emac::nl_jacobian(Formulation::Emac, us) * um.coefficients();
    const auto corr = emac::emac_newton_rhs_correction(us);
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] -= corr[i];
    for (const FEFunction* f : {&e1, &phi})
      EXPECT_LE(std::abs(emac::dot(lin, f->coefficients())), 1e-12 * scale(lin, f->coefficients()));
  }
}

TEST_F(FormsTest, SpaceMismatchRejected) {
  const auto other = oracle::square_space(4);
  const FEFunction a(space, emac::FieldKind::Velocity), b(other, emac::FieldKind::Velocity);
  EXPECT_THROW(emac::trilinear_b(a, a, b), std::invalid_argument);
  const FEFunction p(space, emac::FieldKind::Pressure);
  EXPECT_THROW(emac::nl_residual(Formulation::Emac, p), std::invalid_argument);
  EXPECT_THROW(emac::nl_residual(static_cast<Formulation>(42), a), std::invalid_argument);
}

}  // namespace
