#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "emac/bench.hpp"
#include "oracle.hpp"

namespace {

namespace fs = std::filesystem;

TEST(Gresho, BranchValues) {
  const auto v = emac::gresho_exact(0.3, 0.0).velocity;
  EXPECT_NEAR(v.x, 0.0, 1e-15);
  EXPECT_NEAR(v.y, 0.5, 1e-15);
  for (double a = 0; a < 6.28; a += 0.5) {
    const double r = 0.2;
    const auto in = emac::gresho_exact(0.999999 * r * std::cos(a), 0.999999 * r * std::sin(a));
    const auto out = emac::gresho_exact(1.000001 * r * std::cos(a), 1.000001 * r * std::sin(a));
    EXPECT_NEAR(emac::norm(in.velocity), 1.0, 1e-5);
    EXPECT_NEAR(emac::norm(out.velocity), 1.0, 1e-5);
    EXPECT_NEAR(in.pressure, out.pressure, 1e-5);
    const auto far = emac::gresho_exact(0.45 * std::cos(a), 0.45 * std::sin(a));
    EXPECT_EQ(far.velocity, (emac::Vec2{}));
    EXPECT_EQ(far.pressure, 0.0);
    const auto edge = emac::gresho_exact(0.400001 * std::cos(a), 0.400001 * std::sin(a));
    const auto inside = emac::gresho_exact(0.399999 * std::cos(a), 0.399999 * std::sin(a));
    EXPECT_NEAR(inside.pressure, edge.pressure, 1e-5);
  }
}

TEST(Gresho, PressureConstants) {
  EXPECT_NEAR(emac::gresho_c2(), 6.0 - 4.0 * std::log(0.4), 1e-15);
  EXPECT_NEAR(emac::gresho_c1(), emac::gresho_c2() - 20 * 0.2 + 4 * std::log(0.2), 1e-15);
}

TEST(Gresho, SteadyEulerSolution) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  int checked = 0;
  while (checked < 1000) {
    const double x = u(rng), y = u(rng), r = std::hypot(x, y);
    if (std::abs(r - 0.2) < 1e-3 || std::abs(r - 0.4) < 1e-3 || r < 1e-3) continue;
    ++checked;
    // analytic velocity gradient and pressure gradient dp/dr (x, y)/r per branch
    oracle::Grad g;
    emac::Vec2 v;
    double dpdr = 0.0;
    if (r < 0.2) {
      v = {-5 * y, 5 * x};
      g = {0, -5, 5, 0};
      dpdr = 25 * r;
    } else if (r < 0.4) {
      const double r3 = r * r * r;
      v = {-2 * y / r + 5 * y, 2 * x / r - 5 * x};
      g = {2 * x * y / r3, -2 / r + 2 * y * y / r3 + 5, 2 / r - 2 * x * x / r3 - 5, -2 * x * y / r3};
      dpdr = 25 * r - 20 + 4 / r;
    }
    const auto ex = emac::gresho_exact(x, y);
    EXPECT_NEAR(ex.velocity.x, v.x, 1e-14);
    EXPECT_NEAR(ex.velocity.y, v.y, 1e-14);
    const emac::Vec2 res = oracle::apply(g, v) + (dpdr / r) * emac::Vec2{x, y};
    EXPECT_LT(emac::norm(res), 1e-10) << x << ' ' << y;
    EXPECT_LT(std::abs(oracle::div(g)), 1e-12);
    // pressure derivative consistent with the library's pressure
    const double h = 1e-6;
    const double dp = (emac::gresho_exact(x * (1 + h / r), y * (1 + h / r)).pressure -
                       emac::gresho_exact(x * (1 - h / r), y * (1 - h / r)).pressure) /
                      (2 * h);
    EXPECT_NEAR(dp, dpdr, 1e-6 * (1 + std::abs(dpdr)));
  }
}

TEST(Lattice, Values) {
  const auto v = emac::lattice_exact(0.25, 0.25, 0.0, 1e-7).velocity;
  EXPECT_NEAR(v.x, 1.0, 1e-15);
  EXPECT_NEAR(v.y, 0.0, 1e-15);
  const double f = std::exp(-8 * 1e-7 * M_PI * M_PI * 10);
  // 8 pi^2 1e-6 = 7.8957e-5
  EXPECT_NEAR(f, 1.0 - 7.8957e-5, 1e-8);
  const auto a = emac::lattice_exact(0.1, 0.7, 0.0, 1e-7), b = emac::lattice_exact(0.1, 0.7, 10.0, 1e-7);
  EXPECT_NEAR(b.velocity.x, f * a.velocity.x, 1e-15);
  EXPECT_NEAR(b.velocity.y, f * a.velocity.y, 1e-15);
  EXPECT_NEAR(b.pressure, f * f * a.pressure, 1e-15);
}

TEST(Lattice, DivergenceFreeAndEulerSteady) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto vel = [](double x, double y) { return emac::lattice_exact(x, y, 0.0, 0.0).velocity; };
  const auto pre = [](double x, double y) { return emac::lattice_exact(x, y, 0.0, 0.0).pressure; };
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng);
    // analytic gradient of v = (sin a sin b, cos a cos b), a = 2 pi x, b = 2 pi y
    const double k = 2 * M_PI, sa = std::sin(k * x), ca = std::cos(k * x), sb = std::sin(k * y), cb = std::cos(k * y);
    const oracle::Grad g{k * ca * sb, k * sa * cb, -k * sa * cb, -k * ca * sb};
    EXPECT_LT(std::abs(oracle::div(g)), 1e-12);
    const emac::Vec2 v = vel(x, y);
    EXPECT_NEAR(v.x, sa * sb, 1e-15);
    EXPECT_NEAR(v.y, ca * cb, 1e-15);
    // q = -(sin^2 a + cos^2 b)/2
    const emac::Vec2 gq{-k * sa * ca, k * cb * sb};
    EXPECT_NEAR(pre(x, y), -0.5 * (sa * sa + cb * cb), 1e-15);
    const emac::Vec2 res = oracle::apply(g, v) + gq;
    EXPECT_LT(emac::norm(res), 1e-10);
  }
}

TEST(Lattice, ZeroMeanVelocity) {
  const auto space = oracle::square_space(16);
  for (double t : {0.0, 3.0}) {
    const auto ui = emac::interpolate_velocity(space, [&](const emac::Vec2& p) { return emac::lattice_exact(p.x, p.y, t, 1e-3).velocity; });
    EXPECT_NEAR(emac::linear_momentum(ui).x, 0.0, 1e-14);
    EXPECT_NEAR(emac::linear_momentum(ui).y, 0.0, 1e-14);
  }
}

TEST(Problems, Defaults) {
  EXPECT_EQ(emac::default_viscosity("gresho"), 0.0);
  EXPECT_EQ(emac::default_viscosity("lattice"), 1e-7);
  EXPECT_THROW(emac::make_benchmark("cylinder", 0.0), std::invalid_argument);
  const auto g = emac::gresho_problem();
  EXPECT_FALSE(g.exact_trace_boundary);
  EXPECT_EQ(g.default_nx, 48);
  const auto l = emac::lattice_problem();
  EXPECT_TRUE(l.exact_trace_boundary);
  EXPECT_EQ(l.default_nx, 32);
  EXPECT_EQ(l.domain.xmin, 0.0);
  EXPECT_EQ(g.domain.xmin, -0.5);
}

TEST(Identities, DefaultBatteryPasses) {
  const auto report = emac::verify_identities({});
  EXPECT_EQ(report.results.size(), 12u);
  for (const auto& r : report.results) {
    EXPECT_EQ(r.trials, 100);
    EXPECT_LE(r.max_violation, 1e-12) << r.name;
  }
  EXPECT_TRUE(report.passed(1e-12));
}

TEST(Identities, SeedSweep) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    emac::IdentityOptions o;
    o.seed = seed;
    o.trials = 10;
    o.nx = 4;
    EXPECT_TRUE(emac::verify_identities(o).passed(1e-12)) << seed;
  }
}

TEST(Identities, BoundaryHypothesisMatters) {
  emac::IdentityOptions o;
  o.zero_boundary = false;
  o.trials = 5;
  const auto report = emac::verify_identities(o);
  bool vecid1_failed = false;
  for (const auto& r : report.results)
    if (r.name == "vecid1") vecid1_failed = r.max_violation > 1e-12;
  EXPECT_TRUE(vecid1_failed);
  EXPECT_FALSE(report.passed(1e-12));
}

TEST(Identities, CsvFormat) {
  emac::IdentityReport report{{{"vecid1", 3, 1e-15}, {"econs", 3, 1e-3}}};
  std::ostringstream out;
  emac::write_identity_csv(report, 1e-12, out);
  EXPECT_EQ(out.str(), "identity,trials,max_relative_violation,passed\nvecid1,3,1.000000e-15,true\necons,3,1.000000e-03,false\n");
}

TEST(Identities, RandomVelocityReproducible) {
  const auto space = oracle::square_space(3);
  const std::vector<int> zero{0, 5};
  const auto a = emac::random_velocity(space, 7, zero), b = emac::random_velocity(space, 7, zero);
  EXPECT_TRUE(std::ranges::equal(a.coefficients(), b.coefficients()));
  EXPECT_EQ(a.coefficients()[5], 0.0);
  for (double c : a.coefficients()) EXPECT_LE(std::abs(c), 1.0);
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

TEST(Svg, EmptySeriesGivesAxes) {
  std::ostringstream out;
  const std::vector<emac::Chart> charts{{"energy", "t", "E", {}}};
  emac::write_svg(charts, out);
  const std::string s = out.str();
  EXPECT_NE(s.find("<svg"), std::string::npos);
  EXPECT_NE(s.find("version=\"1.1\""), std::string::npos);
  EXPECT_EQ(count(s, "<polyline"), 0u);
  EXPECT_EQ(count(s, "<rect x="), 1u);
}

TEST(Svg, ConstantSeriesIsHorizontal) {
  std::ostringstream out;
  const std::vector<emac::Chart> charts{{"energy", "t", "E", {{"run", {0, 1, 2}, {0.3, 0.3, 0.3}}}}};
  emac::write_svg(charts, out);
  const std::string s = out.str();
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(s, m, pts));
  std::istringstream in(m[1].str());
  std::string pair;
  std::set<std::string> ys;
  while (in >> pair) ys.insert(pair.substr(pair.find(',') + 1));
  EXPECT_EQ(ys.size(), 1u);
}

TEST(Svg, TwoRunsTwoLegendEntries) {
  std::vector<std::pair<std::string, std::vector<emac::DiagnosticsRecord>>> runs(2);
  runs[0].first = "emac/full";
  runs[1].first = "emac/skewlin & more";
  for (int i = 0; i < 5; ++i) {
    emac::DiagnosticsRecord r;
    r.step = i;
    r.t = 0.1 * i;
    r.energy = 1 + i;
    runs[0].second.push_back(r);
    r.energy = 2 - 0.1 * i;
    runs[1].second.push_back(r);
  }
  const auto charts = emac::diagnostics_charts(runs);
  EXPECT_EQ(charts.size(), 4u);
  std::ostringstream out;
  emac::write_svg(charts, out);
  const std::string s = out.str();
  EXPECT_EQ(count(s, "<polyline"), 8u);
  EXPECT_EQ(count(s, ">emac/full</text>"), 4u);
  EXPECT_EQ(count(s, ">emac/skewlin &amp; more</text>"), 4u);
  EXPECT_NE(s.find("#1f77b4"), std::string::npos);
  EXPECT_NE(s.find("#d62728"), std::string::npos);
}

TEST(Convergence, FittedSlope) {
  const std::vector<double> x{0.1, 0.05, 0.025}, y{3e-2, 7.5e-3, 1.875e-3};
  EXPECT_NEAR(emac::fitted_log_slope(x, y), 2.0, 1e-12);
  EXPECT_THROW(emac::fitted_log_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / ("emac_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                              ::testing::UnitTest::GetInstance()->current_test_info()->name());
  void SetUp() override { fs::create_directories(dir); }
  void TearDown() override { fs::remove_all(dir); }

  static int run(std::vector<std::string> args) {
    args.insert(args.begin(), "emacns");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return emac::cli_main(static_cast<int>(argv.size()), argv.data());
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

TEST_F(CliTest, GreshoShortRunWritesCsvAndSvg) {
  const auto csv = dir / "g.csv", svg = dir / "g.svg";
  EXPECT_EQ(run({"gresho", "--nx", "6", "--t-end", "0.05", "--out", csv.string(), "--svg", svg.string()}), 0);
  const auto records = emac::read_csv(csv);
  EXPECT_EQ(records.size(), 6u);
  EXPECT_EQ(records.back().step, 5);
  EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
}

TEST_F(CliTest, DeterministicOutput) {
  const auto a = dir / "a.csv", b = dir / "b.csv";
  ASSERT_EQ(run({"lattice", "--nx", "6", "--t-end", "0.04", "--mode", "newton2", "--out", a.string()}), 0);
  ASSERT_EQ(run({"lattice", "--nx", "6", "--t-end", "0.04", "--mode", "newton2", "--out", b.string()}), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto rec = emac::read_csv(a);
  ASSERT_EQ(rec.size(), 5u);
  EXPECT_TRUE(rec[2].l2_error.has_value());
}

TEST_F(CliTest, VtkDumps) {
  const auto csv = dir / "v.csv";
  ASSERT_EQ(run({"gresho", "--nx", "4", "--t-end", "0.04", "--vtk-every", "2", "--out", csv.string()}), 0);
  EXPECT_TRUE(fs::exists(dir / "v_000000.vtk"));
  EXPECT_TRUE(fs::exists(dir / "v_000002.vtk"));
  EXPECT_TRUE(fs::exists(dir / "v_000004.vtk"));
  EXPECT_FALSE(fs::exists(dir / "v_000001.vtk"));
  EXPECT_NE(slurp(dir / "v_000002.vtk").find("VECTORS velocity"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  const auto out = (dir / "x.csv").string();
  EXPECT_EQ(run({"gresho", "--mode", "skewlin", "--form", "conv", "--out", out}), 1);
  EXPECT_EQ(run({"gresho", "--form", "upwind", "--out", out}), 1);
  EXPECT_EQ(run({"gresho", "--bogus", "--out", out}), 1);
  EXPECT_EQ(run({"gresho"}), 1);
  EXPECT_EQ(run({"gresho", "--dt", "0.03", "--t-end", "0.1", "--out", out}), 1);
  EXPECT_EQ(run({}), 1);
}

TEST_F(CliTest, IdentitiesSubcommand) {
  const auto csv = dir / "i.csv";
  EXPECT_EQ(run({"identities", "--seed", "7", "--out", csv.string()}), 0);
  const std::string s = slurp(csv);
  EXPECT_EQ(s.rfind("identity,trials,max_relative_violation,passed\n", 0), 0u);
  EXPECT_EQ(count(s, ",true\n"), 12u);
  EXPECT_EQ(run({"identities", "--keep-boundary", "--trials", "3", "--out", csv.string()}), 1);
}

TEST_F(CliTest, ConvergenceSubcommand) {
  const auto csv = dir / "c.csv";
  EXPECT_EQ(run({"convergence", "--problem", "lattice", "--nx", "4", "--dt", "0.02", "--t-end", "0.04", "--levels", "2",
                 "--out", csv.string()}),
            0);
  const std::string s = slurp(csv);
  EXPECT_EQ(s.rfind("dt,difference_to_reference,exact_error,pairwise_order\n", 0), 0u);
  EXPECT_EQ(count(s, "\n"), 3u);
}

}  // namespace
