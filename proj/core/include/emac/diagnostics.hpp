#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "emac/space.hpp"

namespace emac {

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  double energy = 0.0;
  double momentum_x = 0.0;
  double momentum_y = 0.0;
  double ang_momentum = 0.0;
  double div_norm = 0.0;
  std::optional<double> l2_error;
  int newton_iters = 0;
  double nonlinear_residual = 0.0;
  bool diverged = false;

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// 1/2 (u, u)
double kinetic_energy(const FEFunction& u);
/// Integral of each velocity component.
Vec2 linear_momentum(const FEFunction& u);
/// Integral of u_1 y - u_2 x.
double angular_momentum(const FEFunction& u);
/// L2 norm of div u.
double div_l2_norm(const FEFunction& u);

using TimeVelocityFunction = std::function<Vec2(const Vec2&, double)>;

/// ||u - exact(., t)|| with a degree-8 rule.
double l2_error(const FEFunction& u, const TimeVelocityFunction& exact, double t);

inline constexpr const char* csv_header =
    "step,t,energy,momentum_x,momentum_y,ang_momentum,div_norm,l2_error,newton_iters,nonlinear_residual,diverged";

/// One CSV row without line terminator; doubles in round-trip precision.
std::string format_csv_row(const DiagnosticsRecord& record);
void write_csv(std::span<const DiagnosticsRecord> records, std::ostream& out);
/// Throws std::runtime_error naming the path when the file cannot be written.
void write_csv(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path);

/// Inverse of write_csv; throws std::runtime_error on malformed input.
std::vector<DiagnosticsRecord> read_csv(std::istream& in);
std::vector<DiagnosticsRecord> read_csv(const std::filesystem::path& path);

}  // namespace emac
