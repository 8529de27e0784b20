#pragma once

#include <array>
#include <complex>
#include <utility>

#include "twostage/engine.hpp"

namespace twostage {

/// Generator of the first-moment equations of the linear system started from
/// (1, 0) everywhere: d/dt (E zeta, E theta) = G (E zeta, E theta).
struct MomentMatrix {
  // rows/cols ordered (zeta, theta)
  std::array<std::array<double, 2>, 2> entries{};

  double trace() const { return entries[0][0] + entries[1][1]; }
  double det() const { return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0]; }
};

/// [[-1, gamma], [2 d lambda, -(1 + gamma + delta)]]
MomentMatrix build_moment_matrix(int d, const ProcessParams& p);

/// Roots of mu^2 - tr(G) mu + det(G), ordered by real part, largest first.
std::pair<std::complex<double>, std::complex<double>> eigenvalues(const MomentMatrix& g);

double max_real_eigenvalue(int d, const ProcessParams& p);

/// 2 d lambda gamma < 1 + gamma + delta, i.e. both eigenvalues have negative real part.
bool is_subcritical(int d, const ProcessParams& p);

struct Moments {
  double zeta = 0.0;
  double theta = 0.0;
};

/// Closed-form (E zeta_t(O), E theta_t(O)) from the initial vector (1, 0).
Moments solve_moments(int d, const ProcessParams& p, double t);

/// Threshold below which the first moments decay: (1 / 2d) (1 + (1 + delta) / gamma).
double lower_bound_lambda(int d, double gamma, double delta);

/// Eigenvalues closer than this are treated as a repeated root.
inline constexpr double kRepeatedRootTolerance = 1e-12;

}  // namespace twostage
