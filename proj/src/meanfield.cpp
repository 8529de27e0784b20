#include "twostage/meanfield.hpp"

#include <cmath>

#include "twostage/errors.hpp"

namespace twostage {

MomentMatrix build_moment_matrix(int d, const ProcessParams& p) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  p.validate();
  MomentMatrix g;
  g.entries = {{{-1.0, p.gamma}, {2.0 * d * p.lambda, -(1.0 + p.gamma + p.delta)}}};
  return g;
}

std::pair<std::complex<double>, std::complex<double>> eigenvalues(const MomentMatrix& g) {
  using C = std::complex<double>;
  const double tr = g.trace();
  const double det = g.det();
  // tr^2 - 4 det written as (a - d)^2 + 4bc to avoid cancellation
  const double gap = g.entries[0][0] - g.entries[1][1];
  const double disc = gap * gap + 4.0 * g.entries[0][1] * g.entries[1][0];
  if (disc < 0.0) {
    const double im = std::sqrt(-disc) / 2.0;
    return {C(tr / 2.0, im), C(tr / 2.0, -im)};
  }
  // larger-magnitude root first, the other from the product of roots
  const double s = std::sqrt(disc);
  const double big = tr >= 0.0 ? (tr + s) / 2.0 : (tr - s) / 2.0;
  const double small = big != 0.0 ? det / big : 0.0;
  return {C(std::max(big, small)), C(std::min(big, small))};
}

double max_real_eigenvalue(int d, const ProcessParams& p) {
  return eigenvalues(build_moment_matrix(d, p)).first.real();
}

bool is_subcritical(int d, const ProcessParams& p) {
  return 2.0 * d * p.lambda * p.gamma < 1.0 + p.gamma + p.delta;
}

Moments solve_moments(int d, const ProcessParams& p, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("t must be finite and non-negative");
  const MomentMatrix g = build_moment_matrix(d, p);
  const auto [c1, c2] = eigenvalues(g);
  using C = std::complex<double>;
  // x(t) = exp(G t) (1, 0)^T, so only the first column of exp(G t) is needed.
  const C g00 = g.entries[0][0];
  const C g10 = g.entries[1][0];
  if (std::abs(c1 - c2) < kRepeatedRootTolerance) {
    // exp(Gt) = e^{ct} (I + t (G - c I))
    const C c = (c1 + c2) / 2.0;
    const C e = std::exp(c * t);
    return {(e * (1.0 + t * (g00 - c))).real(), (e * t * g10).real()};
  }
  // exp(Gt) = (e^{c1 t} (G - c2 I) - e^{c2 t} (G - c1 I)) / (c1 - c2)
  const C e1 = std::exp(c1 * t);
  const C e2 = std::exp(c2 * t);
  const C zeta = (e1 * (g00 - c2) - e2 * (g00 - c1)) / (c1 - c2);
  const C theta = (e1 - e2) * g10 / (c1 - c2);
  return {zeta.real(), theta.real()};
}

double lower_bound_lambda(int d, double gamma, double delta) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be non-negative");
  return (1.0 + (1.0 + delta) / gamma) / (2.0 * d);
}

}  // namespace twostage
