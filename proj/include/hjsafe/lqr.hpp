#pragma once

#include <vector>

namespace hjsafe {

/// Continuous-time LQR gain for xdot = A x + B u with cost
/// integral(x'Qx + u'Ru). Solves the Riccati equation by integrating the
/// matrix ODE to stationarity. Matrices are row-major, n x n / n x m.
struct LqrGain {
  std::size_t state_dim = 0;
  std::size_t control_dim = 0;
  std::vector<double> k;  // m x n, row-major: u = -K (x - x_ref) + u_ff

  double at(std::size_t row, std::size_t col) const { return k[row * state_dim + col]; }
};

LqrGain lqr_gain(std::size_t n, std::size_t m, const std::vector<double>& a,
                 const std::vector<double>& b, const std::vector<double>& q,
                 const std::vector<double>& r);

/// Real parts of the closed-loop eigenvalues of A - B K; all must be
/// negative for a stabilizing gain.
std::vector<double> closed_loop_real_parts(std::size_t n, std::size_t m,
                                           const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           const LqrGain& gain);

}  // namespace hjsafe
