#include "hjsafe/lqr.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace hjsafe {

namespace {

Eigen::MatrixXd as_matrix(std::size_t rows, std::size_t cols,
                          const std::vector<double>& data, const char* what) {
  if (data.size() != rows * cols) throw std::invalid_argument(std::string(what) + ": size mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = data[i * cols + j];
  return m;
}

}  // namespace

LqrGain lqr_gain(std::size_t n, std::size_t m, const std::vector<double>& a,
                 const std::vector<double>& b, const std::vector<double>& q,
                 const std::vector<double>& r) {
  const auto A = as_matrix(n, n, a, "A");
  const auto B = as_matrix(n, m, b, "B");
  const auto Q = as_matrix(n, n, q, "Q");
  const auto R = as_matrix(m, m, r, "R");
  const Eigen::MatrixXd Rinv = R.inverse();

  // integrate Pdot = A'P + PA - P B R^-1 B' P + Q to stationarity
  Eigen::MatrixXd P = Q;
  const double h = 5e-4;
  for (int iter = 0; iter < 2000000; ++iter) {
    Eigen::MatrixXd Pdot = A.transpose() * P + P * A - P * B * Rinv * B.transpose() * P + Q;
    P += h * Pdot;
    if (iter % 200 == 0 && Pdot.norm() < 1e-9 * std::max(1.0, P.norm())) break;
  }

  Eigen::MatrixXd K = Rinv * B.transpose() * P;
  LqrGain gain;
  gain.state_dim = n;
  gain.control_dim = m;
  gain.k.resize(n * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) gain.k[i * n + j] = K(i, j);
  return gain;
}

std::vector<double> closed_loop_real_parts(std::size_t n, std::size_t m,
                                           const std::vector<double>& a,
                                           const std::vector<double>& b,
                                           const LqrGain& gain) {
  const auto A = as_matrix(n, n, a, "A");
  const auto B = as_matrix(n, m, b, "B");
  const auto K = as_matrix(m, n, gain.k, "K");
  Eigen::EigenSolver<Eigen::MatrixXd> eig(A - B * K);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = eig.eigenvalues()(i).real();
  return out;
}

}  // namespace hjsafe
