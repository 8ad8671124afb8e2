// Shared test utilities: deterministic random coins and density matrices.
#pragma once

#include <oqw/qcore.hpp>

#include <Eigen/QR>

#include <random>
#include <vector>

namespace oqw::testutil {

inline CMat randn(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  CMat M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = Complex(nd(g), nd(g));
  return M;
}

// k Kraus blocks forming an exact partition of unity: stack a (k*d) x d
// Gaussian matrix, orthonormalize, slice.
inline std::vector<CMat> random_kraus(std::mt19937_64& g, Eigen::Index d, int k) {
  const CMat M = randn(g, k * d, d);
  Eigen::HouseholderQR<CMat> qr(M);
  const CMat Q = qr.householderQ() * CMat::Identity(k * d, d);
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(Q.block(i * d, 0, d, d));
  return out;
}

inline Coin1D random_coin_1d(std::mt19937_64& g, Eigen::Index d, bool lazy) {
  const auto ks = random_kraus(g, d, lazy ? 3 : 2);
  Coin1D c;
  c.L = ks[0];
  c.B = lazy ? ks[1] : CMat::Zero(d, d);
  c.R = lazy ? ks[2] : ks[1];
  c.lazy = lazy;
  return c;
}

inline Coin2D random_coin_2d(std::mt19937_64& g, Eigen::Index d) {
  const auto ks = random_kraus(g, d, 4);
  return Coin2D{ks[0], ks[1], ks[2], ks[3]};
}

inline CoinCT random_coin_ct(std::mt19937_64& g, Eigen::Index d) {
  const double scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
  const CMat A1 = scale * randn(g, d, d);
  const CMat A2 = scale * randn(g, d, d);
  const CMat A3 = scale * randn(g, d, d);
  const CMat A4 = scale * randn(g, d, d);
  const CMat X = randn(g, d, d);
  const CMat H = 0.5 * (X + X.adjoint());
  return make_coin_ct(A1, A2, A3, A4, H);
}

inline CMat random_density(std::mt19937_64& g, Eigen::Index d) {
  const CMat X = randn(g, d, d);
  CMat rho = X * X.adjoint();
  return rho / rho.trace().real();
}

// A random density supported inside ran(P) for a projector P.
inline CMat random_supported_density(std::mt19937_64& g, const CMat& P) {
  const CMat X = P * randn(g, P.rows(), P.cols()) * P;
  CMat rho = X * X.adjoint();
  const double tr = rho.trace().real();
  if (tr <= 0.0) return P / P.trace().real();
  return rho / tr;
}

}  // namespace oqw::testutil
