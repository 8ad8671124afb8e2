// Coin and density-operator types, their validation, and the basic
// channel/support primitives shared by every other component.
#pragma once

#include <oqw/numeric.hpp>

#include <optional>
#include <vector>

namespace oqw {

// One-dimensional walk coin (L, B, R): move left, stay, move right.
// A non-lazy coin has B identically zero.
struct Coin1D {
  CMat L, B, R;
  bool lazy = true;  // false means B was absent and is forced to zero

  Eigen::Index dim() const { return L.rows(); }
  std::vector<CMat> kraus() const {
    if (lazy) return {L, B, R};
    return {L, R};
  }
};

// Two-dimensional discrete coin: D1 right, D2 up, D3 left, D4 down.
struct Coin2D {
  CMat D1, D2, D3, D4;

  Eigen::Index dim() const { return D1.rows(); }
  std::vector<CMat> kraus() const { return {D1, D2, D3, D4}; }
};

// Continuous-time coin (A1..A4, H): jump operators in the four lattice
// directions plus a self-adjoint on-site Hamiltonian.  G is derived once at
// construction: G = -iH - (1/2) sum_k Ak* Ak.
struct CoinCT {
  CMat A1, A2, A3, A4, H;
  CMat G;

  Eigen::Index dim() const { return H.rows(); }
  std::vector<CMat> jumps() const { return {A1, A2, A3, A4}; }
};

CoinCT make_coin_ct(CMat A1, CMat A2, CMat A3, CMat A4, CMat H);

// A positive-semidefinite, trace-one matrix.  Construction validates.
struct DensityOperator {
  CMat matrix;

  explicit DensityOperator(CMat M, const NumericPolicy& pol = default_policy());
  Eigen::Index dim() const { return matrix.rows(); }
};

struct ValidationReport {
  bool ok = false;
  double deficiency = 0.0;            // Frobenius norm of the failing residual
  std::vector<std::string> messages;  // per-invariant results, fixed order
};

// Checks the defining identity of each coin kind at tolerance pol.coin_tol:
// L*L+B*B+R*R = I, sum Dj*Dj = I, or H = H* (CT coins carry no
// normalization constraint; their deficiency is the Hermiticity residual).
ValidationReport validate_coin(const Coin1D& c, const NumericPolicy& pol = default_policy());
ValidationReport validate_coin(const Coin2D& c, const NumericPolicy& pol = default_policy());
ValidationReport validate_coin(const CoinCT& c, const NumericPolicy& pol = default_policy());

// True iff rho is positive definite (all eigenvalues beyond the support cut).
bool is_faithful(const DensityOperator& rho, const NumericPolicy& pol = default_policy());

// Orthogonal projector onto the span of eigenvectors of a Hermitian PSD M
// with eigenvalue above pol.support_rel * ||M||_2.
CMat support_projector(const CMat& M, const NumericPolicy& pol = default_policy());

// sum_k K rho K* for an arbitrary Kraus family.
CMat apply_channel(const std::vector<CMat>& kraus, const CMat& rho);

}  // namespace oqw
