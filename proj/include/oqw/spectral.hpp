// Spectral analysis of quantum channels and Lindblad generators:
// superoperator construction, fixed-point spaces, maximal invariant states,
// enclosure decomposition, ergodicity, reachable supports, and absorption
// operators.
#pragma once

#include <oqw/qcore.hpp>

#include <vector>

namespace oqw {

// Matrix realization of a map on d x d matrices under column-major
// vectorization: apply(X) = unvec(matrix * vec(X)).
struct Superoperator {
  Eigen::Index dim = 0;  // d, so matrix is d^2 x d^2
  CMat matrix;

  CMat apply(const CMat& X) const { return unvec(matrix * vec(X)); }
};

// S = sum_k conj(K_k) (x) K_k, so that S vec(X) = vec(sum_k K X K*).
Superoperator superoperator(const std::vector<CMat>& kraus);

// Matrix of rho -> G rho + rho G* + sum_j Aj rho Aj*.
Superoperator lindblad_superoperator(const CoinCT& coin);

// One enclosure: an invariant subspace carrying a unique invariant state.
struct Enclosure {
  CMat projector;  // orthogonal projector onto the subspace
  CMat tau;        // the invariant state supported exactly on it
  int label = 0;
};

struct ChannelDecomposition {
  std::vector<Enclosure> enclosures;
  CMat transient_projector;  // P_X = I - sum P_alpha
  CMat recurrent_projector;  // P_R = sum P_alpha
};

// Deterministic isometry onto ran(P): modified Gram-Schmidt over the columns
// of P in index order.  Shared by the decomposition recursion and tests.
CMat projector_isometry(const CMat& P);

// Invariant state with maximal support (the recurrent subspace R equals its
// support).  Computed by the spectral projector onto the eigenvalue-1
// cluster applied to vec(I/d); throws if the fixed-point residual exceeds
// pol.fixed_point_tol.
CMat invariant_state_maximal(const Superoperator& S, const NumericPolicy& pol = default_policy());

// Splits the recurrent subspace into mutually orthogonal minimal enclosures,
// each with its invariant state; P_X is the orthocomplement.  Deterministic:
// Hermitian traceless fixed points are drawn from the canonical Hermitian
// basis in fixed order and the negative-part block recurses first.
ChannelDecomposition decompose(const Superoperator& S, const NumericPolicy& pol = default_policy());

// decompose() of the time-one semigroup map exp(L); invariant states are
// refined against the generator so that ||L(tau)||_F <= pol.fixed_point_tol_ct.
ChannelDecomposition decompose_ct(const CoinCT& coin, const NumericPolicy& pol = default_policy());

// True iff the eigenvalue-1 eigenspace of S is one-dimensional.
bool is_ergodic(const Superoperator& S, const NumericPolicy& pol = default_policy());

// Projector onto the smallest subspace containing supp(Phi^n(rho)) for all
// n >= 0, found by accumulating supports (fixed point in <= dim steps).
CMat reachable_support(const Superoperator& S, const CMat& rho,
                       const NumericPolicy& pol = default_policy());

// A(Y) = lim_n Phi*^n(P_Y) by plain dual power iteration; throws (with the
// last residual in the message) if the budget pol.absorb_cap is exhausted.
CMat absorption_operator(const Superoperator& S, const CMat& P_Y,
                         const NumericPolicy& pol = default_policy());

}  // namespace oqw
