// Recurrence/transience classification of homogeneous open quantum walks on
// Z and Z^2: drift functionals, the ergodic and dimension-2 criteria, the
// generalized enclosure criterion, and per-density queries.
#pragma once

#include <oqw/spectral.hpp>

#include <string>
#include <vector>

namespace oqw {

// Raised when no proved criterion covers the input (CLI exit code 3).
struct NoCriterionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VerdictKind { Recurrent, Transient, Split };

const char* to_string(VerdictKind k);

struct DriftVector {
  double m1 = 0.0;
  double m2 = 0.0;
  double norm() const { return std::hypot(m1, m2); }
};

// Per-enclosure classification record.
struct EnclosureReport {
  int label = 0;
  Eigen::Index rank = 0;
  std::vector<double> m;  // one component on Z, two on Z^2
  bool recurrent = false;
  CMat projector;  // enclosure projector in the full coin space
};

// Classification result.  Semantics: a density rho is transient iff its
// reachable support misses every recurrent enclosure; for supp(rho) inside
// the recurrent subspace this reduces to supp(rho) <= ran(P_T).
struct Verdict {
  VerdictKind kind = VerdictKind::Recurrent;
  std::string criterion;
  CMat transient_projector;  // P_T: 0 / I / sum of transient enclosure projectors
  CMat residual_projector;   // P_X of the underlying decomposition (0 if none)
  std::vector<EnclosureReport> enclosures;
};

enum class StateClass { Recurrent, Transient };

// m = Tr(R tau R*) - Tr(L tau L*).
double drift_1d(const Coin1D& coin, const CMat& tau);

// (m1, m2) = (Tr D1.D1* - Tr D3.D3*, Tr D2.D2* - Tr D4.D4*) on tau; the
// continuous-time overload uses the jump operators A_j in place of D_j.
DriftVector drift_2d(const Coin2D& coin, const CMat& tau);
DriftVector drift_2d(const CoinCT& coin, const CMat& tau);

// Criterion for ergodic auxiliary channels: recurrent iff the drift at the
// unique invariant state vanishes.  Throws if the channel is not ergodic.
Verdict classify_ergodic_1d(const Coin1D& coin, const NumericPolicy& pol = default_policy());

// Dimension-2 criterion: if L, B, R share two orthogonal common eigenvectors
// u_j, compare |l_j| with |r_j| per component; otherwise delegate to the
// ergodic criterion.
Verdict classify_dim2_lazy(const Coin1D& coin, const NumericPolicy& pol = default_policy());

// Generalized criterion for non-lazy coins: decompose the auxiliary channel
// into minimal enclosures and mark each by Tr(L tau_a L*) = 1/2.
Verdict classify_general_1d(const Coin1D& coin, const NumericPolicy& pol = default_policy());

// Public entry point.  Dispatch: ergodic -> dimension-2 -> general non-lazy
// -> NoCriterionError.  Rejects trivial coins (some eigenvalue of L, B, R of
// modulus >= 1 - 1e-12).
Verdict classify_1d(const Coin1D& coin, const NumericPolicy& pol = default_policy());

// Per-density query: recurrent iff the reachable support of rho meets some
// recurrent enclosure.
StateClass classify_state_1d(const Coin1D& coin, const CMat& rho,
                             const NumericPolicy& pol = default_policy());

// Generalized criterion on Z^2 (discrete coins): identical aggregation with
// drift vectors, recurrent iff ||m_a||_2 <= pol.drift_zero.
Verdict classify_2d_discrete(const Coin2D& coin, const NumericPolicy& pol = default_policy());

// Continuous-time criterion on Z^2 via decompose_ct.
Verdict classify_2d_ct(const CoinCT& coin, const NumericPolicy& pol = default_policy());

// Jump chain of a discrete 2D coin: A_j = D_j, H = 0 (so G = -I/2); the lift
// classifies identically to the discrete coin.
CoinCT jump_chain_lift(const Coin2D& coin);

}  // namespace oqw
