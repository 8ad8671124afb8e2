#include <oqw/classify.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace oqw {

namespace {

double direction_trace(const CMat& T, const CMat& tau) { return (T * tau * T.adjoint()).trace().real(); }

// Assemble a Verdict from per-enclosure records: all recurrent -> Recurrent
// (P_T = 0), all transient -> Transient (P_T = I), otherwise Split with
// P_T the sum of the transient enclosure projectors.
Verdict aggregate(std::vector<EnclosureReport> records, CMat residual, const char* criterion,
                  Eigen::Index d) {
  Verdict v;
  v.criterion = criterion;
  v.residual_projector = std::move(residual);
  std::size_t nrec = 0;
  for (const EnclosureReport& r : records) nrec += r.recurrent ? 1 : 0;
  if (nrec == records.size()) {
    v.kind = VerdictKind::Recurrent;
    v.transient_projector = CMat::Zero(d, d);
  } else if (nrec == 0) {
    v.kind = VerdictKind::Transient;
    v.transient_projector = CMat::Identity(d, d);
  } else {
    v.kind = VerdictKind::Split;
    v.transient_projector = CMat::Zero(d, d);
    for (const EnclosureReport& r : records)
      if (!r.recurrent) v.transient_projector += r.projector;
  }
  v.enclosures = std::move(records);
  return v;
}

// Shared body of the generalized criteria: decompose, mark each enclosure,
// aggregate.  mark(tau) must return {drift components, recurrent flag}.
template <class MarkFn>
Verdict classify_by_decomposition(const ChannelDecomposition& dec, Eigen::Index d, MarkFn&& mark,
                                  const char* criterion) {
  std::vector<EnclosureReport> records;
  records.reserve(dec.enclosures.size());
  for (const Enclosure& e : dec.enclosures) {
    EnclosureReport r;
    r.label = e.label;
    r.rank = static_cast<Eigen::Index>(std::lround(e.projector.trace().real()));
    r.projector = e.projector;
    mark(e.tau, r);
    records.push_back(std::move(r));
  }
  return aggregate(std::move(records), dec.transient_projector, criterion, d);
}

// True if u is a common eigenvector of L, B and R within pol.eigvec_tol.
bool is_common_eigenvector(const Coin1D& coin, const CVec& u, const NumericPolicy& pol) {
  for (const CMat* T : {&coin.L, &coin.B, &coin.R}) {
    const CVec img = (*T) * u;
    const std::complex<double> lam = u.dot(img);  // u^H (T u)
    if ((img - lam * u).norm() > pol.eigvec_tol) return false;
  }
  return true;
}

void check_trivial_guard(const Coin1D& coin) {
  const char* names[] = {"L", "B", "R"};
  const CMat* mats[] = {&coin.L, &coin.B, &coin.R};
  for (int i = 0; i < 3; ++i) {
    Eigen::ComplexEigenSolver<CMat> es(*mats[i], /*computeEigenvectors=*/false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      if (std::abs(es.eigenvalues()(j)) >= 1.0 - 1e-12) {
        throw NoCriterionError(std::string("trivial walk: ") + names[i] +
                               " has an eigenvalue of modulus 1; the recurrence criteria exclude "
                               "this case");
      }
    }
  }
}

}  // namespace

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Recurrent: return "Recurrent";
    case VerdictKind::Transient: return "Transient";
    default: return "Split";
  }
}

double drift_1d(const Coin1D& coin, const CMat& tau) {
  require_same_dim(coin.L, tau, "drift_1d");
  return direction_trace(coin.R, tau) - direction_trace(coin.L, tau);
}

DriftVector drift_2d(const Coin2D& coin, const CMat& tau) {
  require_same_dim(coin.D1, tau, "drift_2d");
  return {direction_trace(coin.D1, tau) - direction_trace(coin.D3, tau),
          direction_trace(coin.D2, tau) - direction_trace(coin.D4, tau)};
}

DriftVector drift_2d(const CoinCT& coin, const CMat& tau) {
  require_same_dim(coin.A1, tau, "drift_2d");
  return {direction_trace(coin.A1, tau) - direction_trace(coin.A3, tau),
          direction_trace(coin.A2, tau) - direction_trace(coin.A4, tau)};
}

Verdict classify_ergodic_1d(const Coin1D& coin, const NumericPolicy& pol) {
  const Eigen::Index d = coin.dim();
  const Superoperator S = superoperator(coin.kraus());
  if (!is_ergodic(S, pol))
    throw std::invalid_argument(
        "classify_ergodic_1d: auxiliary channel is not ergodic; use classify_general_1d");
  const CMat tau = invariant_state_maximal(S, pol);
  const double m = drift_1d(coin, tau);

  EnclosureReport r;
  r.label = 0;
  r.projector = support_projector(tau, pol);
  r.rank = static_cast<Eigen::Index>(std::lround(r.projector.trace().real()));
  r.m = {m};
  r.recurrent = std::abs(m) <= pol.drift_zero;
  return aggregate({std::move(r)}, CMat::Zero(d, d), "ergodic", d);
}

Verdict classify_dim2_lazy(const Coin1D& coin, const NumericPolicy& pol) {
  if (coin.dim() != 2) throw std::invalid_argument("classify_dim2_lazy: coin dimension must be 2");

  // Candidate vectors: eigenvectors of L, then B, then R (deterministic
  // order); accept common eigenvectors that are mutually orthogonal.
  std::vector<CVec> accepted;
  for (const CMat* T : {&coin.L, &coin.B, &coin.R}) {
    Eigen::ComplexEigenSolver<CMat> es(*T, /*computeEigenvectors=*/true);
    for (Eigen::Index j = 0; j < 2 && accepted.size() < 2; ++j) {
      CVec u = es.eigenvectors().col(j).normalized();
      if (!is_common_eigenvector(coin, u, pol)) continue;
      bool ortho = true;
      for (const CVec& w : accepted)
        if (std::abs(w.dot(u)) > pol.eigvec_tol) ortho = false;
      if (ortho) accepted.push_back(std::move(u));
    }
    if (accepted.size() == 2) break;
  }

  if (accepted.size() < 2) return classify_ergodic_1d(coin, pol);  // case 1

  // Case 2: two decoupled lazy components; component j is recurrent iff
  // |l_j| = |r_j|.
  std::vector<EnclosureReport> records;
  for (int j = 0; j < 2; ++j) {
    const CVec& u = accepted[static_cast<std::size_t>(j)];
    const double la = std::abs(u.dot(coin.L * u));
    const double ra = std::abs(u.dot(coin.R * u));
    EnclosureReport r;
    r.label = j;
    r.rank = 1;
    r.projector = u * u.adjoint();
    r.m = {drift_1d(coin, r.projector)};
    r.recurrent = std::abs(la - ra) <= pol.drift_zero;
    records.push_back(std::move(r));
  }
  return aggregate(std::move(records), CMat::Zero(2, 2), "dim2", 2);
}

Verdict classify_general_1d(const Coin1D& coin, const NumericPolicy& pol) {
  if (coin.lazy)
    throw NoCriterionError(
        "classify_general_1d: no proved criterion for lazy, non-ergodic coins; the generalized "
        "criterion requires B = 0");
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S, pol);
  return classify_by_decomposition(
      dec, coin.dim(),
      [&](const CMat& tau, EnclosureReport& r) {
        r.m = {drift_1d(coin, tau)};
        r.recurrent = std::abs(direction_trace(coin.L, tau) - 0.5) <= pol.drift_zero;
      },
      "general");
}

Verdict classify_1d(const Coin1D& coin, const NumericPolicy& pol) {
  check_trivial_guard(coin);
  const Superoperator S = superoperator(coin.kraus());
  if (is_ergodic(S, pol)) return classify_ergodic_1d(coin, pol);
  if (coin.dim() == 2) return classify_dim2_lazy(coin, pol);
  if (!coin.lazy) return classify_general_1d(coin, pol);
  throw NoCriterionError(
      "criterion unavailable: lazy, non-ergodic coins of dimension >= 3 are not covered by any "
      "proved criterion");
}

StateClass classify_state_1d(const Coin1D& coin, const CMat& rho, const NumericPolicy& pol) {
  const Verdict v = classify_1d(coin, pol);
  if (v.kind == VerdictKind::Recurrent) return StateClass::Recurrent;
  if (v.kind == VerdictKind::Transient) return StateClass::Transient;

  const Superoperator S = superoperator(coin.kraus());
  const CMat reach = reachable_support(S, rho, pol);
  for (const EnclosureReport& r : v.enclosures)
    if (r.recurrent && frob(CMat(r.projector * reach)) > pol.eigvec_tol)
      return StateClass::Recurrent;
  return StateClass::Transient;
}

Verdict classify_2d_discrete(const Coin2D& coin, const NumericPolicy& pol) {
  const Superoperator S = superoperator(coin.kraus());
  const ChannelDecomposition dec = decompose(S, pol);
  return classify_by_decomposition(
      dec, coin.dim(),
      [&](const CMat& tau, EnclosureReport& r) {
        const DriftVector m = drift_2d(coin, tau);
        r.m = {m.m1, m.m2};
        r.recurrent = m.norm() <= pol.drift_zero;
      },
      "general-2d");
}

Verdict classify_2d_ct(const CoinCT& coin, const NumericPolicy& pol) {
  const ChannelDecomposition dec = decompose_ct(coin, pol);
  return classify_by_decomposition(
      dec, coin.dim(),
      [&](const CMat& tau, EnclosureReport& r) {
        const DriftVector m = drift_2d(coin, tau);
        r.m = {m.m1, m.m2};
        r.recurrent = m.norm() <= pol.drift_zero;
      },
      "general-2d-ct");
}

CoinCT jump_chain_lift(const Coin2D& coin) {
  const Eigen::Index d = coin.dim();
  return make_coin_ct(coin.D1, coin.D2, coin.D3, coin.D4, CMat::Zero(d, d));
}

}  // namespace oqw
