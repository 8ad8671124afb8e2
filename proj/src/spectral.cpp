#include <oqw/spectral.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace oqw {

namespace {

// Oblique spectral projector onto the eigenvalue cluster |lambda - center| <=
// cluster_tol: P = Q (W^H Q)^{-1} W^H with Q right and W left eigenvector
// bases.  Returns the projector and the cluster multiplicity.
std::pair<CMat, Eigen::Index> cluster_projector(const CMat& S, std::complex<double> center,
                                                const NumericPolicy& pol) {
  const Eigen::Index n = S.rows();
  Eigen::ComplexEigenSolver<CMat> right(S, /*computeEigenvectors=*/true);
  Eigen::ComplexEigenSolver<CMat> left(S.adjoint(), /*computeEigenvectors=*/true);
  if (right.info() != Eigen::Success || left.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue decomposition of the superoperator failed");

  std::vector<Eigen::Index> ri, li;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(right.eigenvalues()(i) - center) <= pol.cluster_tol) ri.push_back(i);
    // The left solver sees S^H, whose eigenvalues are conjugated.
    if (std::abs(std::conj(left.eigenvalues()(i)) - center) <= pol.cluster_tol) li.push_back(i);
  }
  if (ri.size() != li.size())
    throw std::runtime_error("left/right eigenvalue clusters disagree; spectrum is ill-separated");
  const Eigen::Index k = static_cast<Eigen::Index>(ri.size());
  if (k == 0) return {CMat::Zero(n, n), 0};

  CMat Q(n, k), W(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Q.col(j) = right.eigenvectors().col(ri[j]);
    W.col(j) = left.eigenvectors().col(li[j]);
  }
  const CMat M = W.adjoint() * Q;
  Eigen::FullPivLU<CMat> lu(M);
  if (!lu.isInvertible())
    throw std::runtime_error("spectral projector is singular; eigenvalue cluster is defective");
  CMat P = Q * lu.solve(W.adjoint());
  return {std::move(P), k};
}

// Invariant state obtained by projecting the maximally mixed state onto the
// fixed-point cluster.  Requires a nonempty cluster.
CMat cluster_invariant_state(const CMat& P1, Eigen::Index d) {
  CMat rho = hermitize(unvec(P1 * vec(CMat::Identity(d, d) / static_cast<double>(d))));
  const double tr = rho.trace().real();
  if (!(std::abs(tr) > 1e-14))
    throw std::runtime_error("projected invariant state has vanishing trace");
  return rho / tr;
}

// Canonical Hermitian basis of d x d matrices, in deterministic order:
// E_jj (j = 0..d-1), then (E_jk + E_kj)/sqrt(2) for j < k in lexicographic
// order, then (i E_kj - i E_jk)/sqrt(2) likewise.
std::vector<CMat> canonical_hermitian_basis(Eigen::Index d) {
  std::vector<CMat> basis;
  basis.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index j = 0; j < d; ++j) {
    CMat E = CMat::Zero(d, d);
    E(j, j) = 1.0;
    basis.push_back(std::move(E));
  }
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j + 1; k < d; ++k) {
      CMat E = CMat::Zero(d, d);
      E(j, k) = s;
      E(k, j) = s;
      basis.push_back(std::move(E));
    }
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j + 1; k < d; ++k) {
      CMat E = CMat::Zero(d, d);
      E(j, k) = std::complex<double>(0.0, -s);
      E(k, j) = std::complex<double>(0.0, s);
      basis.push_back(std::move(E));
    }
  return basis;
}

// Compression of a superoperator to the subspace ran(V): X on ran(V) evolves
// as unvec(W^H S W vec(X)) with W = conj(V) (x) V.
CMat restrict_superop(const CMat& S, const CMat& V) {
  const CMat W = kron(V.conjugate(), V);
  return W.adjoint() * S * W;
}

// Fixed-point residual of the candidate state under the restricted map
// M (either S_Y - I or a restricted generator).
double residual_of(const CMat& M, const CMat& T) { return (M * vec(T)).norm(); }

// Extremal invariant state on a leaf: the fixed space of S_Y is
// one-dimensional, so polish the projected state against ker(M) via SVD and
// keep whichever candidate has the smaller residual.
CMat leaf_state(const CMat& P1, const CMat& M, Eigen::Index k) {
  CMat tau = cluster_invariant_state(P1, k);
  Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullV);
  CVec v = svd.matrixV().col(M.cols() - 1);
  CMat T = hermitize(unvec(v));
  const double tr = T.trace().real();
  if (std::abs(tr) > 1e-8) {
    T /= tr;
    if (residual_of(M, T) < residual_of(M, tau)) tau = T;
  }
  return tau;
}

struct SplitContext {
  const CMat& S;          // full channel superoperator
  const CMat* generator;  // optional full generator superoperator (CT)
  const NumericPolicy& pol;
  std::vector<Enclosure>& out;
};

// Recursive enclosure splitting on ran(V).  V is an isometry into the full
// space; every subspace handed to recursion carries at least one invariant
// state by construction.
void split_enclosures(const SplitContext& ctx, const CMat& V) {
  const Eigen::Index k = V.cols();
  const CMat SY = restrict_superop(ctx.S, V);
  auto [P1, fdim] = cluster_projector(SY, 1.0, ctx.pol);
  if (fdim == 0)
    throw std::runtime_error("enclosure candidate lost its invariant state during recursion");

  if (fdim == 1) {
    // Minimal enclosure: extract tau, refining against the generator when one
    // is supplied (continuous time) and against S_Y - I otherwise.
    const CMat M = ctx.generator ? restrict_superop(*ctx.generator, V)
                                 : CMat(SY - CMat::Identity(k * k, k * k));
    const CMat tau = leaf_state(P1, M, k);
    Enclosure enc;
    enc.projector = V * V.adjoint();
    enc.tau = V * tau * V.adjoint();
    enc.label = static_cast<int>(ctx.out.size());
    ctx.out.push_back(std::move(enc));
    return;
  }

  // Higher-dimensional fixed space: find a traceless Hermitian fixed point F
  // and split along the sign decomposition of its spectrum.
  const CMat rho_bar = cluster_invariant_state(P1, k);
  const auto basis = canonical_hermitian_basis(k);
  CMat F;
  double best = -1.0;
  bool found = false;
  for (const CMat& H : basis) {
    CMat F0 = hermitize(unvec(P1 * vec(H)));
    CMat cand = F0 - F0.trace().real() * rho_bar;
    const double nrm = frob(cand);
    if (nrm > best) {
      best = nrm;
      F = cand;
    }
    if (nrm > 1e-6) {
      found = true;
      break;
    }
  }
  if (!found && best <= 0.0)
    throw std::runtime_error("failed to find a traceless fixed point to split an enclosure");

  Eigen::SelfAdjointEigenSolver<CMat> es(F);
  const Eigen::VectorXd w = es.eigenvalues();
  const double cut = ctx.pol.support_rel * w.cwiseAbs().maxCoeff();
  CMat Pneg = CMat::Zero(k, k);
  Eigen::Index rneg = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (w(i) < -cut) {
      Pneg += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      ++rneg;
    }
  }
  if (rneg == 0 || rneg == k)
    throw std::runtime_error("degenerate sign split while decomposing an enclosure");

  const CMat Vneg = projector_isometry(Pneg);
  const CMat Vpos = projector_isometry(CMat(CMat::Identity(k, k) - Pneg));
  split_enclosures(ctx, CMat(V * Vneg));
  split_enclosures(ctx, CMat(V * Vpos));
}

ChannelDecomposition decompose_core(const Superoperator& S, const CMat* generator,
                                    const NumericPolicy& pol) {
  const Eigen::Index d = S.dim;
  const CMat rho_bar = invariant_state_maximal(S, pol);
  const CMat PR = support_projector(rho_bar, pol);

  ChannelDecomposition dec;
  SplitContext ctx{S.matrix, generator, pol, dec.enclosures};
  split_enclosures(ctx, projector_isometry(PR));

  dec.recurrent_projector = CMat::Zero(d, d);
  for (const Enclosure& e : dec.enclosures) dec.recurrent_projector += e.projector;
  dec.transient_projector = CMat::Identity(d, d) - dec.recurrent_projector;

  // Internal consistency: the enclosure projectors must resolve P_R.
  if (frob(CMat(dec.recurrent_projector - PR)) > pol.decomp_tol)
    throw std::runtime_error("enclosure projectors do not resolve the recurrent subspace");
  return dec;
}

}  // namespace

Superoperator superoperator(const std::vector<CMat>& kraus) {
  if (kraus.empty()) throw StructuralError("superoperator: empty Kraus list");
  const Eigen::Index d = kraus.front().rows();
  CMat S = CMat::Zero(d * d, d * d);
  for (const CMat& K : kraus) {
    require_square(K, "Kraus operator");
    if (K.rows() != d) throw StructuralError("superoperator: Kraus operators of mixed dimension");
    S += kron(K.conjugate(), K);
  }
  return {d, std::move(S)};
}

Superoperator lindblad_superoperator(const CoinCT& coin) {
  const Eigen::Index d = coin.dim();
  const CMat I = CMat::Identity(d, d);
  CMat S = kron(I, coin.G) + kron(coin.G.conjugate(), I);
  for (const CMat* A : {&coin.A1, &coin.A2, &coin.A3, &coin.A4})
    S += kron(A->conjugate(), *A);
  return {d, std::move(S)};
}

CMat projector_isometry(const CMat& P) {
  require_square(P, "projector");
  const Eigen::Index n = P.rows();
  const Eigen::Index r = static_cast<Eigen::Index>(std::lround(P.trace().real()));
  CMat V(n, r);
  Eigen::Index got = 0;
  for (Eigen::Index j = 0; j < n && got < r; ++j) {
    CVec v = P.col(j);
    for (Eigen::Index i = 0; i < got; ++i) v -= V.col(i).dot(v) * V.col(i);
    const double nrm = v.norm();
    if (nrm > 1e-7) V.col(got++) = v / nrm;
  }
  if (got != r)
    throw std::runtime_error("projector_isometry: rank deficit while orthonormalizing columns");
  return V;
}

CMat invariant_state_maximal(const Superoperator& S, const NumericPolicy& pol) {
  auto [P1, k] = cluster_projector(S.matrix, 1.0, pol);
  if (k == 0) throw std::runtime_error("channel has no invariant state in the eigenvalue-1 cluster");
  CMat rho = cluster_invariant_state(P1, S.dim);
  const double res = (S.matrix * vec(rho) - vec(rho)).norm();
  if (res > pol.fixed_point_tol) {
    std::ostringstream os;
    os << "invariant state failed to converge: fixed-point residual " << res << " exceeds "
       << pol.fixed_point_tol;
    throw std::runtime_error(os.str());
  }
  return rho;
}

ChannelDecomposition decompose(const Superoperator& S, const NumericPolicy& pol) {
  return decompose_core(S, nullptr, pol);
}

ChannelDecomposition decompose_ct(const CoinCT& coin, const NumericPolicy& pol) {
  const Superoperator G = lindblad_superoperator(coin);
  Superoperator E{G.dim, G.matrix.exp()};
  ChannelDecomposition dec = decompose_core(E, &G.matrix, pol);
  for (const Enclosure& e : dec.enclosures) {
    const double res = (G.matrix * vec(e.tau)).norm();
    if (res > pol.fixed_point_tol_ct) {
      std::ostringstream os;
      os << "continuous-time invariant state failed to converge: ||L(tau)|| = " << res;
      throw std::runtime_error(os.str());
    }
  }
  return dec;
}

bool is_ergodic(const Superoperator& S, const NumericPolicy& pol) {
  Eigen::ComplexEigenSolver<CMat> es(S.matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenvalue decomposition of the superoperator failed");
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - 1.0) <= pol.cluster_tol) ++count;
  return count == 1;
}

CMat reachable_support(const Superoperator& S, const CMat& rho, const NumericPolicy& pol) {
  const Eigen::Index d = S.dim;
  CMat P = support_projector(hermitize(rho), pol);
  for (Eigen::Index it = 0; it <= d + 1; ++it) {
    const CMat img = hermitize(unvec(S.matrix * vec(P)));
    CMat Pn = support_projector(CMat(P + img / static_cast<double>(d)), pol);
    if (frob(CMat(Pn - P)) < 1e-10) return Pn;
    P = std::move(Pn);
  }
  return P;  // rank is nondecreasing and bounded by d, so this is the fixed point
}

CMat absorption_operator(const Superoperator& S, const CMat& P_Y, const NumericPolicy& pol) {
  const CMat SH = S.matrix.adjoint();
  CVec x = vec(P_Y);
  double res = 0.0;
  for (long it = 0; it < pol.absorb_cap; ++it) {
    CVec xn = SH * x;
    res = (xn - x).norm();
    x = std::move(xn);
    if (res <= pol.absorb_tol) return hermitize(unvec(x));
  }
  std::ostringstream os;
  os << "absorption operator failed to converge within " << pol.absorb_cap
     << " iterations: residual " << res;
  throw std::runtime_error(os.str());
}

}  // namespace oqw
