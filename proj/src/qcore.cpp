#include <oqw/qcore.hpp>

#include <Eigen/Eigenvalues>

namespace oqw {

CoinCT make_coin_ct(CMat A1, CMat A2, CMat A3, CMat A4, CMat H) {
  require_square(H, "H");
  require_same_dim(A1, H, "A1 vs H");
  require_same_dim(A2, H, "A2 vs H");
  require_same_dim(A3, H, "A3 vs H");
  require_same_dim(A4, H, "A4 vs H");
  CoinCT c;
  c.A1 = std::move(A1);
  c.A2 = std::move(A2);
  c.A3 = std::move(A3);
  c.A4 = std::move(A4);
  c.H = std::move(H);
  CMat K = CMat::Zero(c.H.rows(), c.H.cols());
  for (const CMat& A : c.jumps()) K += A.adjoint() * A;
  c.G = Complex(0, -1) * c.H - 0.5 * K;
  return c;
}

DensityOperator::DensityOperator(CMat M, const NumericPolicy& pol) : matrix(std::move(M)) {
  require_square(matrix, "density");
  const double herm = frob(matrix - matrix.adjoint());
  if (herm > pol.density_tol)
    throw std::runtime_error("density operator not Hermitian (residual " + std::to_string(herm) + ")");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(matrix));
  if (es.eigenvalues().minCoeff() < -pol.density_tol)
    throw std::runtime_error("density operator not positive semidefinite");
  const double tr = std::abs(matrix.trace() - Complex(1, 0));
  if (tr > pol.density_tol)
    throw std::runtime_error("density operator trace differs from one by " + std::to_string(tr));
}

namespace {

ValidationReport report_from_residual(double deficiency, double tol, std::string what) {
  ValidationReport r;
  r.deficiency = deficiency;
  r.ok = deficiency <= tol;
  r.messages.push_back(what + ": residual " + std::to_string(deficiency) +
                       (r.ok ? " (ok)" : " (exceeds tolerance)"));
  return r;
}

}  // namespace

ValidationReport validate_coin(const Coin1D& c, const NumericPolicy& pol) {
  require_square(c.L, "L");
  require_same_dim(c.L, c.B, "L vs B");
  require_same_dim(c.L, c.R, "L vs R");
  const CMat I = CMat::Identity(c.dim(), c.dim());
  const double resid = frob(c.L.adjoint() * c.L + c.B.adjoint() * c.B + c.R.adjoint() * c.R - I);
  return report_from_residual(resid, pol.coin_tol, "L*L + B*B + R*R = I");
}

ValidationReport validate_coin(const Coin2D& c, const NumericPolicy& pol) {
  require_square(c.D1, "D1");
  require_same_dim(c.D1, c.D2, "D1 vs D2");
  require_same_dim(c.D1, c.D3, "D1 vs D3");
  require_same_dim(c.D1, c.D4, "D1 vs D4");
  const CMat I = CMat::Identity(c.dim(), c.dim());
  CMat sum = CMat::Zero(c.dim(), c.dim());
  for (const CMat& D : c.kraus()) sum += D.adjoint() * D;
  return report_from_residual(frob(sum - I), pol.coin_tol, "sum Dj*Dj = I");
}

ValidationReport validate_coin(const CoinCT& c, const NumericPolicy& pol) {
  require_square(c.H, "H");
  require_same_dim(c.A1, c.H, "A1 vs H");
  const double resid = frob(c.H - c.H.adjoint());
  ValidationReport r = report_from_residual(resid, pol.density_tol, "H = H*");
  const CMat expectG = Complex(0, -1) * c.H -
                       0.5 * (c.A1.adjoint() * c.A1 + c.A2.adjoint() * c.A2 +
                              c.A3.adjoint() * c.A3 + c.A4.adjoint() * c.A4);
  const double gresid = frob(c.G - expectG);
  r.ok = r.ok && gresid <= pol.coin_tol;
  r.messages.push_back("G = -iH - (1/2) sum Ak*Ak: residual " + std::to_string(gresid));
  return r;
}

bool is_faithful(const DensityOperator& rho, const NumericPolicy& pol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(rho.matrix));
  // A density has scale one, so the faithfulness cut is the absolute 1e-10.
  return es.eigenvalues().minCoeff() > pol.support_rel;
}

CMat support_projector(const CMat& M, const NumericPolicy& pol) {
  require_square(M, "support_projector");
  if (frob(M - M.adjoint()) > 1e-8 * (1.0 + frob(M)))
    throw std::runtime_error("support_projector: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(M));
  const auto& w = es.eigenvalues();
  const double cut = pol.support_rel * std::max(std::abs(w.maxCoeff()), std::abs(w.minCoeff()));
  CMat P = CMat::Zero(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > std::max(cut, 0.0))
      P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return P;
}

CMat apply_channel(const std::vector<CMat>& kraus, const CMat& rho) {
  if (kraus.empty()) throw StructuralError("apply_channel: empty Kraus family");
  require_square(rho, "apply_channel rho");
  CMat out = CMat::Zero(rho.rows(), rho.cols());
  for (const CMat& K : kraus) {
    require_same_dim(K, rho, "apply_channel Kraus vs rho");
    out += K * rho * K.adjoint();
  }
  return out;
}

}  // namespace oqw
