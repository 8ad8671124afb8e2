// Dense complex matrix aliases, the shared numeric policy, and the small
// vectorization/Kronecker helpers every other component builds on.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace oqw {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// One shared record of every tolerance used by the toolkit.  Defaults are
// the documented contract; callers may override a copy per call site.
struct NumericPolicy {
  double coin_tol = 1e-9;        // coin normalization residual bound
  double density_tol = 1e-10;    // Hermiticity / PSD / trace bounds for densities
  double support_rel = 1e-10;    // relative eigenvalue cut for support detection
  double cluster_tol = 1e-8;     // eigenvalue-1 (or 0) cluster radius
  double fixed_point_tol = 1e-10;    // ||Phi(tau)-tau||_F for emitted states
  double fixed_point_tol_ct = 1e-9;  // ||L(tau)||_F for emitted CT states
  double drift_zero = 1e-9;      // |m| below this counts as zero drift
  double decomp_tol = 1e-9;      // identity / orthogonality residuals
  double eigvec_tol = 1e-8;      // common-eigenvector invariance residual
  double absorb_tol = 1e-10;     // dual power-iteration stop
  long absorb_cap = 1000000;     // dual power-iteration budget
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy p{};
  return p;
}

// Structural problems (wrong shapes, malformed files) are reported apart from
// numeric invalidity so the CLI can map them to distinct exit codes.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_square(const CMat& M, const char* name) {
  if (M.rows() != M.cols() || M.rows() < 1)
    throw StructuralError(std::string(name) + ": matrix must be square and non-empty");
}

inline void require_same_dim(const CMat& A, const CMat& B, const char* what) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw StructuralError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(A.rows()) + "x" + std::to_string(A.cols()) + " vs " +
                          std::to_string(B.rows()) + "x" + std::to_string(B.cols()) + ")");
}

// Column-major stacking of a d x d matrix into a d^2 vector.
inline CVec vec(const CMat& M) {
  return Eigen::Map<const CVec>(M.data(), M.size());
}

// Inverse of vec for square matrices.
inline CMat unvec(const CVec& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
  if (d * d != v.size())
    throw StructuralError("unvec: length is not a perfect square");
  return Eigen::Map<const CMat>(v.data(), d, d);
}

inline CMat kron(const CMat& A, const CMat& B) {
  CMat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline CMat hermitize(const CMat& M) { return 0.5 * (M + M.adjoint()); }

inline double frob(const CMat& M) { return M.norm(); }

}  // namespace oqw
