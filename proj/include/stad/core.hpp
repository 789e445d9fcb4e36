#pragma once

#include "stad/types.hpp"

namespace stad {

/// p x p complex Hermitian matrix. The constructor symmetrizes
/// (A <- (A + A')/2) so downstream code may assume exact Hermitian
/// structure; inputs whose asymmetry exceeds 1e-12 relative are rejected.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const CMatrix& raw);

  static HermitianMatrix Identity(Index p);
  static HermitianMatrix FromDiagonal(const RVector& d);

  const CMatrix& mat() const { return m_; }
  Index dim() const { return m_.rows(); }

  /// Throws InputError unless all eigenvalues >= -1e-10 * ||A||.
  void require_psd(const std::string& context) const;

 private:
  struct AlreadySymmetric {};
  HermitianMatrix(CMatrix m, AlreadySymmetric) : m_(std::move(m)) {}
  CMatrix m_;

  friend HermitianMatrix reconstruct(const CMatrix&, const RVector&);
  friend class HermitianMatrixInternal;
};

/// Ascending eigenvalues and a unitary eigenvector matrix; column i of
/// eigenvectors pairs with eigenvalues[i].
struct EigenSystem {
  RVector eigenvalues;
  CMatrix eigenvectors;
};

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
EigenSystem hermitian_eig(const HermitianMatrix& a);

/// U * diag(d) * U', symmetrized. d must be strictly positive so the result
/// lies in the positive-definite cone.
HermitianMatrix reconstruct(const CMatrix& u, const RVector& d);

/// Re(s' A s). The imaginary residual is checked against a 1e-10 relative
/// bound, which holds automatically for Hermitian A.
double quad_form(const CVector& s, const HermitianMatrix& a);

/// Hermitian square root F of a PSD matrix: F F' = R.
CMatrix sqrt_factor(const HermitianMatrix& r);

}  // namespace stad
