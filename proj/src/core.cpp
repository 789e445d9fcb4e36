#include "stad/core.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace stad {

namespace {

void require_finite(const CMatrix& m, const char* who) {
  if (!m.allFinite()) {
    throw InputError(std::string(who) + ": non-finite entries");
  }
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& raw) {
  if (raw.rows() != raw.cols()) {
    throw InputError("HermitianMatrix: matrix must be square, got " +
                     std::to_string(raw.rows()) + "x" +
                     std::to_string(raw.cols()));
  }
  if (raw.rows() < 1) {
    throw InputError("HermitianMatrix: dimension must be positive");
  }
  require_finite(raw, "HermitianMatrix");
  const double scale = raw.norm();
  const double asym = (raw - raw.adjoint()).norm();
  if (asym > 1e-12 * std::max(scale, 1e-300) && asym > 1e-12) {
    throw InputError("HermitianMatrix: asymmetry " + std::to_string(asym) +
                     " exceeds tolerance relative to norm " +
                     std::to_string(scale));
  }
  m_ = 0.5 * (raw + raw.adjoint().eval());
}

HermitianMatrix HermitianMatrix::Identity(Index p) {
  return HermitianMatrix(CMatrix::Identity(p, p), AlreadySymmetric{});
}

HermitianMatrix HermitianMatrix::FromDiagonal(const RVector& d) {
  if (d.size() < 1) {
    throw InputError("HermitianMatrix::FromDiagonal: empty diagonal");
  }
  CMatrix m = CMatrix::Zero(d.size(), d.size());
  m.diagonal() = d.cast<Complex>();
  return HermitianMatrix(std::move(m), AlreadySymmetric{});
}

void HermitianMatrix::require_psd(const std::string& context) const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m_,
                                                Eigen::EigenvaluesOnly);
  const double norm = m_.operatorNorm();
  if (solver.eigenvalues().minCoeff() < -1e-10 * std::max(norm, 1e-300)) {
    throw InputError(context + ": matrix is not positive semidefinite "
                     "(min eigenvalue " +
                     std::to_string(solver.eigenvalues().minCoeff()) + ")");
  }
}

EigenSystem hermitian_eig(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver failed to converge");
  }
  // Eigen already returns ascending eigenvalues.
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

HermitianMatrix reconstruct(const CMatrix& u, const RVector& d) {
  if (u.rows() != u.cols() || u.rows() != d.size()) {
    throw InputError("reconstruct: dimension mismatch");
  }
  require_finite(u, "reconstruct");
  if (!d.allFinite()) {
    throw InputError("reconstruct: non-finite eigenvalues");
  }
  if ((d.array() <= 0.0).any()) {
    throw InputError("reconstruct: eigenvalues must be strictly positive");
  }
  const double ortho = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.rows()))
                           .norm();
  if (ortho > 1e-8) {
    throw InputError("reconstruct: basis is not unitary (||U'U - I|| = " +
                     std::to_string(ortho) + ")");
  }
  CMatrix m = u * d.asDiagonal() * u.adjoint();
  m = 0.5 * (m + m.adjoint().eval());
  return HermitianMatrix(m);
}

double quad_form(const CVector& s, const HermitianMatrix& a) {
  if (s.size() != a.dim()) {
    throw InputError("quad_form: vector length " + std::to_string(s.size()) +
                     " does not match matrix dimension " +
                     std::to_string(a.dim()));
  }
  const Complex v = s.dot(a.mat() * s);
  const double mag = std::abs(v);
  if (std::abs(v.imag()) > 1e-10 * std::max(mag, 1e-300) &&
      std::abs(v.imag()) > 1e-10) {
    throw NumericalError("quad_form: imaginary residual " +
                         std::to_string(v.imag()));
  }
  return v.real();
}

CMatrix sqrt_factor(const HermitianMatrix& r) {
  EigenSystem es = hermitian_eig(r);
  const double norm =
      std::max(std::abs(es.eigenvalues(0)), std::abs(es.eigenvalues(es.eigenvalues.size() - 1)));
  RVector lam = es.eigenvalues;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-8 * std::max(norm, 1e-300)) {
      throw InputError("sqrt_factor: matrix is not PSD (eigenvalue " +
                       std::to_string(lam(i)) + ")");
    }
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return es.eigenvectors * lam.asDiagonal() * es.eigenvectors.adjoint();
}

}  // namespace stad
