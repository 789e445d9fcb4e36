#pragma once

#include <string>

#include "stad/core.hpp"

namespace stad {

enum class EstimatorTag { SCM, Oracle, FML, AndersonR, LWLinear, LWD };

std::string to_string(EstimatorTag tag);
EstimatorTag estimator_tag_from_string(const std::string& name);

/// A covariance estimate sharing the sample eigenbasis: R_hat = U diag(d) U'.
struct ShrinkageResult {
  CMatrix basis;        // unitary; sample covariance eigenvectors
  RVector shrunk_eigs;  // strictly positive
  EstimatorTag tag;
  HermitianMatrix matrix;
};

/// Sample covariance X X' / n.
HermitianMatrix scm(const CMatrix& x);

/// Oracle eigenvalues d*_i = u_i' R u_i in the sample eigenbasis. Requires
/// the unknown population covariance; used as the performance benchmark.
ShrinkageResult oracle_shrinker(const EigenSystem& s_eig,
                                const HermitianMatrix& r);

/// Sample eigenvalues thresholded from below at a known noise floor.
ShrinkageResult fml(const EigenSystem& s_eig, double noise_floor);

/// Estimates the noise floor as the mean of the p - r smallest sample
/// eigenvalues, then thresholds from below.
ShrinkageResult anderson(const EigenSystem& s_eig, Index rank);

/// Frobenius-optimal linear combination of the sample covariance and a
/// scaled identity, with data-driven weights.
ShrinkageResult lw_linear(const CMatrix& x);

/// Sample spectrum plus the kernel bandwidth h = n^(-0.35).
struct KernelState {
  RVector lambdas;  // ascending sample eigenvalues
  Index p = 0;
  Index n = 0;
  double h = 0.0;

  static KernelState from_eigenvalues(const RVector& lambdas, Index n);
};

/// Hilbert-transform-style kernel sums over the top min(p, n) sample
/// eigenvalues; summands whose index j = p-n+1..p is nonpositive are zero.
double kernel_a(double lambda, const KernelState& state);
double kernel_b(double lambda, const KernelState& state);

/// Isotonic least-squares regression: the Euclidean projection onto the
/// nondecreasing cone, via pool-adjacent-violators.
RVector pav(const RVector& x);

/// Intermediate vectors of the kernel shrinkage pipeline, indexed like the
/// ascending sample eigenvalues.
struct LwdDetail {
  RVector d_tilde;  // raw shrunken eigenvalues
  RVector d_check;  // clipped to [noise_floor, lambda_max]
  RVector d_hat;    // isotonic projection of d_check
};

/// The direct kernel shrinkage estimator: sample eigendecomposition, kernel
/// transform of the eigenvalues, clipping to [noise_floor, lambda_max], and
/// an isotonic projection. Rejects p == n.
ShrinkageResult lwd_shrink(const CMatrix& x, double noise_floor = 1.0,
                           LwdDetail* detail = nullptr);

}  // namespace stad
