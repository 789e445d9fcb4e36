#include "stad/shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace stad {

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::SCM: return "SCM";
    case EstimatorTag::Oracle: return "Oracle";
    case EstimatorTag::FML: return "FML";
    case EstimatorTag::AndersonR: return "AndersonR";
    case EstimatorTag::LWLinear: return "LWLinear";
    case EstimatorTag::LWD: return "LWD";
  }
  throw InputError("unknown estimator tag");
}

EstimatorTag estimator_tag_from_string(const std::string& name) {
  if (name == "SCM") return EstimatorTag::SCM;
  if (name == "Oracle") return EstimatorTag::Oracle;
  if (name == "FML") return EstimatorTag::FML;
  if (name == "AndersonR") return EstimatorTag::AndersonR;
  if (name == "LWLinear") return EstimatorTag::LWLinear;
  if (name == "LWD") return EstimatorTag::LWD;
  throw InputError("unknown estimator tag: " + name);
}

namespace {

ShrinkageResult make_result(const CMatrix& u, const RVector& d,
                            EstimatorTag tag) {
  return ShrinkageResult{u, d, tag, reconstruct(u, d)};
}

}  // namespace

HermitianMatrix scm(const CMatrix& x) {
  if (x.cols() < 1 || x.rows() < 1) {
    throw InputError("scm: empty training matrix");
  }
  if (!x.allFinite()) {
    throw InputError("scm: non-finite training data");
  }
  CMatrix s = (x * x.adjoint()) / static_cast<double>(x.cols());
  s = 0.5 * (s + s.adjoint().eval());
  return HermitianMatrix(s);
}

ShrinkageResult oracle_shrinker(const EigenSystem& s_eig,
                                const HermitianMatrix& r) {
  const Index p = s_eig.eigenvectors.rows();
  if (r.dim() != p) {
    throw InputError("oracle_shrinker: dimension mismatch");
  }
  RVector d(p);
  const CMatrix ru = r.mat() * s_eig.eigenvectors;
  for (Index i = 0; i < p; ++i) {
    d(i) = s_eig.eigenvectors.col(i).dot(ru.col(i)).real();
  }
  return make_result(s_eig.eigenvectors, d, EstimatorTag::Oracle);
}

ShrinkageResult fml(const EigenSystem& s_eig, double noise_floor) {
  if (!(noise_floor > 0.0)) {
    throw InputError("fml: noise floor must be positive");
  }
  RVector d = s_eig.eigenvalues.cwiseMax(noise_floor);
  return make_result(s_eig.eigenvectors, d, EstimatorTag::FML);
}

ShrinkageResult anderson(const EigenSystem& s_eig, Index rank) {
  const Index p = s_eig.eigenvalues.size();
  if (rank < 0 || rank >= p) {
    throw InputError("anderson: rank must lie in [0, p)");
  }
  const double sigma2 =
      s_eig.eigenvalues.head(p - rank).mean();
  if (!(sigma2 > 0.0)) {
    throw NumericalError("anderson: estimated noise floor is nonpositive");
  }
  RVector d = s_eig.eigenvalues.cwiseMax(sigma2);
  return make_result(s_eig.eigenvectors, d, EstimatorTag::AndersonR);
}

ShrinkageResult lw_linear(const CMatrix& x) {
  const Index p = x.rows();
  const Index n = x.cols();
  if (n < 2) {
    throw InputError("lw_linear: need at least 2 samples");
  }
  if (x.norm() == 0.0) {
    throw InputError("lw_linear: degenerate all-zero training matrix");
  }
  const HermitianMatrix s = scm(x);
  const EigenSystem es = hermitian_eig(s);

  const double m = s.mat().trace().real() / static_cast<double>(p);
  const double d2 =
      (s.mat() - m * CMatrix::Identity(p, p)).squaredNorm() /
      static_cast<double>(p);

  if (d2 <= 1e-14 * m * m) {
    // Sample covariance already equals the shrinkage target.
    return make_result(es.eigenvectors, es.eigenvalues,
                       EstimatorTag::LWLinear);
  }

  double b_sum = 0.0;
  for (Index k = 0; k < n; ++k) {
    b_sum += (x.col(k) * x.col(k).adjoint() - s.mat()).squaredNorm();
  }
  const double b_bar2 = std::min(
      d2, b_sum / (static_cast<double>(n) * static_cast<double>(n) *
                   static_cast<double>(p)));

  const double rho1 = (b_bar2 / d2) * m;
  const double rho2 = 1.0 - b_bar2 / d2;
  RVector d = (rho1 + rho2 * es.eigenvalues.array()).matrix();
  return make_result(es.eigenvectors, d, EstimatorTag::LWLinear);
}

KernelState KernelState::from_eigenvalues(const RVector& lambdas, Index n) {
  if (n < 1) {
    throw InputError("KernelState: n must be positive");
  }
  KernelState state;
  state.lambdas = lambdas;
  std::sort(state.lambdas.begin(), state.lambdas.end());
  state.p = lambdas.size();
  state.n = n;
  state.h = std::pow(static_cast<double>(n), -0.35);
  return state;
}

namespace {

double positive_part(double y) { return y > 0.0 ? y : 0.0; }

double sgn(double y) {
  if (y > 0.0) return 1.0;
  if (y < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

double kernel_a(double lambda, const KernelState& state) {
  const Index p = state.p;
  const Index lo = std::max<Index>(p - state.n, 0);  // first active 0-based index
  const double h2 = state.h * state.h;
  double sum = 0.0;
  for (Index j = lo; j < p; ++j) {
    const double lj = state.lambdas(j);
    if (lj == 0.0) {
      throw NumericalError("kernel_a: zero eigenvalue inside the active "
                           "index range");
    }
    const double diff = lambda - lj;
    const double bracket = positive_part(diff * diff - 4.0 * lj * lj * h2);
    sum += (sgn(diff) * std::sqrt(bracket) - diff) / (2.0 * lj * lj * h2);
  }
  return sum;
}

double kernel_b(double lambda, const KernelState& state) {
  const Index p = state.p;
  const Index lo = std::max<Index>(p - state.n, 0);
  const double h2 = state.h * state.h;
  double sum = 0.0;
  for (Index j = lo; j < p; ++j) {
    const double lj = state.lambdas(j);
    if (lj == 0.0) {
      throw NumericalError("kernel_b: zero eigenvalue inside the active "
                           "index range");
    }
    const double diff = lambda - lj;
    // Semicircle density kernel: no linear term, so the sum vanishes
    // outside every window |lambda - lambda_j| <= 2 lambda_j h. (Only the
    // Hilbert-transform kernel above carries the "- lambda + lambda_j"
    // correction.)
    const double bracket = positive_part(4.0 * lj * lj * h2 - diff * diff);
    sum += std::sqrt(bracket) / (2.0 * lj * lj * h2);
  }
  return sum;
}

RVector pav(const RVector& x) {
  if (!x.allFinite()) {
    throw InputError("pav: non-finite input");
  }
  const Index p = x.size();
  // Blocks of pooled values; a left-to-right sweep with back-merging.
  std::vector<double> mean;
  std::vector<Index> count;
  mean.reserve(static_cast<std::size_t>(p));
  count.reserve(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) {
    mean.push_back(x(i));
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const double merged =
          (mean[mean.size() - 2] * static_cast<double>(count[count.size() - 2]) +
           mean.back() * static_cast<double>(count.back())) /
          static_cast<double>(count[count.size() - 2] + count.back());
      count[count.size() - 2] += count.back();
      mean[mean.size() - 2] = merged;
      mean.pop_back();
      count.pop_back();
    }
  }
  RVector out(p);
  Index pos = 0;
  for (std::size_t b = 0; b < mean.size(); ++b) {
    for (Index k = 0; k < count[b]; ++k) {
      out(pos++) = mean[b];
    }
  }
  return out;
}

ShrinkageResult lwd_shrink(const CMatrix& x, double noise_floor,
                           LwdDetail* detail) {
  const Index p = x.rows();
  const Index n = x.cols();
  if (n < 2 || p < 2) {
    throw InputError("lwd_shrink: need p >= 2 and n >= 2");
  }
  if (p == n) {
    throw UnsupportedRegimeError(
        "lwd_shrink: p == n is outside the supported regime");
  }
  if (!(noise_floor > 0.0)) {
    throw InputError("lwd_shrink: noise floor must be positive");
  }
  const double ratio = static_cast<double>(p) / static_cast<double>(n);
  if (std::abs(ratio - 1.0) < 0.05) {
    std::cerr << "warning: lwd_shrink with p/n = " << ratio
              << " is close to the excluded ratio 1\n";
  }

  const HermitianMatrix s = scm(x);
  const EigenSystem es = hermitian_eig(s);
  const RVector& lam = es.eigenvalues;
  const double lam_max = lam(p - 1);
  if (!(lam_max > 0.0)) {
    throw NumericalError("lwd_shrink: sample covariance has no positive "
                         "eigenvalues");
  }

  // Exact zero/nonzero split of the sample spectrum.
  const double zero_tol = 1e-10 * lam_max;
  Index num_zero = 0;
  while (num_zero < p && lam(num_zero) <= zero_tol) {
    ++num_zero;
  }
  const Index expected_zero = std::max<Index>(p - n, 0);
  if (num_zero != expected_zero) {
    throw NumericalError(
        "lwd_shrink: found " + std::to_string(num_zero) +
        " numerically zero sample eigenvalues, expected " +
        std::to_string(expected_zero));
  }

  // Kernel sums run over the positive eigenvalues only; zeros at the head
  // are replaced so the state invariant (positivity on the active range)
  // holds structurally.
  KernelState state = KernelState::from_eigenvalues(lam, n);
  const double min_np = static_cast<double>(std::min(p, n));

  // z approximates the boundary Stieltjes transform of the sample spectrum
  // built from the positive eigenvalues. When p > n the sample spectrum
  // also carries an atom of mass (p - n)/p at zero; the Ledoit-Peche
  // inversion then simplifies to 1 / (lambda |z|^2) for positive
  // eigenvalues, with z playing the role of the companion-matrix transform.
  RVector d_tilde(p);
  for (Index j = 0; j < p; ++j) {
    if (j < num_zero) {
      const double a0 = kernel_a(0.0, state);
      const double denom = (ratio - 1.0) * a0 / static_cast<double>(n);
      if (!(denom > 0.0)) {
        throw NumericalError(
            "lwd_shrink: nonpositive shrunken eigenvalue for the zero "
            "eigenvalue branch, a(0, lambda) = " + std::to_string(a0));
      }
      d_tilde(j) = 1.0 / denom;
    } else {
      const double lj = lam(j);
      const Complex z(kernel_a(lj, state) / min_np,
                      kernel_b(lj, state) / min_np);
      if (p < n) {
        const Complex w = 1.0 - ratio - ratio * lj * z;
        d_tilde(j) = lj / std::norm(w);
      } else {
        const double denom = lj * std::norm(z);
        if (!(denom > 0.0)) {
          throw NumericalError(
              "lwd_shrink: degenerate transform at eigenvalue " +
              std::to_string(lj));
        }
        d_tilde(j) = 1.0 / denom;
      }
    }
  }

  RVector d_check = d_tilde.cwiseMax(noise_floor).cwiseMin(lam_max);
  RVector d_hat = pav(d_check);

  if (detail != nullptr) {
    detail->d_tilde = d_tilde;
    detail->d_check = d_check;
    detail->d_hat = d_hat;
  }
  return make_result(es.eigenvectors, d_hat, EstimatorTag::LWD);
}

}  // namespace stad
