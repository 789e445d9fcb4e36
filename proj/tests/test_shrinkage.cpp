#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stad/datagen.hpp"
#include "stad/shrinkage.hpp"
#include "test_util.hpp"

using namespace stad;
using namespace stad::test;

namespace {

// Reference kernel sums, transcribed directly from the defining formulas
// with 1-based indexing, independent of the library implementation.
double ref_kernel_a(double lambda, const std::vector<double>& lam_sorted,
                    Index n) {
  const Index p = static_cast<Index>(lam_sorted.size());
  const double h = std::pow(static_cast<double>(n), -0.35);
  double sum = 0.0;
  for (Index j = p - n + 1; j <= p; ++j) {
    if (j < 1) continue;
    const double lj = lam_sorted[static_cast<std::size_t>(j - 1)];
    const double diff = lambda - lj;
    double bracket = diff * diff - 4.0 * lj * lj * h * h;
    if (bracket < 0.0) bracket = 0.0;
    double sgn = 0.0;
    if (diff > 0.0) sgn = 1.0;
    if (diff < 0.0) sgn = -1.0;
    sum += (sgn * std::sqrt(bracket) - lambda + lj) / (2.0 * lj * lj * h * h);
  }
  return sum;
}

double ref_kernel_b(double lambda, const std::vector<double>& lam_sorted,
                    Index n) {
  const Index p = static_cast<Index>(lam_sorted.size());
  const double h = std::pow(static_cast<double>(n), -0.35);
  double sum = 0.0;
  for (Index j = p - n + 1; j <= p; ++j) {
    if (j < 1) continue;
    const double lj = lam_sorted[static_cast<std::size_t>(j - 1)];
    const double diff = lambda - lj;
    double bracket = 4.0 * lj * lj * h * h - diff * diff;
    if (bracket < 0.0) bracket = 0.0;
    sum += std::sqrt(bracket) / (2.0 * lj * lj * h * h);
  }
  return sum;
}

// Exhaustive isotonic projection: every partition of 1..p into consecutive
// blocks, pooled means per block, feasibility = nondecreasing means, pick
// the least-squares winner. Exponential, so only for small p.
RVector brute_force_isotonic(const RVector& x) {
  const Index p = x.size();
  const unsigned long masks = 1UL << (p - 1);
  double best = std::numeric_limits<double>::infinity();
  RVector best_fit = x;
  for (unsigned long mask = 0; mask < masks; ++mask) {
    RVector fit(p);
    Index start = 0;
    double prev_mean = -std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (Index i = 0; i < p; ++i) {
      const bool boundary = (i == p - 1) || ((mask >> i) & 1UL);
      if (!boundary) continue;
      const Index len = i - start + 1;
      const double mean = x.segment(start, len).mean();
      if (mean < prev_mean) {
        feasible = false;
        break;
      }
      fit.segment(start, len).setConstant(mean);
      prev_mean = mean;
      start = i + 1;
    }
    if (!feasible) continue;
    const double sse = (fit - x).squaredNorm();
    if (sse < best) {
      best = sse;
      best_fit = fit;
    }
  }
  return best_fit;
}

std::vector<double> to_sorted_vector(const RVector& v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("scm basics") {
  CMatrix x(2, 2);
  x << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  const HermitianMatrix s = scm(x);
  CHECK((s.mat() - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);

  CMatrix single(2, 1);
  single << Complex(1, 0), Complex(0, 1);
  const HermitianMatrix s1 = scm(single);
  CHECK(s1.mat()(0, 0).real() == doctest::Approx(1.0));
  CHECK(s1.mat()(1, 1).real() == doctest::Approx(1.0));
  CHECK(s1.mat()(0, 1) == Complex(0, -1));

  CHECK_THROWS_AS(scm(CMatrix(0, 0)), InputError);
}

TEST_CASE("scm is consistent for large n") {
  RngStream rng(201, "shr-scm");
  SpikedSpectrum spec{6, {5.0, 3.0}};
  const HermitianMatrix r = spiked_covariance(spec);
  const CMatrix x = sample_training(r, 60000, Distribution::Gaussian, rng);
  CHECK((scm(x).mat() - r.mat()).norm() / r.mat().norm() < 0.05);
}

TEST_CASE("oracle shrinker in a diagonal basis reads the population diagonal") {
  RVector sd(3);
  sd << 1.0, 2.0, 3.0;  // distinct; eigenvectors are coordinate axes
  const EigenSystem es = hermitian_eig(HermitianMatrix::FromDiagonal(sd));
  RVector rd(3);
  rd << 7.0, 5.0, 2.0;
  const ShrinkageResult res =
      oracle_shrinker(es, HermitianMatrix::FromDiagonal(rd));
  // Eigenvectors of the diagonal input are axis vectors in ascending
  // eigenvalue order, i.e. the identity permutation here.
  CHECK(res.shrunk_eigs(0) == doctest::Approx(7.0));
  CHECK(res.shrunk_eigs(1) == doctest::Approx(5.0));
  CHECK(res.shrunk_eigs(2) == doctest::Approx(2.0));
}

TEST_CASE("oracle shrinker satisfies the trace identity tr(R*^-2 R) = tr(R*^-1)") {
  RngStream rng(202, "shr-oracle-id");
  for (int k = 0; k < 20; ++k) {
    const Index p = 5;
    const HermitianMatrix r = random_pd(p, rng);
    const CMatrix x = random_cmatrix(p, 9, rng);
    const EigenSystem es = hermitian_eig(scm(x));
    const ShrinkageResult res = oracle_shrinker(es, r);
    const CMatrix inv = res.matrix.mat().inverse();
    const double lhs = (inv * inv * r.mat()).trace().real();
    const double rhs = inv.trace().real();
    CHECK(rel_error(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("oracle shrinker preserves the population trace") {
  RngStream rng(203, "shr-oracle-tr");
  const HermitianMatrix r = random_pd(6, rng);
  const CMatrix x = random_cmatrix(6, 10, rng);
  const ShrinkageResult res = oracle_shrinker(hermitian_eig(scm(x)), r);
  CHECK(rel_error(res.shrunk_eigs.sum(), r.mat().trace().real()) < 1e-9);
}

TEST_CASE("fml thresholds from below") {
  RVector d(3);
  d << 0.2, 0.8, 4.0;
  const EigenSystem es = hermitian_eig(HermitianMatrix::FromDiagonal(d));
  const ShrinkageResult res = fml(es, 1.0);
  CHECK(res.shrunk_eigs(0) == doctest::Approx(1.0));
  CHECK(res.shrunk_eigs(1) == doctest::Approx(1.0));
  CHECK(res.shrunk_eigs(2) == doctest::Approx(4.0));
  CHECK_THROWS_AS(fml(es, 0.0), InputError);
  CHECK_THROWS_AS(fml(es, -1.0), InputError);
}

TEST_CASE("anderson estimates the floor from the bulk") {
  RVector d(4);
  d << 1.0, 2.0, 3.0, 10.0;
  const EigenSystem es = hermitian_eig(HermitianMatrix::FromDiagonal(d));
  const ShrinkageResult res = anderson(es, 1);
  // sigma2 = mean(1, 2, 3) = 2.
  CHECK(res.shrunk_eigs(0) == doctest::Approx(2.0));
  CHECK(res.shrunk_eigs(1) == doctest::Approx(2.0));
  CHECK(res.shrunk_eigs(2) == doctest::Approx(3.0));
  CHECK(res.shrunk_eigs(3) == doctest::Approx(10.0));
  CHECK_THROWS_AS(anderson(es, 4), InputError);
  CHECK_THROWS_AS(anderson(es, -1), InputError);
}

TEST_CASE("lw_linear degenerate dispersion returns the sample eigenvalues") {
  CMatrix x(2, 2);
  x << Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(2, 0);
  const ShrinkageResult res = lw_linear(x);
  CHECK(res.shrunk_eigs(0) == doctest::Approx(2.0));
  CHECK(res.shrunk_eigs(1) == doctest::Approx(2.0));
}

TEST_CASE("lw_linear matches an independent transcription of the weights") {
  RngStream rng(204, "shr-lwlin");
  const Index p = 5, n = 12;
  const CMatrix x = random_cmatrix(p, n, rng);
  const ShrinkageResult res = lw_linear(x);

  const CMatrix s = (x * x.adjoint()) / static_cast<double>(n);
  const double m = s.trace().real() / static_cast<double>(p);
  const double d2 = (s - m * CMatrix::Identity(p, p)).squaredNorm() /
                    static_cast<double>(p);
  double acc = 0.0;
  for (Index k = 0; k < n; ++k) {
    acc += (x.col(k) * x.col(k).adjoint() - s).squaredNorm() /
           static_cast<double>(p);
  }
  const double b_bar2 = std::min(d2, acc / (static_cast<double>(n) *
                                            static_cast<double>(n)));
  const double rho1 = b_bar2 / d2 * m;
  const double rho2 = 1.0 - b_bar2 / d2;
  const CMatrix expected =
      rho1 * CMatrix::Identity(p, p) + rho2 * s;
  CHECK((res.matrix.mat() - expected).norm() / expected.norm() < 1e-10);
  CHECK(rho2 >= 0.0);
  CHECK(rho2 <= 1.0);
}

TEST_CASE("lw_linear approaches the sample covariance as n grows") {
  RngStream rng(205, "shr-lwlin-n");
  SpikedSpectrum spec{4, {6.0}};
  const HermitianMatrix r = spiked_covariance(spec);
  const CMatrix x = sample_training(r, 20000, Distribution::Gaussian, rng);
  const ShrinkageResult res = lw_linear(x);
  const HermitianMatrix s = scm(x);
  CHECK((res.matrix.mat() - s.mat()).norm() / s.mat().norm() < 0.01);
}

TEST_CASE("kernel sums match a reference transcription on a fixed spectrum") {
  RVector lam(4);
  lam << 1.0, 2.0, 3.0, 4.0;
  const KernelState state = KernelState::from_eigenvalues(lam, 4);
  const std::vector<double> ref = to_sorted_vector(lam);
  for (double lambda : {0.0, 0.5, 1.0, 2.5, 3.9, 4.0, 7.0, 50.0}) {
    CHECK(std::abs(kernel_a(lambda, state) - ref_kernel_a(lambda, ref, 4)) <
          1e-12);
    CHECK(std::abs(kernel_b(lambda, state) - ref_kernel_b(lambda, ref, 4)) <
          1e-12);
  }
}

TEST_CASE("kernel sums with p > n use only the top n eigenvalues") {
  RVector lam(5);
  lam << 0.0, 0.0, 1.0, 2.0, 5.0;
  const KernelState state = KernelState::from_eigenvalues(lam, 3);
  const std::vector<double> ref = to_sorted_vector(lam);
  for (double lambda : {0.0, 1.5, 2.5, 10.0}) {
    CHECK(std::abs(kernel_a(lambda, state) - ref_kernel_a(lambda, ref, 3)) <
          1e-12);
    CHECK(std::abs(kernel_b(lambda, state) - ref_kernel_b(lambda, ref, 3)) <
          1e-12);
  }
}

TEST_CASE("kernel single-atom closed forms") {
  RVector lam(1);
  const double c = 3.0;
  lam << c;
  const Index n = 1;
  const KernelState state = KernelState::from_eigenvalues(lam, n);
  const double h = std::pow(static_cast<double>(n), -0.35);
  // At the atom: a vanishes, b = 1 / (c h).
  CHECK(kernel_a(c, state) == doctest::Approx(0.0));
  CHECK(kernel_b(c, state) == doctest::Approx(1.0 / (c * h)));
}

TEST_CASE("kernel_a far field behaves like -sum 1/(lambda - lambda_j)") {
  RVector lam(3);
  lam << 1.0, 2.0, 4.0;
  const KernelState state = KernelState::from_eigenvalues(lam, 3);
  const double big = 1e6;
  double expected = 0.0;
  for (Index j = 0; j < 3; ++j) expected -= 1.0 / (big - lam(j));
  // First-order expansion of the square root; cancellation at large lambda
  // limits the achievable agreement.
  CHECK(std::abs(kernel_a(big, state) - expected) < 1e-9);
  // The density kernel vanishes outside every smoothing window.
  CHECK(kernel_b(big, state) == 0.0);
  CHECK(kernel_b(lam(2) + 2.0 * lam(2) * state.h + 1e-9, state) == 0.0);
}

TEST_CASE("kernel rejects zero eigenvalues inside the active range") {
  RVector lam(2);
  lam << 0.0, 1.0;
  const KernelState state = KernelState::from_eigenvalues(lam, 2);
  CHECK_THROWS_AS(kernel_a(1.0, state), NumericalError);
  CHECK_THROWS_AS(kernel_b(1.0, state), NumericalError);
}

TEST_CASE("pav known answers") {
  RVector a(2);
  a << 2.0, 1.0;
  const RVector pa = pav(a);
  CHECK(pa(0) == doctest::Approx(1.5));
  CHECK(pa(1) == doctest::Approx(1.5));

  RVector b(3);
  b << 3.0, 1.0, 2.0;
  const RVector pb = pav(b);
  CHECK(pb(0) == doctest::Approx(2.0));
  CHECK(pb(1) == doctest::Approx(2.0));
  CHECK(pb(2) == doctest::Approx(2.0));

  RVector sorted(4);
  sorted << 1.0, 2.0, 2.0, 5.0;
  CHECK((pav(sorted) - sorted).norm() == 0.0);
}

TEST_CASE("pav equals the exhaustive isotonic projection") {
  RngStream rng(206, "shr-pav");
  for (int k = 0; k < 200; ++k) {
    const Index p = 2 + static_cast<Index>(rng.uniform() * 6.0);
    RVector x(p);
    for (Index i = 0; i < p; ++i) x(i) = 4.0 * (rng.uniform() - 0.5);
    const RVector got = pav(x);
    const RVector want = brute_force_isotonic(x);
    CHECK((got - want).norm() < 1e-10);
    for (Index i = 1; i < p; ++i) CHECK(got(i) >= got(i - 1) - 1e-12);
    // Projection preserves the mean.
    CHECK(std::abs(got.mean() - x.mean()) < 1e-10);
  }
}

TEST_CASE("lwd pipeline matches an independent transcription, n > p") {
  RngStream rng(207, "shr-lwd");
  const Index p = 4, n = 8;
  SpikedSpectrum spec{p, {5.0}};
  const HermitianMatrix r = spiked_covariance(spec);
  const CMatrix x = sample_training(r, n, Distribution::Gaussian, rng);

  LwdDetail detail;
  const ShrinkageResult res = lwd_shrink(x, 1.0, &detail);

  const EigenSystem es = hermitian_eig(scm(x));
  const std::vector<double> lam = to_sorted_vector(es.eigenvalues);
  const double ratio = static_cast<double>(p) / static_cast<double>(n);
  const double m = static_cast<double>(std::min(p, n));
  RVector want_tilde(p);
  for (Index j = 0; j < p; ++j) {
    const double lj = lam[static_cast<std::size_t>(j)];
    const Complex z(ref_kernel_a(lj, lam, n) / m,
                    ref_kernel_b(lj, lam, n) / m);
    const Complex w = Complex(1.0 - ratio, 0.0) - ratio * lj * z;
    want_tilde(j) = lj / std::norm(w);
  }
  CHECK((detail.d_tilde - want_tilde).norm() < 1e-12 * want_tilde.norm());

  const double lam_max = lam.back();
  RVector want_check(p);
  for (Index j = 0; j < p; ++j) {
    want_check(j) = std::clamp(want_tilde(j), 1.0, lam_max);
  }
  CHECK((detail.d_check - want_check).norm() == 0.0);
  CHECK((detail.d_hat - brute_force_isotonic(want_check)).norm() < 1e-10);
  CHECK((res.shrunk_eigs - detail.d_hat).norm() == 0.0);
}

TEST_CASE("lwd pipeline zero-eigenvalue branch, p > n") {
  RngStream rng(208, "shr-lwd-wide");
  const Index p = 6, n = 3;
  const CMatrix x = random_cmatrix(p, n, rng);
  LwdDetail detail;
  const ShrinkageResult res = lwd_shrink(x, 0.5, &detail);

  const EigenSystem es = hermitian_eig(scm(x));
  const std::vector<double> lam = to_sorted_vector(es.eigenvalues);
  const double ratio = static_cast<double>(p) / static_cast<double>(n);
  const double a0 = ref_kernel_a(0.0, lam, n);
  const double want_zero =
      1.0 / ((ratio - 1.0) * a0 / static_cast<double>(n));
  for (Index j = 0; j < p - n; ++j) {
    CHECK(rel_error(detail.d_tilde(j), want_zero) < 1e-12);
  }
  // Positive eigenvalues use the companion-transform inversion.
  for (Index j = p - n; j < p; ++j) {
    const double lj = lam[static_cast<std::size_t>(j)];
    const Complex z(ref_kernel_a(lj, lam, n) / static_cast<double>(n),
                    ref_kernel_b(lj, lam, n) / static_cast<double>(n));
    CHECK(rel_error(detail.d_tilde(j), 1.0 / (lj * std::norm(z))) < 1e-12);
  }
  for (Index j = 0; j < p; ++j) {
    CHECK(res.shrunk_eigs(j) >= 0.5 - 1e-15);
    CHECK(res.shrunk_eigs(j) <= lam.back() + 1e-15);
  }
}

TEST_CASE("lwd output shares the sample eigenbasis") {
  RngStream rng(209, "shr-lwd-basis");
  const Index p = 8, n = 16;
  const CMatrix x = random_cmatrix(p, n, rng);
  const ShrinkageResult res = lwd_shrink(x);
  const CMatrix s = scm(x).mat();
  const CMatrix commutator = res.matrix.mat() * s - s * res.matrix.mat();
  CHECK(commutator.norm() / s.norm() < 1e-9);
}

TEST_CASE("lwd rejects p == n and bad inputs") {
  RngStream rng(210, "shr-lwd-rej");
  const CMatrix square = random_cmatrix(4, 4, rng);
  CHECK_THROWS_AS(lwd_shrink(square), UnsupportedRegimeError);
  const CMatrix ok = random_cmatrix(4, 8, rng);
  CHECK_THROWS_AS(lwd_shrink(ok, 0.0), InputError);
  CHECK_THROWS_AS(lwd_shrink(CMatrix(1, 8)), InputError);
}

TEST_CASE("estimator tag round-trip") {
  for (EstimatorTag tag :
       {EstimatorTag::SCM, EstimatorTag::Oracle, EstimatorTag::FML,
        EstimatorTag::AndersonR, EstimatorTag::LWLinear, EstimatorTag::LWD}) {
    CHECK(estimator_tag_from_string(to_string(tag)) == tag);
  }
  CHECK_THROWS_AS(estimator_tag_from_string("bogus"), InputError);
}
