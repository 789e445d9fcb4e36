#include <doctest.h>

#include <cmath>

#include "stad/datagen.hpp"
#include "test_util.hpp"

using namespace stad;
using namespace stad::test;

TEST_CASE("rng substreams are deterministic and label-separated") {
  RngStream a(42, "x", 1, 2);
  RngStream b(42, "x", 1, 2);
  RngStream c(42, "y", 1, 2);
  bool all_equal = true;
  bool any_differs = false;
  for (int i = 0; i < 32; ++i) {
    const double va = a.uniform();
    all_equal = all_equal && (va == b.uniform());
    any_differs = any_differs || (va != c.uniform());
  }
  CHECK(all_equal);
  CHECK(any_differs);
}

TEST_CASE("rng normal moments") {
  RngStream rng(1, "moments");
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("cnormal has unit second moment") {
  RngStream rng(2, "cnormal");
  const int n = 100000;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    sum2 += std::norm(rng.cnormal());
  }
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("spiked_covariance layouts") {
  SpikedSpectrum none{4, {}};
  CHECK((spiked_covariance(none).mat() - CMatrix::Identity(4, 4)).norm() ==
        0.0);

  SpikedSpectrum two{4, {9.0, 4.0}};
  const HermitianMatrix r = spiked_covariance(two);
  CHECK(r.mat()(0, 0).real() == 1.0);
  CHECK(r.mat()(1, 1).real() == 1.0);
  CHECK(r.mat()(2, 2).real() == 4.0);
  CHECK(r.mat()(3, 3).real() == 9.0);

  SpikedSpectrum bad{4, {0.5}};
  CHECK_THROWS_AS(spiked_covariance(bad), InputError);
  SpikedSpectrum too_many{2, {2.0, 3.0}};
  CHECK_THROWS_AS(spiked_covariance(too_many), InputError);
}

TEST_CASE("sample_steering is unit norm, including p=1") {
  RngStream rng(3, "steer");
  for (int k = 0; k < 20; ++k) {
    const CVector s = sample_steering(16, rng);
    CHECK(std::abs(s.norm() - 1.0) < 1e-12);
  }
  const CVector s1 = sample_steering(1, rng);
  CHECK(std::abs(std::abs(s1(0)) - 1.0) < 1e-12);
}

TEST_CASE("steering coordinates have mean square 1/p") {
  RngStream rng(4, "steer-uniform");
  const Index p = 16;
  const int draws = 100000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    sum += std::norm(sample_steering(p, rng)(0));
  }
  const double mean = sum / draws;
  // Var |<s,e1>|^2 ~ 1/p^2; three standard errors.
  const double se = 1.0 / (static_cast<double>(p) *
                           std::sqrt(static_cast<double>(draws)));
  CHECK(std::abs(mean - 1.0 / static_cast<double>(p)) < 3.0 * se);
}

TEST_CASE("steering distribution is rotation invariant in moments") {
  RngStream rng(5, "steer-rot");
  const Index p = 6;
  RngStream qrng(6, "steer-rot-q");
  const EigenSystem qes = hermitian_eig(random_pd(p, qrng));
  const CMatrix q = qes.eigenvectors;  // a fixed unitary
  const int draws = 20000;
  CVector mean_s = CVector::Zero(p);
  CVector mean_qs = CVector::Zero(p);
  double e2_s = 0.0, e2_qs = 0.0;
  for (int k = 0; k < draws; ++k) {
    const CVector s = sample_steering(p, rng);
    const CVector qs = q * s;
    mean_s += s;
    mean_qs += qs;
    e2_s += std::norm(s(2));
    e2_qs += std::norm(qs(2));
  }
  CHECK(mean_s.norm() / draws < 0.02);
  CHECK(mean_qs.norm() / draws < 0.02);
  CHECK(std::abs(e2_s - e2_qs) / draws < 0.01);
}

TEST_CASE("gaussian training columns have covariance R") {
  RngStream rng(7, "train-gauss");
  RVector d(2);
  d << 4.0, 1.0;
  const HermitianMatrix r = HermitianMatrix::FromDiagonal(d);
  const CMatrix x = sample_training(r, 100000, Distribution::Gaussian, rng);
  const CMatrix s = x * x.adjoint() / static_cast<double>(x.cols());
  CHECK((s - r.mat()).norm() / r.mat().norm() < 0.05);
}

TEST_CASE("identity training has unit entrywise variance") {
  RngStream rng(8, "train-var");
  const CMatrix x = sample_training(HermitianMatrix::Identity(1), 100000,
                                    Distribution::Gaussian, rng);
  double sum2 = 0.0;
  for (Index j = 0; j < x.cols(); ++j) sum2 += std::norm(x(0, j));
  CHECK(sum2 / static_cast<double>(x.cols()) ==
        doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("laplace training: correct covariance and heavier fourth moment") {
  RngStream rng(9, "train-laplace");
  RVector d(2);
  d << 4.0, 1.0;
  const HermitianMatrix r = HermitianMatrix::FromDiagonal(d);
  const CMatrix x = sample_training(r, 100000, Distribution::Laplace, rng);
  const CMatrix s = x * x.adjoint() / static_cast<double>(x.cols());
  CHECK((s - r.mat()).norm() / r.mat().norm() < 0.05);

  // Fourth moment of a component: Gaussian gives E|z|^4 = 2 var^2; the
  // Laplace mixture doubles that.
  double m2 = 0.0, m4 = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    const double a2 = std::norm(x(1, j));
    m2 += a2;
    m4 += a2 * a2;
  }
  m2 /= static_cast<double>(x.cols());
  m4 /= static_cast<double>(x.cols());
  CHECK(m4 > 2.5 * m2 * m2);
}

TEST_CASE("test vector hypotheses") {
  RngStream rng(10, "testvec");
  const Index p = 4;
  const HermitianMatrix r = HermitianMatrix::Identity(p);
  CVector s = CVector::Zero(p);
  s(0) = 1.0;

  CVector mean_h0 = CVector::Zero(p);
  CVector mean_h1 = CVector::Zero(p);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    mean_h0 += sample_test_vector(r, s, Complex(0, 0), Hypothesis::H0, rng);
    mean_h1 += sample_test_vector(r, s, Complex(5, 0), Hypothesis::H1, rng);
  }
  mean_h0 /= static_cast<double>(draws);
  mean_h1 /= static_cast<double>(draws);
  const double se = 3.0 / std::sqrt(static_cast<double>(draws));
  for (Index i = 0; i < p; ++i) {
    CHECK(std::abs(mean_h0(i)) < se);
  }
  CHECK(std::abs(mean_h1(0) - Complex(5, 0)) < se);
  for (Index i = 1; i < p; ++i) {
    CHECK(std::abs(mean_h1(i)) < se);
  }

  CHECK_THROWS_AS(
      sample_test_vector(r, s, Complex(0, 0), Hypothesis::H1, rng),
      InputError);
}
