#include "stad/datagen.hpp"

#include <algorithm>
#include <cmath>

namespace stad {

void SpikedSpectrum::validate() const {
  if (dim < 1) {
    throw InputError("SpikedSpectrum: dim must be positive");
  }
  if (static_cast<Index>(spikes.size()) >= dim) {
    throw InputError("SpikedSpectrum: need fewer spikes than dimensions");
  }
  for (double t : spikes) {
    if (!(t > 1.0)) {
      throw InputError("SpikedSpectrum: every spike must exceed the base "
                       "eigenvalue 1, got " + std::to_string(t));
    }
  }
}

HermitianMatrix spiked_covariance(const SpikedSpectrum& spec) {
  spec.validate();
  RVector d = RVector::Ones(spec.dim);
  std::vector<double> tail = spec.spikes;
  std::sort(tail.begin(), tail.end());  // ascending at the tail
  const Index r = static_cast<Index>(tail.size());
  for (Index i = 0; i < r; ++i) {
    d(spec.dim - r + i) = tail[static_cast<std::size_t>(i)];
  }
  return HermitianMatrix::FromDiagonal(d);
}

CVector sample_steering(Index p, RngStream& rng) {
  if (p < 1) {
    throw InputError("sample_steering: p must be positive");
  }
  CVector s = rng.cnormal_vector(p);
  double norm = s.norm();
  while (norm == 0.0) {
    s = rng.cnormal_vector(p);
    norm = s.norm();
  }
  return s / norm;
}

CMatrix sample_training_with_factor(const CMatrix& f, Index n,
                                    Distribution dist, RngStream& rng) {
  if (n < 1) {
    throw InputError("sample_training: n must be positive");
  }
  const Index p = f.rows();
  CMatrix w(p, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < p; ++i) {
      Complex z = rng.cnormal();
      if (dist == Distribution::Laplace) {
        z *= std::sqrt(rng.exponential());
      }
      w(i, j) = z;
    }
  }
  return f * w;
}

CMatrix sample_training(const HermitianMatrix& r, Index n, Distribution dist,
                        RngStream& rng) {
  return sample_training_with_factor(sqrt_factor(r), n, dist, rng);
}

CVector sample_test_vector_with_factor(const CMatrix& f, const CVector& s,
                                       Complex a, Hypothesis hyp,
                                       RngStream& rng) {
  const Index p = f.rows();
  if (s.size() != p) {
    throw InputError("sample_test_vector: steering vector length mismatch");
  }
  if (hyp == Hypothesis::H1 && a == Complex(0.0, 0.0)) {
    throw InputError("sample_test_vector: H1 requires a nonzero amplitude");
  }
  CVector x = f * rng.cnormal_vector(p);
  if (hyp == Hypothesis::H1) {
    x += a * s;
  }
  return x;
}

CVector sample_test_vector(const HermitianMatrix& r, const CVector& s,
                           Complex a, Hypothesis hyp, RngStream& rng) {
  return sample_test_vector_with_factor(sqrt_factor(r), s, a, hyp, rng);
}

}  // namespace stad
