#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stad/core.hpp"
#include "stad/rng.hpp"

namespace stad {

/// Population spectrum for the spiked model: all eigenvalues 1 except the
/// largest r, with r fixed independently of p.
struct SpikedSpectrum {
  Index dim = 0;
  std::vector<double> spikes;  // each > 1, listed descending

  void validate() const;
};

enum class Distribution { Gaussian, Laplace };
enum class Hypothesis { H0, H1 };

/// diag(1, ..., 1, spikes ascending at the tail). Smallest eigenvalue is
/// exactly 1 and the operator norm equals the largest spike.
HermitianMatrix spiked_covariance(const SpikedSpectrum& spec);

/// Steering vector uniform on the unit sphere of C^p.
CVector sample_steering(Index p, RngStream& rng);

/// p x n training matrix with iid zero-mean columns of covariance R.
/// Gaussian columns are F z with z standard complex normal; Laplace columns
/// are F w where each component of w is g sqrt(E), g standard complex normal
/// and E a unit-mean exponential (unit variance per component).
CMatrix sample_training(const HermitianMatrix& r, Index n, Distribution dist,
                        RngStream& rng);

/// Test vector under H0 (F z) or H1 (a s + F z).
CVector sample_test_vector(const HermitianMatrix& r, const CVector& s,
                           Complex a, Hypothesis hyp, RngStream& rng);

/// Same sampling with a precomputed coloring factor F (F F' = R). These
/// draw identical streams to the HermitianMatrix overloads and exist so
/// repeated sampling does not redo the eigendecomposition.
CMatrix sample_training_with_factor(const CMatrix& f, Index n,
                                    Distribution dist, RngStream& rng);
CVector sample_test_vector_with_factor(const CMatrix& f, const CVector& s,
                                       Complex a, Hypothesis hyp,
                                       RngStream& rng);

/// Scenario template for the harness: the population model plus seeding.
struct Scenario {
  Index p = 0;
  Index n = 0;
  std::optional<SpikedSpectrum> spectrum;
  std::optional<std::string> covariance_path;
  Complex amplitude = Complex(4.0, 0.0);
  Distribution distribution = Distribution::Gaussian;
  std::uint64_t seed = 0;

  double gamma() const { return static_cast<double>(p) / static_cast<double>(n); }
};

}  // namespace stad
