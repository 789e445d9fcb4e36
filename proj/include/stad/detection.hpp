#pragma once

#include <utility>

#include "stad/core.hpp"

namespace stad {

/// AMF statistic T = |s' R_hat^{-1} x|^2 / (s' R_hat^{-1} s).
double amf_statistic(const CVector& s, const HermitianMatrix& r_hat,
                     const CVector& x);

/// Effective SINR |a|^2 (s' R_hat^{-1} s)^2 / (s' R_hat^{-1} R R_hat^{-1} s).
double effective_sinr(const CVector& s, const HermitianMatrix& r_hat,
                      const HermitianMatrix& r, Complex a);

/// Normalized SINR in (0, 1]; equals 1 iff the adaptive filter matches the
/// ideal filter direction.
double nsinr(const CVector& s, const HermitianMatrix& r_hat,
             const HermitianMatrix& r);

/// Steering-free proxy tr(R_hat^{-1})^2 / (tr(R^{-1}) tr(R_hat^{-2} R)).
double eta_tilde(const HermitianMatrix& r_hat, const HermitianMatrix& r);

/// Conditional chi-square scale of the AMF statistic:
/// s' R_hat^{-1} R R_hat^{-1} s / (s' R_hat^{-1} s).
double xi(const CVector& s, const HermitianMatrix& r_hat,
          const HermitianMatrix& r);

/// Data-driven effective-SINR estimate; equals sqrt(amf_statistic).
double nu_hat(const CVector& s, const HermitianMatrix& r_hat,
              const CVector& x);

/// Q(alpha, beta) = int_alpha^inf e^{-z-beta} I0(2 sqrt(beta z)) dz, by a
/// Poisson mixture of regularized upper incomplete gamma terms with a
/// rigorous truncation bound. Absolute accuracy 1e-10 or better.
double q_function(double alpha, double beta);

/// Conditional false-alarm probability exp(-tau / xi).
double pfa_conditional(double tau, double xi);

/// Conditional detection probability Q(tau / xi, nu_sq).
double pd_conditional(double tau, double xi, double nu_sq);

/// Confidence interval for the conditional detection probability at
/// confidence q: endpoints Q(tau, nu_minus^2) <= Q(tau, nu_plus^2) with
/// nu_{+-} = max{0, nu_hat +- sqrt(log(1/(1-q)))}.
std::pair<double, double> pd_interval(double tau, double nu_hat, double q);

/// |10 log10(eta)| for eta in (0, 1].
double rmb_loss_db(double eta);

/// One-shot summary for a (steering, estimate, return) triple. When the
/// population covariance is unknown, xi defaults to its asymptotic value 1
/// and pfa_predicted to exp(-tau).
struct DetectionReport {
  double statistic = 0.0;
  double threshold = 0.0;
  bool decide_h1 = false;
  double xi = 1.0;
  double nu_hat = 0.0;
  double pfa_predicted = 0.0;
  double pd_lower = 0.0;
  double pd_upper = 0.0;
  double confidence = 0.0;
};

DetectionReport make_detection_report(const CVector& s,
                                      const HermitianMatrix& r_hat,
                                      const CVector& x, double tau, double q,
                                      const HermitianMatrix* population = nullptr);

}  // namespace stad
