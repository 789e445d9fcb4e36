#include "stad/detection.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace stad {

namespace {

Eigen::LLT<CMatrix> pd_factorization(const HermitianMatrix& a,
                                     const char* who) {
  Eigen::LLT<CMatrix> llt(a.mat());
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(who) +
                         ": matrix is not positive definite");
  }
  if (llt.rcond() < 1e-14) {
    throw NumericalError(std::string(who) +
                         ": matrix is numerically singular (rcond " +
                         std::to_string(llt.rcond()) + ")");
  }
  return llt;
}

void require_dims(const CVector& s, const HermitianMatrix& a,
                  const char* who) {
  if (s.size() != a.dim()) {
    throw InputError(std::string(who) + ": dimension mismatch");
  }
}

}  // namespace

double amf_statistic(const CVector& s, const HermitianMatrix& r_hat,
                     const CVector& x) {
  require_dims(s, r_hat, "amf_statistic");
  if (x.size() != s.size()) {
    throw InputError("amf_statistic: test vector length mismatch");
  }
  const auto llt = pd_factorization(r_hat, "amf_statistic");
  const CVector w = llt.solve(s);  // R_hat^{-1} s
  const double denom = s.dot(w).real();
  if (!(denom > 0.0)) {
    throw NumericalError("amf_statistic: nonpositive s' R_hat^{-1} s");
  }
  return std::norm(w.dot(x)) / denom;
}

double effective_sinr(const CVector& s, const HermitianMatrix& r_hat,
                      const HermitianMatrix& r, Complex a) {
  require_dims(s, r_hat, "effective_sinr");
  require_dims(s, r, "effective_sinr");
  const auto llt = pd_factorization(r_hat, "effective_sinr");
  const CVector w = llt.solve(s);
  const double num = s.dot(w).real();
  const double denom = w.dot(r.mat() * w).real();
  if (!(denom > 0.0)) {
    throw NumericalError("effective_sinr: nonpositive filter output power");
  }
  return std::norm(a) * num * num / denom;
}

double nsinr(const CVector& s, const HermitianMatrix& r_hat,
             const HermitianMatrix& r) {
  require_dims(s, r_hat, "nsinr");
  require_dims(s, r, "nsinr");
  const auto llt_hat = pd_factorization(r_hat, "nsinr");
  const auto llt_pop = pd_factorization(r, "nsinr");
  const CVector w = llt_hat.solve(s);
  const double num = s.dot(w).real();
  const double ideal = s.dot(llt_pop.solve(s)).real();
  const double power = w.dot(r.mat() * w).real();
  if (!(ideal > 0.0) || !(power > 0.0)) {
    throw NumericalError("nsinr: nonpositive quadratic form");
  }
  return num * num / (ideal * power);
}

double eta_tilde(const HermitianMatrix& r_hat, const HermitianMatrix& r) {
  if (r_hat.dim() != r.dim()) {
    throw InputError("eta_tilde: dimension mismatch");
  }
  const auto llt_hat = pd_factorization(r_hat, "eta_tilde");
  const auto llt_pop = pd_factorization(r, "eta_tilde");
  const Index p = r.dim();
  const CMatrix inv_hat = llt_hat.solve(CMatrix::Identity(p, p));
  const double tr_inv_hat = inv_hat.trace().real();
  const double tr_inv_pop =
      llt_pop.solve(CMatrix::Identity(p, p)).trace().real();
  const double tr_mixed = (inv_hat * inv_hat * r.mat()).trace().real();
  if (!(tr_inv_pop > 0.0) || !(tr_mixed > 0.0)) {
    throw NumericalError("eta_tilde: nonpositive trace");
  }
  return tr_inv_hat * tr_inv_hat / (tr_inv_pop * tr_mixed);
}

double xi(const CVector& s, const HermitianMatrix& r_hat,
          const HermitianMatrix& r) {
  require_dims(s, r_hat, "xi");
  require_dims(s, r, "xi");
  const auto llt = pd_factorization(r_hat, "xi");
  const CVector w = llt.solve(s);
  const double num = w.dot(r.mat() * w).real();
  const double denom = s.dot(w).real();
  if (!(denom > 0.0)) {
    throw NumericalError("xi: nonpositive s' R_hat^{-1} s");
  }
  return num / denom;
}

double nu_hat(const CVector& s, const HermitianMatrix& r_hat,
              const CVector& x) {
  return std::sqrt(amf_statistic(s, r_hat, x));
}

double q_function(double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw InputError("q_function: arguments must be finite and nonnegative");
  }
  if (alpha == 0.0) {
    return 1.0;
  }
  // Q(alpha, beta) = sum_k Poisson(k; beta) * P[Gamma(k+1) > alpha], with the
  // gamma survival term computed incrementally. Each gamma term is <= 1, so
  // truncating when the remaining Poisson mass is below 1e-13 bounds the
  // tail error by 1e-13.
  const double log_alpha = std::log(alpha);
  const double log_beta = beta > 0.0 ? std::log(beta) : 0.0;
  double gamma_term = std::exp(-alpha);  // e^{-alpha} * alpha^0 / 0!
  double gamma_survival = gamma_term;    // = P[Gamma(1) > alpha]
  double pois_mass = 0.0;
  double total = 0.0;
  for (int k = 0;; ++k) {
    const double pois =
        beta == 0.0 ? (k == 0 ? 1.0 : 0.0)
                    : std::exp(k * log_beta - beta - std::lgamma(k + 1.0));
    total += pois * gamma_survival;
    pois_mass += pois;
    if (1.0 - pois_mass < 1e-13 && k >= static_cast<int>(beta)) {
      break;
    }
    if (k > 100000) {
      throw NumericalError("q_function: series failed to converge");
    }
    gamma_term *= alpha / (k + 1.0);
    gamma_survival += gamma_term;  // now P[Gamma(k+2) > alpha]
    if (gamma_survival > 1.0) gamma_survival = 1.0;
  }
  return std::min(total, 1.0);
}

double pfa_conditional(double tau, double xi) {
  if (!(tau >= 0.0)) {
    throw InputError("pfa_conditional: tau must be nonnegative");
  }
  if (!(xi > 0.0)) {
    throw InputError("pfa_conditional: xi must be positive");
  }
  return std::exp(-tau / xi);
}

double pd_conditional(double tau, double xi, double nu_sq) {
  if (!(tau >= 0.0)) {
    throw InputError("pd_conditional: tau must be nonnegative");
  }
  if (!(xi > 0.0)) {
    throw InputError("pd_conditional: xi must be positive");
  }
  if (!(nu_sq >= 0.0)) {
    throw InputError("pd_conditional: nu_sq must be nonnegative");
  }
  return q_function(tau / xi, nu_sq);
}

std::pair<double, double> pd_interval(double tau, double nu_hat, double q) {
  if (!(tau >= 0.0)) {
    throw InputError("pd_interval: tau must be nonnegative");
  }
  if (!(nu_hat >= 0.0)) {
    throw InputError("pd_interval: nu_hat must be nonnegative");
  }
  if (!(q >= 0.0) || q >= 1.0) {
    throw InputError("pd_interval: confidence must lie in [0, 1)");
  }
  const double t = std::sqrt(std::log(1.0 / (1.0 - q)));
  const double nu_minus = std::max(0.0, nu_hat - t);
  const double nu_plus = std::max(0.0, nu_hat + t);
  return {q_function(tau, nu_minus * nu_minus),
          q_function(tau, nu_plus * nu_plus)};
}

double rmb_loss_db(double eta) {
  if (!(eta > 0.0) || eta > 1.0 + 1e-10) {
    throw InputError("rmb_loss_db: eta must lie in (0, 1]");
  }
  return std::abs(10.0 * std::log10(std::min(eta, 1.0)));
}

DetectionReport make_detection_report(const CVector& s,
                                      const HermitianMatrix& r_hat,
                                      const CVector& x, double tau, double q,
                                      const HermitianMatrix* population) {
  DetectionReport report;
  report.threshold = tau;
  report.confidence = q;
  report.statistic = amf_statistic(s, r_hat, x);
  report.decide_h1 = report.statistic > tau;
  report.nu_hat = std::sqrt(report.statistic);
  report.xi = population != nullptr ? xi(s, r_hat, *population) : 1.0;
  report.pfa_predicted = pfa_conditional(tau, report.xi);
  const auto interval = pd_interval(tau, report.nu_hat, q);
  report.pd_lower = interval.first;
  report.pd_upper = interval.second;
  return report;
}

}  // namespace stad
