#pragma once

#include <cstddef>

#include "mrelay/model.hpp"

// Closed-form expectations and approximations for the relay handoff process.
// All functions take validated ScenarioParams and are pure.
namespace mrelay::analytic {

enum class T1Method { Quadrature, ClosedForm };

inline constexpr double kDefaultQuadTol = 1e-9;
inline constexpr double kDefaultTailTol = 1e-10;

// Probability that a coverage window sees no arrival: e^{-lambda t_m}.
double p_vertical(const ScenarioParams& p);

// E[tau_1 | M >= 1] under S_c: mean of the latest arrival offset in (0, t_m].
double expected_tau1_sc(const ScenarioParams& p);

// Density of tau_1 given at least one arrival; throws std::domain_error outside (0, t_m].
double pdf_tau1_sc(double s, const ScenarioParams& p);

// E[t_j | tau_j = s]: the same conditioned-maximum mean for a window of length s.
double expected_t_given_tau(double s, const ScenarioParams& p);

// E[t_1 | M >= 1]. Quadrature composes pdf_tau1_sc with expected_t_given_tau and
// is the ground truth; ClosedForm evaluates the dilogarithm expression on the
// principal branch and returns its real part.
double expected_t1_sc(const ScenarioParams& p, T1Method method = T1Method::Quadrature,
                      double quad_tol = kDefaultQuadTol);

// E[M] under S_m without stopping: (1 - P_V) / P_V = e^{lambda t_m} - 1.
double expected_handoffs_sm(const ScenarioParams& p);

// Approximate E[U | M^(Sc) = n] = n lambda (E[tau_1] + E[t_1]) / 2.
double expected_unserved_per_round(const ScenarioParams& p, double n);

// Approximate E[M^(Sc)] = 2 E[M^(Sm)] / (lambda E[tau_1 + t_1] + 2).
double expected_handoffs_sc(const ScenarioParams& p);

struct Ratio {
  double value = 0.0;
  bool negative_warning = false;  // value < 0: t_h too large for the approximation
};

// Effective T2 ratio for S_c (non-stopping).
Ratio ratio_t2_sc(const ScenarioParams& p);

// Stopping model.

// P_S': next fmBS is stopping given the current one stopped.
double p_s_prime(const ScenarioParams& p);
// Delta = P_S' - P_S.
double delta(const ScenarioParams& p);
// P_S'^(j) = P_S sum_{k=0}^{j} Delta^k, j >= 0.
double p_s_prime_seq(const ScenarioParams& p, int j);
// Vertical handoff probability at the end of the (j-1)-st service, j >= 1.
double p_vertical_hat(const ScenarioParams& p, int j);
// Limit of p_vertical_hat as j -> infinity.
double p_vertical_hat_limit(const ScenarioParams& p);

struct TruncatedSum {
  double value = 0.0;
  std::size_t terms = 0;
};

// Survival-sum E[M^(Sm)] = sum_{m>=0} prod_{j=1}^{m+1} (1 - p_vertical_hat(j)),
// stopped once a geometric bound on the remaining tail is below tail_tol, or
// closed with the exact geometric tail once the factors reach their limit.
TruncatedSum expected_handoffs_sm_stopping_sum(const ScenarioParams& p,
                                               double tail_tol = kDefaultTailTol);

// Two-probability geometric approximation (1 - P_V^(1)) / P_V^(2).
double expected_handoffs_sm_stopping_geo(const ScenarioParams& p);

// E[tau_j^(Sm)] under stopping, j >= 1 (three truncated-exponential terms).
double expected_service_sm_stopping(const ScenarioParams& p, int j);

// A2 ~ E[T2]: t_m + P_S t_s + E[M] (E[tau_1] + E[tau_2]) / 2 using the geo E[M].
double expected_t2_stopping(const ScenarioParams& p);

// Effective T2 ratio for S_m with stopping fmBSs.
Ratio ratio_t2_sm_stopping(const ScenarioParams& p);

struct AnalyticReport {
  double p_v = 0.0;
  double e_tau1_sc = 0.0;
  double e_t1_sc = 0.0;
  T1Method t1_method = T1Method::Quadrature;
  double e_t1_sc_closed_form = 0.0;
  double t1_closed_form_deviation = 0.0;  // |closed form - quadrature|
  double e_m_sm = 0.0;
  double e_m_sc = 0.0;
  Ratio r2_sc;
  double p_s_prime = 0.0;
  double delta = 0.0;
  double p_v_hat_1 = 0.0;
  double p_v_hat_2 = 0.0;
  double e_m_sm_stop_sum = 0.0;
  double e_m_sm_stop_geo = 0.0;
  std::size_t truncation_terms = 0;
  double e_tau_sm_stop_1 = 0.0;
  double e_tau_sm_stop_2 = 0.0;
  double a2_tilde = 0.0;
  Ratio r2_sm_stop;
};

AnalyticReport make_report(const ScenarioParams& p, double quad_tol = kDefaultQuadTol,
                           double tail_tol = kDefaultTailTol);

}  // namespace mrelay::analytic
