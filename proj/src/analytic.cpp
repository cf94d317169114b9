#include "mrelay/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrelay/numerics.hpp"

namespace mrelay::analytic {

namespace {

// Mean offset of the latest of K ~ Poisson(lambda w | K >= 1) uniform arrivals
// in a window of length w: (lambda w - (1 - e^{-lambda w})) / (lambda (1 - e^{-lambda w})).
double conditioned_max_mean(double w, double lambda) {
  const double x = lambda * w;
  if (x < 1e-5) return (x / 2.0 + x * x / 12.0) / lambda;
  const double em1 = -std::expm1(-x);
  return (x - em1) / (lambda * em1);
}

// sum_{k=0}^{j-1} delta^k
double geometric_partial(double d, int j) {
  if (j <= 0) return 0.0;
  if (d == 0.0) return 1.0;
  return (1.0 - std::pow(d, j)) / (1.0 - d);
}

// 1 - e^{-P_S lambda T_S}
double stop_extension_prob(const ScenarioParams& p) {
  return -std::expm1(-p.p_s * p.lambda * p.t_s);
}

}  // namespace

double p_vertical(const ScenarioParams& p) { return std::exp(-p.lambda * p.t_m); }

double expected_tau1_sc(const ScenarioParams& p) { return conditioned_max_mean(p.t_m, p.lambda); }

double pdf_tau1_sc(double s, const ScenarioParams& p) {
  if (!(s > 0.0 && s <= p.t_m)) throw std::domain_error("pdf_tau1_sc: s must lie in (0, t_m]");
  const double a = p.lambda * p.t_m;
  return p.lambda * std::exp(p.lambda * s - a) / -std::expm1(-a);
}

double expected_t_given_tau(double s, const ScenarioParams& p) {
  if (!(s > 0.0)) throw std::domain_error("expected_t_given_tau: s must be > 0");
  return conditioned_max_mean(s, p.lambda);
}

double expected_t1_sc(const ScenarioParams& p, T1Method method, double quad_tol) {
  if (method == T1Method::Quadrature) {
    return numerics::integrate(
        [&](double s) { return expected_t_given_tau(s, p) * pdf_tau1_sc(s, p); }, 0.0, p.t_m,
        quad_tol);
  }
  // Dilogarithm closed form, evaluated literally with complex intermediates.
  const double a = p.lambda * p.t_m;
  const double ea = std::exp(a);
  const numerics::ComplexValue bracket = numerics::dilog(ea) - numerics::kPiSquaredOver6 + 1.0 +
                                         ea * (a - 1.0) +
                                         a * numerics::log_principal(1.0 - ea);
  return (bracket / (p.lambda * std::expm1(a))).real() - 1.0 / p.lambda;
}

double expected_handoffs_sm(const ScenarioParams& p) { return std::expm1(p.lambda * p.t_m); }

double expected_unserved_per_round(const ScenarioParams& p, double n) {
  return n * p.lambda * (expected_tau1_sc(p) + expected_t1_sc(p)) / 2.0;
}

double expected_handoffs_sc(const ScenarioParams& p) {
  const double pair = expected_tau1_sc(p) + expected_t1_sc(p);
  return 2.0 * expected_handoffs_sm(p) / (p.lambda * pair + 2.0);
}

Ratio ratio_t2_sc(const ScenarioParams& p) {
  const double served = 1.0 - p_vertical(p);
  const double pair = expected_tau1_sc(p) + expected_t1_sc(p);
  const double value = served - 2.0 * served * p.t_h / (pair + 2.0 / p.lambda);
  return {value, value < 0.0};
}

double p_s_prime(const ScenarioParams& p) {
  const double ext = stop_extension_prob(p);
  return ext + (1.0 - ext) * -std::expm1(-p.lambda * p.t_m) * p.p_s;
}

double delta(const ScenarioParams& p) { return p_s_prime(p) - p.p_s; }

double p_s_prime_seq(const ScenarioParams& p, int j) {
  if (j < 0) throw std::domain_error("p_s_prime_seq: j must be >= 0");
  return p.p_s * geometric_partial(delta(p), j + 1);
}

double p_vertical_hat(const ScenarioParams& p, int j) {
  if (j < 1) throw std::domain_error("p_vertical_hat: j must be >= 1");
  return p_vertical(p) *
         (1.0 - p.p_s * stop_extension_prob(p) * geometric_partial(delta(p), j));
}

double p_vertical_hat_limit(const ScenarioParams& p) {
  return p_vertical(p) * (1.0 - p.p_s * stop_extension_prob(p) / (1.0 - delta(p)));
}

TruncatedSum expected_handoffs_sm_stopping_sum(const ScenarioParams& p, double tail_tol) {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be > 0");
  constexpr std::size_t kMaxTerms = 100'000'000;
  const double limit_factor = 1.0 - p_vertical_hat_limit(p);
  const double d = delta(p);
  TruncatedSum out;
  double product = 1.0;
  for (std::size_t m = 0; m < kMaxTerms; ++m) {
    const int j = static_cast<int>(std::min<std::size_t>(m + 1, 1u << 30));
    product *= 1.0 - p_vertical_hat(p, j);
    out.value += product;
    out.terms = m + 1;
    // Remaining factors (j >= m + 2) are bounded by the limit or, when Delta < 0
    // makes them alternate, by the next two.
    const double r = std::max({limit_factor, 1.0 - p_vertical_hat(p, j + 1),
                               1.0 - p_vertical_hat(p, j + 2)});
    if (r >= 1.0) throw std::runtime_error("stopping sum: tail ratio >= 1, series diverges");
    if (product * r / (1.0 - r) < tail_tol) return out;
    // Once Delta^j is below rounding every later factor equals the limit and
    // the tail is an exact geometric series.
    if (std::pow(std::fabs(d), j) < 1e-17) {
      out.value += product * limit_factor / (1.0 - limit_factor);
      return out;
    }
  }
  throw std::runtime_error("stopping sum: term limit reached before tail_tol");
}

double expected_handoffs_sm_stopping_geo(const ScenarioParams& p) {
  return (1.0 - p_vertical_hat(p, 1)) / p_vertical_hat(p, 2);
}

double expected_service_sm_stopping(const ScenarioParams& p, int j) {
  if (j < 1) throw std::domain_error("expected_service_sm_stopping: j must be >= 1");
  using numerics::trunc_mean;
  const double d = delta(p);
  const double prev_stop = p_s_prime_seq(p, j - 1);
  const double a = p.lambda * p.t_m;

  double total = 0.0;
  if (const double k = trunc_mean(p.p_s * a, p.lambda); k != 0.0) total += (1.0 - prev_stop) * k;
  if (const double k = trunc_mean((1.0 - p.p_s) * a, p.lambda); k != 0.0)
    total += (1.0 - prev_stop * d / (1.0 - p.p_s)) * k;
  // prev_stop / P_S == geometric_partial(d, j), finite at P_S = 0
  if (const double k = trunc_mean(p.p_s * p.lambda * (p.t_m + p.t_s), p.lambda); k != 0.0)
    total += geometric_partial(d, j) * p_s_prime(p) * k;
  return total;
}

double expected_t2_stopping(const ScenarioParams& p) {
  const double handoffs = expected_handoffs_sm_stopping_geo(p);
  const double service =
      (expected_service_sm_stopping(p, 1) + expected_service_sm_stopping(p, 2)) / 2.0;
  return p.t_m + p.p_s * p.t_s + handoffs * service;
}

Ratio ratio_t2_sm_stopping(const ScenarioParams& p) {
  const double a2 = expected_t2_stopping(p);
  const double value = (a2 - p.t_h * expected_handoffs_sm_stopping_geo(p)) / (1.0 / p.lambda + a2);
  return {value, value < 0.0};
}

AnalyticReport make_report(const ScenarioParams& p, double quad_tol, double tail_tol) {
  AnalyticReport r;
  r.p_v = p_vertical(p);
  r.e_tau1_sc = expected_tau1_sc(p);
  r.e_t1_sc = expected_t1_sc(p, T1Method::Quadrature, quad_tol);
  r.t1_method = T1Method::Quadrature;
  r.e_t1_sc_closed_form = expected_t1_sc(p, T1Method::ClosedForm);
  r.t1_closed_form_deviation = std::fabs(r.e_t1_sc_closed_form - r.e_t1_sc);
  r.e_m_sm = expected_handoffs_sm(p);
  r.e_m_sc = 2.0 * r.e_m_sm / (p.lambda * (r.e_tau1_sc + r.e_t1_sc) + 2.0);
  const double served = 1.0 - r.p_v;
  r.r2_sc.value = served - 2.0 * served * p.t_h / (r.e_tau1_sc + r.e_t1_sc + 2.0 / p.lambda);
  r.r2_sc.negative_warning = r.r2_sc.value < 0.0;
  r.p_s_prime = p_s_prime(p);
  r.delta = delta(p);
  r.p_v_hat_1 = p_vertical_hat(p, 1);
  r.p_v_hat_2 = p_vertical_hat(p, 2);
  const TruncatedSum sum = expected_handoffs_sm_stopping_sum(p, tail_tol);
  r.e_m_sm_stop_sum = sum.value;
  r.truncation_terms = sum.terms;
  r.e_m_sm_stop_geo = expected_handoffs_sm_stopping_geo(p);
  r.e_tau_sm_stop_1 = expected_service_sm_stopping(p, 1);
  r.e_tau_sm_stop_2 = expected_service_sm_stopping(p, 2);
  r.a2_tilde = expected_t2_stopping(p);
  r.r2_sm_stop = ratio_t2_sm_stopping(p);
  return r;
}

}  // namespace mrelay::analytic
