#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mrelay/analytic.hpp"
#include "mrelay/numerics.hpp"
#include "oracles.hpp"

using namespace mrelay;
using namespace mrelay::analytic;

namespace {

const ScenarioParams kUnit{1.0, 1.0, 0.0, 0.0, 0.0};
const ScenarioParams kStop{1.0, 1.0, 0.0, 0.3, 2.0};

ScenarioParams with_th(ScenarioParams p, double th) {
  p.t_h = th;
  return p;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

// Expected values below were computed with mpmath at 30 digits.

TEST_CASE("p_vertical") {
  CHECK(near(p_vertical(kUnit), 0.367879441171442, 1e-15));
  CHECK(near(p_vertical({1e-9, 1.0, 0, 0, 0}), 1.0, 1e-8));
  CHECK(p_vertical({1.0, 1e3, 0, 0, 0}) < 1e-300);
}

TEST_CASE("expected_tau1_sc against the Poisson-pmf oracle") {
  CHECK(near(expected_tau1_sc(kUnit), oracle::max_uniform_mean_by_pmf(1.0, 1.0), 1e-12));
  CHECK(near(expected_tau1_sc(kUnit), 0.581976706869326, 1e-14));
  for (double lambda : {0.1, 0.7, 2.5, 9.0}) {
    CAPTURE(lambda);
    CHECK(near(expected_tau1_sc({lambda, 1.3, 0, 0, 0}),
               oracle::max_uniform_mean_by_pmf(lambda, 1.3), 1e-12));
  }
  // limits: one uniform arrival, dense arrivals
  CHECK(near(expected_tau1_sc({1e-7, 2.0, 0, 0, 0}), 1.0, 1e-6));
  CHECK(near(expected_tau1_sc({1e4, 2.0, 0, 0, 0}), 2.0, 1e-3));
}

TEST_CASE("expected_tau1_sc lies in (T_M/2, T_M) and increases with lambda") {
  for (double tm : {0.3, 1.0, 4.0}) {
    double prev = 0.0;
    for (double lambda = 0.01; lambda < 20.0; lambda *= 1.2) {
      const double v = expected_tau1_sc({lambda, tm, 0, 0, 0});
      CHECK(v > tm / 2.0);
      CHECK(v < tm);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("pdf_tau1_sc values, domain and normalization") {
  const double e = std::exp(1.0);
  CHECK(near(pdf_tau1_sc(1.0, kUnit), e / (e - 1.0), 1e-14));
  CHECK(near(pdf_tau1_sc(1e-12, kUnit), 1.0 / (e - 1.0), 1e-11));
  CHECK_THROWS_AS(pdf_tau1_sc(0.0, kUnit), std::domain_error);
  CHECK_THROWS_AS(pdf_tau1_sc(1.0001, kUnit), std::domain_error);
  for (double lambda : {0.05, 1.0, 3.0, 12.0})
    for (double tm : {0.5, 1.0, 2.0}) {
      const ScenarioParams p{lambda, tm, 0, 0, 0};
      const double mass = numerics::integrate([&](double s) { return pdf_tau1_sc(s, p); }, 0.0,
                                              tm, 1e-12);
      CHECK(near(mass, 1.0, 1e-10));
    }
}

TEST_CASE("expected_t_given_tau") {
  CHECK(near(expected_t_given_tau(1.0, kUnit), 0.581976706869326, 1e-14));
  CHECK(near(expected_t_given_tau(0.5, kUnit), 0.270747041268399, 1e-14));
  CHECK(near(expected_t_given_tau(1e-9, kUnit), 0.5e-9, 1e-15));
  CHECK_THROWS_AS(expected_t_given_tau(0.0, kUnit), std::domain_error);
}

TEST_CASE("expected_t_given_tau matches conditioned window maxima") {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double x = oracle::conditioned_window_max(0.5, 1.0, rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - expected_t_given_tau(0.5, kUnit)) < 4.0 * se);
}

TEST_CASE("expected_t1_sc quadrature") {
  CHECK(near(expected_t1_sc(kUnit), 0.325454646840276, 1e-9));
  // tightening the tolerance moves the result by less than 1e-6
  CHECK(near(expected_t1_sc(kUnit, T1Method::Quadrature, 1e-9),
             expected_t1_sc(kUnit, T1Method::Quadrature, 5e-10), 1e-6));
  // small-lambda limit T_M / 4; mpmath gives 0.250006944513888 at lambda = 1e-4
  const ScenarioParams slow{1e-4, 1.0, 0, 0, 0};
  CHECK(near(expected_t1_sc(slow), 0.250006944513888, 1e-9));
  CHECK(near(expected_t1_sc(slow), 0.25, 1e-4));
}

TEST_CASE("expected_t1_sc closed form is evaluated and its deviation reported") {
  for (double lambda : {0.2, 1.0, 3.0}) {
    const ScenarioParams p{lambda, 1.0, 0, 0, 0};
    const double closed = expected_t1_sc(p, T1Method::ClosedForm);
    const double quad = expected_t1_sc(p);
    CHECK(std::isfinite(closed));
    MESSAGE("lambda=" << lambda << " closed_form=" << closed << " quadrature=" << quad
                      << " |dev|=" << std::fabs(closed - quad));
  }
  const AnalyticReport r = make_report(kUnit);
  CHECK(r.t1_method == T1Method::Quadrature);
  CHECK(r.t1_closed_form_deviation == std::fabs(r.e_t1_sc_closed_form - r.e_t1_sc));
}

TEST_CASE("expected_handoffs_sm") {
  CHECK(near(expected_handoffs_sm(kUnit), std::exp(1.0) - 1.0, 1e-15));
  CHECK(near(expected_handoffs_sm({1e-9, 1.0, 0, 0, 0}), 0.0, 1e-8));
  for (double lambda : {0.3, 1.0, 2.2})
    CHECK(expected_handoffs_sm({lambda, 1.0, 0, 0, 0}) ==
          expected_handoffs_sm_stopping_geo({lambda, 1.0, 0, 0.0, 2.0}));
}

TEST_CASE("expected_handoffs_sm matches a geometric-trials oracle") {
  Rng rng(5);
  const double q = p_vertical(kUnit);
  double sum = 0.0, sq = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double m = static_cast<double>(oracle::geometric_trials(q, rng));
    sum += m;
    sq += m * m;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::fabs(mean - expected_handoffs_sm(kUnit)) < 4.0 * se);
}

TEST_CASE("expected_unserved_per_round is linear in n") {
  CHECK(expected_unserved_per_round(kUnit, 0) == 0.0);
  const double one = expected_unserved_per_round(kUnit, 1);
  CHECK(near(one, 0.453715676854801, 1e-9));
  CHECK(near(expected_unserved_per_round(kUnit, 3), 3.0 * one, 1e-14));
}

TEST_CASE("expected_handoffs_sc") {
  CHECK(near(expected_handoffs_sc(kUnit), 1.181993051197362, 1e-9));
  CHECK(near(expected_handoffs_sc({1e-9, 1.0, 0, 0, 0}), 0.0, 1e-8));
}

TEST_CASE("expected_handoffs_sc never exceeds expected_handoffs_sm") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> log_rate(-4.0, 1.5);
  std::uniform_real_distribution<double> window(0.05, 3.0);
  for (int i = 0; i < 300; ++i) {
    const ScenarioParams p{std::exp(log_rate(gen)), window(gen), 0, 0, 0};
    CAPTURE(p.lambda);
    CAPTURE(p.t_m);
    CHECK(expected_handoffs_sc(p) <= expected_handoffs_sm(p));
    CHECK(expected_handoffs_sc(p) > 0.0);
  }
}

TEST_CASE("ratio_t2_sc") {
  CHECK(near(ratio_t2_sc(kUnit).value, 1.0 - p_vertical(kUnit), 1e-12));
  CHECK(near(ratio_t2_sc(with_th(kUnit, 0.05)).value, 0.610379011671407, 1e-9));
  CHECK_FALSE(ratio_t2_sc(with_th(kUnit, 0.05)).negative_warning);
  const Ratio big = ratio_t2_sc(with_th(kUnit, 5.0));
  CHECK(big.value < 0.0);
  CHECK(big.negative_warning);
  double prev = 2.0;
  for (double th = 0.0; th < 2.0; th += 0.1) {
    const double v = ratio_t2_sc(with_th(kUnit, th)).value;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("p_s_prime and delta") {
  CHECK(p_s_prime({1, 1, 0, 0.0, 2.0}) == 0.0);
  const ScenarioParams no_dwell{1.0, 1.0, 0.0, 0.3, 0.0};
  CHECK(near(p_s_prime(no_dwell), 0.189636167648567, 1e-14));
  CHECK(near(p_s_prime(no_dwell), (1.0 - std::exp(-1.0)) * 0.3, 1e-15));
  CHECK(near(p_s_prime(kStop), 0.555262899335785, 1e-14));
  CHECK(near(delta(kStop), 0.255262899335785, 1e-14));
}

TEST_CASE("p_s_prime_seq") {
  CHECK(p_s_prime_seq(kStop, 0) == 0.3);
  CHECK(near(p_s_prime_seq(kStop, 1), 0.376578869800735, 1e-14));
  CHECK(near(p_s_prime_seq(kStop, 200), 0.402826715269639, 1e-14));
  double prev = 0.0;
  for (int j = 0; j < 30; ++j) {
    const double v = p_s_prime_seq(kStop, j);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(p_s_prime_seq(kStop, -1), std::domain_error);
}

TEST_CASE("p_vertical_hat") {
  CHECK(near(p_vertical_hat(kStop, 1), 0.318084564218406, 1e-14));
  CHECK(near(p_vertical_hat(kStop, 2), 0.305373779555306, 1e-14));
  CHECK_THROWS_AS(p_vertical_hat(kStop, 0), std::domain_error);
  for (int j : {1, 2, 7, 40}) {
    CHECK(near(p_vertical_hat({1.0, 1.0, 0, 0.0, 2.0}, j), std::exp(-1.0), 1e-12));
    CHECK(near(p_vertical_hat({1.0, 1.0, 0, 0.3, 0.0}, j), std::exp(-1.0), 1e-12));
  }
}

TEST_CASE("p_vertical_hat is non-increasing in j when delta >= 0") {
  int checked = 0;
  for (double ps : {0.1, 0.3, 0.5, 0.9, 1.0})
    for (double ts : {0.5, 1.0, 2.0, 5.0})
      for (double lambda : {0.5, 1.0, 2.0}) {
        const ScenarioParams p{lambda, 1.0, 0.0, ps, ts};
        if (delta(p) < 0.0) continue;
        ++checked;
        for (int j = 1; j < 25; ++j) {
          const double a = p_vertical_hat(p, j);
          CHECK(p_vertical_hat(p, j + 1) <= a);
          CHECK(a > 0.0);
          CHECK(a < 1.0);
        }
      }
  CHECK(checked >= 30);
}

TEST_CASE("stopping sum") {
  const TruncatedSum s = expected_handoffs_sm_stopping_sum(kStop, 1e-10);
  CHECK(near(s.value, 2.253372263058818, 1e-9));
  CHECK(s.terms > 10);
  const TruncatedSum plain = expected_handoffs_sm_stopping_sum({1.0, 1.0, 0, 0.0, 0.0}, 1e-10);
  CHECK(near(plain.value, std::exp(1.0) - 1.0, 1e-10));
  CHECK_THROWS_AS(expected_handoffs_sm_stopping_sum(kStop, 0.0), std::invalid_argument);
}

TEST_CASE("stopping sum grows as the tail tolerance shrinks") {
  double prev = 0.0;
  for (double tol = 1e-1; tol >= 1e-12; tol /= 10.0) {
    const TruncatedSum s = expected_handoffs_sm_stopping_sum(kStop, tol);
    // strictly increasing until the sum has converged
    CHECK((s.value > prev || std::fabs(s.value - 2.253372263058818) < 1e-14));
    CHECK(s.value <= 2.253372263058818 + 1e-12);
    CHECK(2.253372263058818 - s.value <= tol);
    prev = s.value;
  }
}

TEST_CASE("stopping sum is non-decreasing in P_S and T_S") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (double ts : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      double prev = 0.0;
      for (double ps = 0.0; ps <= 1.0 + 1e-12; ps += 0.05) {
        const double v = expected_handoffs_sm_stopping_sum({lambda, 1.0, 0, ps, ts}).value;
        CAPTURE(lambda);
        CAPTURE(ts);
        CAPTURE(ps);
        CHECK(v >= prev - 1e-9);
        prev = v;
      }
    }
    for (double ps : {0.0, 0.1, 0.3, 0.7, 1.0}) {
      double prev = 0.0;
      for (double ts = 0.0; ts <= 4.0; ts += 0.25) {
        const double v = expected_handoffs_sm_stopping_sum({lambda, 1.0, 0, ps, ts}).value;
        CHECK(v >= prev - 1e-9);
        prev = v;
      }
    }
  }
}

TEST_CASE("geometric approximation of stopping handoffs") {
  CHECK(near(expected_handoffs_sm_stopping_geo(kStop), 2.233051694138964, 1e-13));
  CHECK(near(expected_handoffs_sm_stopping_geo({1.3, 0.8, 0, 0.0, 3.0}), std::expm1(1.3 * 0.8),
             1e-12));
  const double sum = expected_handoffs_sm_stopping_sum(kStop).value;
  CHECK(std::fabs(expected_handoffs_sm_stopping_geo(kStop) - sum) / sum < 0.02);
}

TEST_CASE("expected_service_sm_stopping") {
  CHECK(near(expected_service_sm_stopping({1.0, 1.0, 0, 0.0, 2.0}, 1), 0.418023293130674, 1e-14));
  CHECK(near(expected_service_sm_stopping({1.0, 1.0, 0, 0.0, 2.0}, 5), 0.418023293130674, 1e-14));
  CHECK(near(expected_service_sm_stopping(kStop, 1), 0.588280236306555, 1e-13));
  CHECK(near(expected_service_sm_stopping(kStop, 2), 0.623065604613234, 1e-13));
  CHECK(std::isfinite(expected_service_sm_stopping({1.0, 1.0, 0, 1.0, 2.0}, 3)));
  CHECK_THROWS_AS(expected_service_sm_stopping(kStop, 0), std::domain_error);
}

TEST_CASE("expected_t2_stopping") {
  CHECK(near(expected_t2_stopping({1.0, 1.0, 0, 0.0, 0.0}), std::exp(1.0) - 1.0, 1e-12));
  CHECK(near(expected_t2_stopping(kStop), 2.952498941127062, 1e-12));
  for (double ps : {0.1, 0.3, 0.6}) {
    double prev = 0.0;
    for (double ts = 0.0; ts <= 5.0; ts += 0.1) {
      const double v = expected_t2_stopping({1.0, 1.0, 0, ps, ts});
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("ratio_t2_sm_stopping") {
  CHECK(near(ratio_t2_sm_stopping({1.0, 1.0, 0, 0.0, 0.0}).value, 1.0 - std::exp(-1.0), 1e-12));
  CHECK(near(ratio_t2_sm_stopping(kStop).value, 0.746995504642729, 1e-12));
  CHECK(near(ratio_t2_sm_stopping(with_th(kStop, 0.05)).value, 0.718746898793613, 1e-12));
  CHECK(ratio_t2_sm_stopping(with_th(kStop, 10.0)).negative_warning);
}

TEST_CASE("reduction identities hold to 1e-12 across a grid") {
  for (double lambda : {0.2, 0.5, 1.0, 2.0, 4.0})
    for (double tm : {0.25, 1.0, 2.0}) {
      const double pv = std::exp(-lambda * tm);
      for (double ts : {0.0, 0.7, 3.0}) {
        const ScenarioParams no_stop{lambda, tm, 0.0, 0.0, ts};
        const ScenarioParams no_dwell{lambda, tm, 0.0, 0.4, 0.0};
        for (int j : {1, 2, 3, 10}) {
          CHECK(std::fabs(p_vertical_hat(no_stop, j) - pv) <= 1e-12);
          CHECK(std::fabs(p_vertical_hat(no_dwell, j) - pv) <= 1e-12);
        }
        CHECK(std::fabs(expected_handoffs_sm_stopping_geo(no_stop) - std::expm1(lambda * tm)) <=
              1e-12 * std::max(1.0, std::expm1(lambda * tm)));
        const double t2 = (1.0 - pv) / (lambda * pv);
        CHECK(std::fabs(expected_t2_stopping(no_stop) - t2) <= 1e-12 * std::max(1.0, t2));
        CHECK(std::fabs(ratio_t2_sm_stopping(no_stop).value - (1.0 - pv)) <= 1e-12);
      }
      CHECK(std::fabs(ratio_t2_sc({lambda, tm, 0.0, 0.0, 0.0}).value - (1.0 - pv)) <= 1e-12);
    }
}

TEST_CASE("report invariants") {
  for (const ScenarioParams& p : {kUnit, kStop, with_th(kStop, 0.05), ScenarioParams{2, 0.5, 0.1, 0.5, 1}}) {
    const AnalyticReport r = make_report(p);
    for (double prob : {r.p_v, r.p_s_prime, r.p_v_hat_1, r.p_v_hat_2}) {
      CHECK(prob >= 0.0);
      CHECK(prob <= 1.0);
    }
    for (double t : {r.e_tau1_sc, r.e_t1_sc, r.e_tau_sm_stop_1, r.e_tau_sm_stop_2, r.a2_tilde})
      CHECK(t >= 0.0);
    CHECK(r.e_m_sc <= r.e_m_sm);
    CHECK(r.truncation_terms > 0);
  }
}
