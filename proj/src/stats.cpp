#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mrelay/numerics.hpp"

namespace mrelay::numerics {

MeanCI mean_ci(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mean_ci: empty sample");
  MeanCI out;
  out.n = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    out.ci95_half_width = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double v : samples) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(out.n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(out.n));
  out.ci95_half_width = kZ95 * out.std_error;
  return out;
}

TwoSampleResult chi_square_homogeneity(std::span<const long> a, std::span<const long> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chi_square_homogeneity: empty sample");
  const long top = std::max(*std::max_element(a.begin(), a.end()),
                            *std::max_element(b.begin(), b.end()));
  if (*std::min_element(a.begin(), a.end()) < 0 || *std::min_element(b.begin(), b.end()) < 0)
    throw std::invalid_argument("chi_square_homogeneity: negative count");
  std::vector<double> ca(top + 1, 0.0), cb(top + 1, 0.0);
  for (long v : a) ca[v] += 1.0;
  for (long v : b) cb[v] += 1.0;

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double fa = na / (na + nb);
  const double fb = nb / (na + nb);

  // Pool from the top down until each cell expects >= 5 in both samples.
  std::vector<std::pair<double, double>> cells;
  double pa = 0.0, pb = 0.0;
  for (long k = top; k >= 0; --k) {
    pa += ca[k];
    pb += cb[k];
    const double total = pa + pb;
    if (total * std::min(fa, fb) >= 5.0) {
      cells.emplace_back(pa, pb);
      pa = pb = 0.0;
    }
  }
  if (pa + pb > 0.0) {
    if (cells.empty()) {
      cells.emplace_back(pa, pb);
    } else {
      cells.back().first += pa;
      cells.back().second += pb;
    }
  }

  TwoSampleResult out;
  out.dof = static_cast<int>(cells.size()) - 1;
  if (out.dof < 1) return out;
  for (const auto& [oa, ob] : cells) {
    const double total = oa + ob;
    const double ea = total * fa;
    const double eb = total * fb;
    out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

double kolmogorov_q(double t) {
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * t * t);
    sum += term;
    if (std::fabs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TwoSampleResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TwoSampleResult out;
  out.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  out.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return out;
}

}  // namespace mrelay::numerics
