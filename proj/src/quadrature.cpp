#include <algorithm>
#include <array>
#include <queue>
#include <vector>
#include <cmath>
#include <string>

#include "mrelay/numerics.hpp"

namespace mrelay::numerics {

namespace {

// Kronrod 15-point abscissae (positive half) and weights; odd indices are the
// Gauss 7-point nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  double value;
  double error;
};

Estimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

struct Piece {
  double a;
  double b;
  Estimate est;
};

// Worst error first; ties go to the leftmost piece so the order is fixed.
struct WorseFirst {
  bool operator()(const Piece& x, const Piece& y) const {
    if (x.est.error != y.est.error) return x.est.error < y.est.error;
    return x.a > y.a;
  }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 QuadratureOptions opts) {
  if (!(a < b)) throw std::invalid_argument("integrate: requires a < b");
  if (!(tol > 0.0)) throw std::invalid_argument("integrate: requires tol > 0");

  std::priority_queue<Piece, std::vector<Piece>, WorseFirst> pieces;
  pieces.push({a, b, gk15(f, a, b)});
  double value = pieces.top().est.value;
  double error = pieces.top().est.error;
  int splits = 0;
  while (error > tol) {
    const Piece worst = pieces.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (splits >= opts.max_subdivisions || mid <= worst.a || mid >= worst.b) break;
    pieces.pop();
    const Piece left{worst.a, mid, gk15(f, worst.a, mid)};
    const Piece right{mid, worst.b, gk15(f, mid, worst.b)};
    value += left.est.value + right.est.value - worst.est.value;
    error += left.est.error + right.est.error - worst.est.error;
    pieces.push(left);
    pieces.push(right);
    ++splits;
  }

  // Re-sum in interval order to shed the running-update rounding.
  std::vector<Piece> all;
  all.reserve(pieces.size());
  while (!pieces.empty()) {
    all.push_back(pieces.top());
    pieces.pop();
  }
  std::sort(all.begin(), all.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  value = 0.0;
  error = 0.0;
  for (const Piece& p : all) {
    value += p.est.value;
    error += p.est.error;
  }
  if (!(error <= tol) || !std::isfinite(value))
    throw QuadratureError("integrate: no convergence after " + std::to_string(splits) +
                              " subdivisions (error estimate " + std::to_string(error) + ")",
                          value);
  return value;
}

}  // namespace mrelay::numerics
