#include "regemu/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace regemu::num {
namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1, 1]; the embedded 7-point
// Gauss rule uses the odd-indexed nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment evaluate(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(center - half * kXgk[i]);
    fv[14 - i] = f(center + half * kXgk[i]);
  }
  fv[7] = f(center);

  double kronrod = kWgk[7] * fv[7];
  double gauss = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) {
      gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
  }
  kronrod *= half;
  gauss *= half;

  const double diff = std::abs(kronrod - gauss);
  // Standard QUADPACK-style error sharpening.
  double err = diff;
  if (diff > 0.0) {
    err = diff * std::min(1.0, std::pow(200.0 * diff / std::max(std::abs(kronrod), 1e-300), 1.5));
    err = std::max(err, 50.0 * 2.22e-16 * std::abs(kronrod));
  }
  return Segment{a, b, kronrod, err};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol,
                           int max_subdivisions) {
  QuadratureResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }

  std::priority_queue<Segment> segments;
  segments.push(evaluate(f, a, b));
  double total = segments.top().value;
  double total_err = segments.top().error;
  int splits = 0;

  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         splits < max_subdivisions) {
    Segment worst = segments.top();
    segments.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = evaluate(f, worst.a, mid);
    Segment right = evaluate(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    segments.push(left);
    segments.push(right);
    ++splits;
  }

  res.value = total;
  res.error_estimate = total_err;
  res.subdivisions = splits;
  res.converged =
      total_err <= std::max(abs_tol, rel_tol * std::abs(total));
  return res;
}

}  // namespace regemu::num
