#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for scalar or
// fixed-size Eigen-valued integrands on finite and semi-infinite intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "irgof/error.hpp"

namespace irgof::quad {

struct Tolerance {
  double absolute = 1e-10;
  double relative = 1e-12;
  int max_intervals = 2000;
};

template <typename Value>
struct Result {
  Value value;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and 7.
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Value>
double magnitude(const Value& v) {
  if constexpr (std::is_arithmetic_v<Value>) {
    return std::abs(v);
  } else {
    return v.cwiseAbs().maxCoeff();
  }
}

template <typename Value>
Value zero_like(const Value& v) {
  if constexpr (std::is_arithmetic_v<Value>) {
    return Value(0);
  } else {
    return Value::Zero(v.rows(), v.cols());
  }
}

template <typename Value>
struct Segment {
  double a, b;
  Value value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
auto kronrod_segment(const F& f, double a, double b) {
  using Value = std::decay_t<decltype(f(a))>;
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Value fc = f(center);
  Value kronrod = fc * kKronrod[7];
  Value gauss = fc * kGauss[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[static_cast<std::size_t>(i)];
    const Value sum = f(center - dx) + f(center + dx);
    kronrod += sum * kKronrod[static_cast<std::size_t>(i)];
    if (i % 2 == 1) gauss += sum * kGauss[static_cast<std::size_t>(i / 2)];
  }
  kronrod *= half;
  gauss *= half;
  Segment<Value> seg{a, b, kronrod, magnitude(Value(kronrod - gauss))};
  return seg;
}

}  // namespace detail

/// Integrates f over [a, b] to max(absolute, relative |I|), measured
/// entrywise for matrix-valued integrands. f must return an evaluated
/// value (double or a plain Eigen object), not an expression.
template <typename F>
auto integrate(const F& f, double a, double b, const Tolerance& tol = {}) {
  using Value = std::decay_t<decltype(f(a))>;
  using detail::Segment;
  if (a == b) {
    return Result<Value>{detail::zero_like(f(a)), 0.0, 1};
  }
  std::priority_queue<Segment<Value>> heap;
  heap.push(detail::kronrod_segment(f, a, b));
  Value total = heap.top().value;
  double error = heap.top().error;
  int evaluations = 15;
  for (;;) {
    const double target = std::max(tol.absolute, tol.relative * detail::magnitude(total));
    if (error <= target) break;
    if (static_cast<int>(heap.size()) >= tol.max_intervals) {
      std::ostringstream msg;
      msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge: error estimate "
          << error << " above target " << target << " after " << evaluations << " evaluations";
      fail(ErrorKind::Numerical, msg.str());
    }
    const Segment<Value> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment<Value> left = detail::kronrod_segment(f, worst.a, mid);
    Segment<Value> right = detail::kronrod_segment(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    evaluations += 30;
  }
  // Re-sum from the segments to shed the drift of the running updates.
  Value sum = detail::zero_like(total);
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return Result<Value>{sum, err, evaluations};
}

/// Integrates f over [a, +inf) with x = a + u / (1 - u).
template <typename F>
auto integrate_to_infinity(const F& f, double a, const Tolerance& tol = {}) {
  using Value = std::decay_t<decltype(f(a))>;
  auto mapped = [&](double u) -> Value {
    const double s = 1.0 - u;
    return f(a + u / s) * (1.0 / (s * s));
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

/// Integrates f over (-inf, b] with x = b - u / (1 - u).
template <typename F>
auto integrate_from_infinity(const F& f, double b, const Tolerance& tol = {}) {
  using Value = std::decay_t<decltype(f(b))>;
  auto mapped = [&](double u) -> Value {
    const double s = 1.0 - u;
    return f(b - u / s) * (1.0 / (s * s));
  };
  return integrate(mapped, 0.0, 1.0, tol);
}

}  // namespace irgof::quad
