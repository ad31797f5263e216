#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace eqlift::numerics {

template <typename Scalar>
inline constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::fmod(a + pi, two_pi<Scalar>);
  if (a <= Scalar(0)) a += two_pi<Scalar>;
  return a - pi;
}

/// Distance between two unit complex numbers measured on the circle.
template <typename Scalar>
Scalar phase_distance(const std::complex<Scalar>& a, const std::complex<Scalar>& b) {
  return std::abs(a - b);
}

/// Composite Simpson rule on [a, b] with n (even, rounded up) panels.
template <typename Scalar, typename F>
auto simpson(F&& f, Scalar a, Scalar b, int n) {
  if (n % 2) ++n;
  const Scalar h = (b - a) / Scalar(n);
  auto sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + h * Scalar(i)) * Scalar(i % 2 ? 4 : 2);
  return sum * (h / Scalar(3));
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Golub-Welsch.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
gauss_legendre(int n) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Mat jacobi = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const Scalar b = Scalar(i) / std::sqrt(Scalar(4) * Scalar(i) * Scalar(i) - Scalar(1));
    jacobi(i, i - 1) = b;
    jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi);
  Vec nodes = es.eigenvalues();
  Vec weights = Scalar(2) * es.eigenvectors().row(0).transpose().array().square();
  return {nodes, weights};
}

/// Gauss-Legendre quadrature of f over [a, b].
template <typename Scalar, typename F>
auto gauss_integrate(F&& f, Scalar a, Scalar b, int n) {
  const auto [x, w] = gauss_legendre<Scalar>(n);
  const Scalar half = (b - a) / Scalar(2), mid = (a + b) / Scalar(2);
  auto sum = f(mid + half * x(0)) * w(0);
  for (int i = 1; i < n; ++i) sum += f(mid + half * x(i)) * w(i);
  return sum * half;
}

/// One classical fourth-order Runge-Kutta step for y' = f(t, y).
template <typename Scalar, typename State, typename F>
State rk4_step(F&& f, Scalar t, const State& y, Scalar h) {
  const State k1 = f(t, y);
  const State k2 = f(t + h / 2, State(y + (h / 2) * k1));
  const State k3 = f(t + h / 2, State(y + (h / 2) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Central difference derivative of a scalar function along a direction.
template <typename Scalar, typename F, typename Point>
Scalar central_difference(F&& f, const Point& p, const Point& dir, Scalar h) {
  return (f(Point(p + h * dir)) - f(Point(p - h * dir))) / (Scalar(2) * h);
}

}  // namespace eqlift::numerics
