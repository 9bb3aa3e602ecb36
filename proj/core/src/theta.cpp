#include "kaplan/theta.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kaplan/error.hpp"

namespace kaplan {

double theta(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::NonpositiveArgument, "theta needs s > 0");
  double sum = 1.0;
  for (long long m = 1;; ++m) {
    const double term = 2.0 * std::exp(-std::numbers::pi * static_cast<double>(m * m) * s);
    if (term < 1e-16 * sum) break;
    sum += term;
  }
  return sum;
}

double gaussian_sum_1d(double k, int M) {
  double sum = 1.0;
  for (int m = 1; m <= M; ++m) sum += 2.0 * std::exp(-k * m * m);
  return sum;
}

double gaussian_tail_1d(double k, int m1) {
  if (m1 < 1) m1 = 1;
  const double m = m1;
  return 2.0 * (std::exp(-k * m * m) + 0.5 * std::sqrt(std::numbers::pi / k) * std::erfc(std::sqrt(k) * m));
}

double lattice_gaussian_box_sum(int N, double k, int M) {
  if (N < 1 || M < 0) throw Error(ErrorCode::BadParameter, "box sum needs N >= 1, M >= 0");
  std::vector<int> x(static_cast<std::size_t>(N), -M);
  double sum = 0.0;
  while (true) {
    long long r2 = 0;
    for (int v : x) r2 += static_cast<long long>(v) * v;
    sum += std::exp(-k * static_cast<double>(r2));
    int d = N - 1;
    while (d >= 0 && x[static_cast<std::size_t>(d)] == M) {
      x[static_cast<std::size_t>(d)] = -M;
      --d;
    }
    if (d < 0) break;
    ++x[static_cast<std::size_t>(d)];
  }
  return sum;
}

double lattice_gaussian_tail_bound(int N, double k, int radius) {
  const int m1 = static_cast<int>(std::floor(radius / std::sqrt(static_cast<double>(N)))) + 1;
  double best = N * gaussian_tail_1d(k, m1) * std::pow(theta(k / std::numbers::pi), N - 1);
  // |x|^2 >= r^2 + 1 outside the ball, so the tail is at most e^{-eps k (r^2+1)} theta((1-eps)k/pi)^N.
  const double r2 = static_cast<double>(radius) * radius + 1.0;
  for (int i = 1; i < 100; ++i) {
    const double eps = i / 100.0;
    best = std::min(best, std::exp(-eps * k * r2) * std::pow(theta((1.0 - eps) * k / std::numbers::pi), N));
  }
  return best;
}

GaussianSum lattice_gaussian_sum(int N, double k, int radius) {
  if (!(k > 0.0)) throw Error(ErrorCode::NonpositiveK, "Gaussian sum needs k > 0");
  if (N < 1 || radius < 0) throw Error(ErrorCode::BadParameter, "Gaussian sum needs N >= 1, radius >= 0");
  GaussianSum out;
  const long long r2max = static_cast<long long>(radius) * radius;
  std::vector<int> x(static_cast<std::size_t>(N), -radius);
  while (true) {
    long long r2 = 0;
    for (int v : x) r2 += static_cast<long long>(v) * v;
    if (r2 <= r2max) out.truncated += std::exp(-k * static_cast<double>(r2));
    int d = N - 1;
    while (d >= 0 && x[static_cast<std::size_t>(d)] == radius) {
      x[static_cast<std::size_t>(d)] = -radius;
      --d;
    }
    if (d < 0) break;
    ++x[static_cast<std::size_t>(d)];
  }
  out.exact = std::pow(theta(k / std::numbers::pi), N);
  out.tail_bound = lattice_gaussian_tail_bound(N, k, radius);
  return out;
}

}  // namespace kaplan
