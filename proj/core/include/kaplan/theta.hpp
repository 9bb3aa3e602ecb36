#pragma once

namespace kaplan {

/// theta(s) = sum_{m in Z} exp(-pi m^2 s) by direct symmetric summation.
/// Throws NonpositiveArgument for s <= 0.
[[nodiscard]] double theta(double s);

/// sum_{|m| <= M} exp(-k m^2).
[[nodiscard]] double gaussian_sum_1d(double k, int M);

/// Upper bound on sum_{|m| >= m1} exp(-k m^2), m1 >= 1.
[[nodiscard]] double gaussian_tail_1d(double k, int m1);

struct GaussianSum {
  double truncated = 0.0;   // over the ball |x| <= radius
  double exact = 0.0;       // [theta(k/pi)]^N
  double tail_bound = 0.0;  // bound on the sum over |x| > radius
};

/// Compares the Gaussian sum over the Euclidean ball in Z^N with [theta(k/pi)]^N.
[[nodiscard]] GaussianSum lattice_gaussian_sum(int N, double k, int radius);

/// sum_{x in [-M, M]^N} exp(-k |x|^2) by direct enumeration of the box.
[[nodiscard]] double lattice_gaussian_box_sum(int N, double k, int M);

/// Bound on sum_{|x| > radius} exp(-k |x|^2): some coordinate has |x_i| > radius/sqrt(N),
/// so the sum is at most N * tail_1d * theta^(N-1).
[[nodiscard]] double lattice_gaussian_tail_bound(int N, double k, int radius);

}  // namespace kaplan
