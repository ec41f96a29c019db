#pragma once

#include "seaplan/geometry.hpp"

#include <random>

namespace seaplan::testing {

/// Fixed-seed generator so every property run sees the same instances.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Vec2 point(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }
  std::mt19937_64& engine() { return gen_; }

private:
  std::mt19937_64 gen_;
};

/// Composite Gauss-Legendre (5 nodes per panel) of f over [a, b].
template <class F>
double integrate(F f, double a, double b, int panels = 64) {
  static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                  0.4786286704993665, 0.2369268850561891};
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double m = a + (i + 0.5) * h;
    for (int j = 0; j < 5; ++j) s += w[j] * f(m + 0.5 * h * x[j]);
  }
  return 0.5 * h * s;
}

}  // namespace seaplan::testing
