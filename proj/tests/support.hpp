#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace goodwin::testing {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min());
}

/// Log-uniform draws on [lo, hi].
class LogUniform {
 public:
  explicit LogUniform(std::uint64_t seed) : rng_(seed) {}
  double operator()(double lo, double hi) {
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    return std::exp(d(rng_));
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace goodwin::testing
