#pragma once

#include <cmath>
#include <span>

namespace damperopt {

/// Compensated accumulator built on the branch-free TwoSum error-free
/// transformation. The running error term is folded back in on read.
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(double init) : sum_(init) {}

  constexpr CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    const double bp = t - sum_;
    err_ += (sum_ - (t - bp)) + (x - bp);
    sum_ = t;
    return *this;
  }

  constexpr CompensatedSum& operator+=(const CompensatedSum& other) {
    *this += other.sum_;
    err_ += other.err_;
    return *this;
  }

  constexpr double value() const { return sum_ + err_; }
  constexpr explicit operator double() const { return value(); }

 private:
  double sum_ = 0.0;
  double err_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc += x;
  return acc.value();
}

/// Σ x_i·y_i with each product added through the compensated accumulator.
inline double compensated_dot(std::span<const double> x, std::span<const double> y) {
  CompensatedSum acc;
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc.value();
}

}  // namespace damperopt
