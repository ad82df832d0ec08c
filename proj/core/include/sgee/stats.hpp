#pragma once

#include <cmath>
#include <cstddef>

namespace sgee {

/// Kahan-compensated accumulator; with a fixed summation order the totals
/// are independent of the worker count.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  void merge(const KahanSum& other) {
    add(other.s_);
    add(-other.c_);
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Streaming mean / standard error over scalar samples.
class MeanAccumulator {
 public:
  void add(double x) {
    sum_.add(x);
    sumsq_.add(x * x);
    ++count_;
  }
  void merge(const MeanAccumulator& other) {
    sum_.merge(other.sum_);
    sumsq_.merge(other.sumsq_);
    count_ += other.count_;
  }
  std::size_t count() const { return count_; }
  double mean() const { return count_ ? sum_.value() / static_cast<double>(count_) : 0.0; }
  double variance() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double m = mean();
    const double v = (sumsq_.value() - n * m * m) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
  }
  double stderr_of_mean() const {
    return count_ ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  KahanSum sum_;
  KahanSum sumsq_;
  std::size_t count_ = 0;
};

}  // namespace sgee
