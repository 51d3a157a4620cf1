#pragma once

#include <cmath>

namespace gcflow {

/// Neumaier compensated accumulator. Used for every diagnostic reduction so
/// sums are accurate to a few ulps and, being applied in fixed index order,
/// bitwise independent of the thread count.
class NeumaierSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace gcflow
