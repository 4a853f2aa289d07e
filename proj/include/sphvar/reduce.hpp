#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

namespace sphvar {

/// Neumaier-compensated running sum. Order of additions is the caller's
/// responsibility; the result is bit-stable for a fixed order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Upper bound on worker threads used by parallel_for (0 = hardware default).
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Runs body(i) for i in [0, count) across fixed, contiguous chunks. Bodies
/// must write only to slot i of their outputs; reductions happen afterwards in
/// index order, so results never depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace sphvar
