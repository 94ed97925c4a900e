#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace roughhedge {

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
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

struct SampleSummary {
  double mean = 0.0;
  double stdev = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

/// Mean and unbiased standard deviation with compensated, order-fixed sums.
SampleSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& x);

double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& x);
double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Standard error of stdev(a) - stdev(b) for paired samples (common random
/// numbers), from the influence function of the sample standard deviation.
double stdev_difference_stderr(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b);

/// Standard error of the sample variance, from the fourth central moment.
double variance_stderr(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace roughhedge
