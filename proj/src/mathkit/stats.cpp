#include "roughhedge/mathkit/stats.hpp"

#include "roughhedge/mathkit/errors.hpp"

namespace roughhedge {

double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) throw DomainError("sample_mean: empty sample");
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s.add(x(i));
  return s.value() / static_cast<double>(x.size());
}

double sample_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 2) throw DomainError("sample_variance: need at least two samples");
  const double m = sample_mean(x);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s.add((x(i) - m) * (x(i) - m));
  return s.value() / static_cast<double>(x.size() - 1);
}

SampleSummary summarize(const Eigen::Ref<const Eigen::VectorXd>& x) {
  SampleSummary out;
  out.n = static_cast<std::size_t>(x.size());
  out.mean = sample_mean(x);
  out.stdev = x.size() > 1 ? std::sqrt(sample_variance(x)) : 0.0;
  out.stderr_ = out.stdev / std::sqrt(static_cast<double>(x.size()));
  return out;
}

double stdev_difference_stderr(const Eigen::Ref<const Eigen::VectorXd>& a,
                               const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw DomainError("stdev_difference_stderr: sample sizes differ");
  const double ma = sample_mean(a), mb = sample_mean(b);
  const double va = sample_variance(a), vb = sample_variance(b);
  const double sa = std::sqrt(va), sb = std::sqrt(vb);
  Eigen::VectorXd u(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ia = sa > 0.0 ? ((a(i) - ma) * (a(i) - ma) - va) / (2.0 * sa) : 0.0;
    const double ib = sb > 0.0 ? ((b(i) - mb) * (b(i) - mb) - vb) / (2.0 * sb) : 0.0;
    u(i) = ia - ib;
  }
  return std::sqrt(sample_variance(u) / static_cast<double>(a.size()));
}

double variance_stderr(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = sample_mean(x);
  const double v = sample_variance(x);
  CompensatedSum s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x(i) - m) * (x(i) - m) - v;
    s.add(d * d);
  }
  const double n = static_cast<double>(x.size());
  return std::sqrt(s.value() / (n - 1.0) / n);
}

}  // namespace roughhedge
