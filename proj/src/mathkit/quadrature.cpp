#include "roughhedge/mathkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <vector>

#include <Eigen/Eigenvalues>

#include "roughhedge/mathkit/errors.hpp"

namespace roughhedge {

void QuadSpec::validate() const {
  if (order < 2) throw ValidationError("QuadSpec: order must be at least 2");
  if (!(abs_tol >= 0.0) || !(rel_tol >= 0.0)) throw ValidationError("QuadSpec: tolerances must be non-negative");
  if (scheme == QuadScheme::adaptive && abs_tol == 0.0 && rel_tol == 0.0)
    throw ValidationError("QuadSpec: adaptive scheme needs a non-zero tolerance");
  if (max_nodes < 15) throw ValidationError("QuadSpec: max_nodes too small");
}

namespace {

// Golub-Welsch start, then Newton on the orthonormal recurrence so the nodes
// are accurate to rounding and the weights follow from the Christoffel sum.
GaussRule build_hermite(int n) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
  GaussRule rule{es.eigenvalues(), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes(i);
    double pm1 = 0.0;
    for (int it = 0; it < 6; ++it) {
      double p0 = 1.0;
      pm1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p1 = (x * p0 - std::sqrt(static_cast<double>(k)) * pm1) / std::sqrt(k + 1.0);
        pm1 = p0;
        p0 = p1;
      }
      const double step = p0 / (std::sqrt(static_cast<double>(n)) * pm1);
      x -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    double p0 = 1.0;
    pm1 = 0.0;
    for (int k = 0; k < n - 1; ++k) {
      const double p1 = (x * p0 - std::sqrt(static_cast<double>(k)) * pm1) / std::sqrt(k + 1.0);
      pm1 = p0;
      p0 = p1;
    }
    rule.nodes(i) = x;
    rule.weights(i) = 1.0 / (n * p0 * p0);
  }
  rule.weights /= rule.weights.sum();
  return rule;
}

GaussRule build_legendre(int n) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
  GaussRule rule{es.eigenvalues(), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes(i);
    double dp = 1.0;
    for (int it = 0; it < 6; ++it) {
      double p0 = 1.0, pm1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p1 = ((2.0 * k + 1.0) * x * p0 - k * pm1) / (k + 1.0);
        pm1 = p0;
        p0 = p1;
      }
      dp = n * (x * p0 - pm1) / (x * x - 1.0);
      const double step = p0 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes(i) = x;
    rule.weights(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

template <typename Builder>
const GaussRule& cached_rule(std::map<int, std::unique_ptr<GaussRule>>& cache, std::mutex& mu, int order,
                             Builder build) {
  if (order < 2) throw ValidationError("Gauss rule order must be at least 2");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussRule>(build(order));
  return *slot;
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Integrand on the reference interval [0, 1] after all maps.
struct MappedIntegrand {
  const Integrand1d& f;
  Interval dom;
  EndpointMap map;

  double operator()(double u) const {
    if (dom.half_line()) {
      // Optional square-root map first, then u/(1-u) to reach infinity.
      if (u >= 1.0) return 0.0;
      const double r = u / (1.0 - u);
      const double dr = 1.0 / ((1.0 - u) * (1.0 - u));
      if (map == EndpointMap::sqrt_left) return f(dom.lo + r * r) * 2.0 * r * dr;
      return f(dom.lo + r) * dr;
    }
    const double len = dom.hi - dom.lo;
    switch (map) {
      case EndpointMap::sqrt_right:
        return f(dom.hi - len * u * u) * 2.0 * len * u;
      case EndpointMap::sqrt_left:
        return f(dom.lo + len * u * u) * 2.0 * len * u;
      case EndpointMap::none:
        break;
    }
    return f(dom.lo + len * u) * len;
  }
};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const MappedIntegrand& g, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = g(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = g(c - dx);
    const double f2 = g(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::abs(kron - gauss)};
}

QuadResult adaptive_gk(const MappedIntegrand& g, const QuadSpec& spec) {
  std::priority_queue<Segment> heap;
  // A few initial panels so narrow features near the ends are seen.
  constexpr int kInitial = 4;
  double value = 0.0, error = 0.0;
  for (int i = 0; i < kInitial; ++i) {
    Segment s = gk15(g, static_cast<double>(i) / kInitial, static_cast<double>(i + 1) / kInitial);
    value += s.value;
    error += s.error;
    heap.push(s);
  }
  long evals = 15L * kInitial;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    if (evals + 30 > spec.max_nodes) {
      throw NumericalError("integrate_1d: node budget exhausted", value, error);
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(g, worst.a, mid);
    Segment right = gk15(g, mid, worst.b);
    evals += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Recompute from scratch now and then to stop drift in the running sums.
    if (evals % 3000 < 30) {
      std::vector<Segment> all;
      all.reserve(heap.size());
      value = error = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
      }
      for (const auto& s : all) {
        value += s.value;
        error += s.error;
        heap.push(s);
      }
    }
  }
  return {value, error, evals};
}

}  // namespace

const GaussRule& gauss_hermite_rule(int order) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached_rule(cache, mu, order, build_hermite);
}

const GaussRule& gauss_legendre_rule(int order) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached_rule(cache, mu, order, build_legendre);
}

QuadResult integrate_1d_detailed(const Integrand1d& f, Interval dom, const QuadSpec& spec) {
  spec.validate();
  if (spec.scheme == QuadScheme::gauss_hermite) {
    const GaussRule& r = gauss_hermite_rule(spec.order);
    double s = 0.0;
    for (int i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * f(r.nodes(i));
    return {s, 0.0, r.nodes.size()};
  }
  if (!(dom.hi > dom.lo)) {
    if (dom.hi == dom.lo) return {};
    throw DomainError("integrate_1d: empty or reversed interval");
  }
  MappedIntegrand g{f, dom, spec.endpoint_map};
  if (spec.scheme == QuadScheme::gauss_legendre) {
    const GaussRule& r = gauss_legendre_rule(spec.order);
    double s = 0.0;
    for (int i = 0; i < r.nodes.size(); ++i) s += r.weights(i) * g(0.5 * (r.nodes(i) + 1.0));
    return {0.5 * s, 0.0, r.nodes.size()};
  }
  return adaptive_gk(g, spec);
}

QuadResult integrate_gauss_2d_detailed(const Integrand2d& f, BivariateGaussian corr, const QuadSpec& spec) {
  spec.validate();
  const double c = corr.correlation;
  if (!(c >= -1.0 && c <= 1.0)) throw DomainError("integrate_gauss_2d: correlation outside [-1, 1]");
  const double sc = std::sqrt(std::max(0.0, 1.0 - c * c));
  auto tensor = [&](int n) {
    const GaussRule& r = gauss_hermite_rule(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += r.weights(j) * f(r.nodes(i), c * r.nodes(i) + sc * r.nodes(j));
      s += r.weights(i) * row;
    }
    return s;
  };
  if (spec.scheme != QuadScheme::adaptive) {
    const long n = spec.order;
    return {tensor(spec.order), 0.0, n * n};
  }
  int n = std::max(spec.order, 8);
  double prev = tensor(n);
  long evals = static_cast<long>(n) * n;
  while (true) {
    const int next = 2 * n;
    if (evals + static_cast<long>(next) * next > spec.max_nodes) {
      throw NumericalError("integrate_gauss_2d: node budget exhausted", prev, std::abs(prev));
    }
    const double cur = tensor(next);
    evals += static_cast<long>(next) * next;
    const double err = std::abs(cur - prev);
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(cur))) return {cur, err, evals};
    prev = cur;
    n = next;
  }
}

}  // namespace roughhedge
