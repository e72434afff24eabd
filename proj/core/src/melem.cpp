#include "critgyro/melem.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>

#include "critgyro/error.hpp"

namespace critgyro {

namespace {

template <class Real>
Real laguerre_t(int n, int alpha, Real x) {
  if (n == 0) return Real(1);
  Real prev = Real(1);
  Real cur = Real(1 + alpha) - x;
  for (int k = 1; k < n; ++k) {
    const Real next = ((Real(2 * k + 1 + alpha) - x) * cur - Real(k + alpha) * prev) / Real(k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// n! / (n + |m|)! for a single mode.
double norm_ratio(Mode k) { return factorial(k.n) / factorial(k.n + std::abs(k.m)); }

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = gauss_laguerre(kDefaultQuadratureOrder);
  return rule;
}

const QuadratureRule& rule_for_degree(int degree, const QuadratureRule& preferred) {
  if (degree <= preferred.max_exact_degree()) return preferred;
  throw ParameterError("quadrature order too low for integrand degree " + std::to_string(degree));
}

}  // namespace

double laguerre(int n, int alpha, double x) {
  if (n < 0 || alpha < 0) throw ParameterError("laguerre: n and alpha must be >= 0");
  return laguerre_t<double>(n, alpha, x);
}

QuadratureRule gauss_laguerre(int order) {
  if (order < 1) throw ParameterError("gauss_laguerre: order must be >= 1");
  using Real = long double;
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

  // Jacobi matrix of the Laguerre recurrence: diagonal 2k+1, off-diagonal k.
  Mat jacobi = Mat::Zero(order, order);
  for (int k = 0; k < order; ++k) {
    jacobi(k, k) = Real(2 * k + 1);
    if (k + 1 < order) jacobi(k, k + 1) = jacobi(k + 1, k) = Real(k + 1);
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(jacobi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("gauss_laguerre: eigensolve failed", 0.0);

  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    Real x = solver.eigenvalues()(i);
    for (int it = 0; it < 8; ++it) {
      // L_Q'(x) = Q (L_Q(x) - L_{Q-1}(x)) / x
      const Real lq = laguerre_t<Real>(order, 0, x);
      const Real lq1 = laguerre_t<Real>(order - 1, 0, x);
      const Real deriv = Real(order) * (lq - lq1) / x;
      const Real step = lq / deriv;
      x -= step;
      if (std::abs(step) <= std::numeric_limits<Real>::epsilon() * x) break;
    }
    const Real lnext = laguerre_t<Real>(order + 1, 0, x);
    const Real w = x / (Real(order + 1) * Real(order + 1) * lnext * lnext);
    rule.nodes[i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(w);
  }
  return rule;
}

int i1_degree(Mode k1, Mode k2) {
  return (std::abs(k1.m) + std::abs(k2.m) + 2) / 2 + k1.n + k2.n;
}

int i2_degree(Mode k1, Mode k2, Mode l1, Mode l2) {
  const int s = std::abs(k1.m) + std::abs(k2.m) + std::abs(l1.m) + std::abs(l2.m);
  return s / 2 + k1.n + k2.n + l1.n + l2.n;
}

double I1(Mode k1, Mode k2, const QuadratureRule& preferred) {
  const int s = std::abs(k1.m) + std::abs(k2.m);
  if (s % 2 != 0) throw ParameterError("I1: |m1| + |m2| must be even");
  const auto& rule = rule_for_degree(i1_degree(k1, k2), preferred);
  const int power = (s + 2) / 2;
  const int a1 = std::abs(k1.m);
  const int a2 = std::abs(k2.m);
  return rule.integrate([&](double x) {
    return std::pow(x, power) * laguerre(k1.n, a1, x) * laguerre(k2.n, a2, x);
  });
}

double I1(Mode k1, Mode k2) { return I1(k1, k2, default_rule()); }

double I2(Mode k1, Mode k2, Mode l1, Mode l2, const QuadratureRule& preferred) {
  const std::array<Mode, 4> t{k1, k2, l1, l2};
  int s = 0;
  for (const auto& k : t) s += std::abs(k.m);
  if (s % 2 != 0) throw ParameterError("I2: sum of |m| must be even");
  const auto& rule = rule_for_degree(i2_degree(k1, k2, l1, l2), preferred);
  const int power = s / 2;
  return rule.integrate([&](double x) {
    double f = std::pow(x, power);
    for (const auto& k : t) f *= laguerre(k.n, std::abs(k.m), 0.5 * x);
    return f;
  });
}

double I2(Mode k1, Mode k2, Mode l1, Mode l2) { return I2(k1, k2, l1, l2, default_rule()); }

namespace {

double v_raw_value(Mode k1, Mode k2, const QuadratureRule& rule) {
  if (k2.m != k1.m + 2 && k2.m != k1.m - 2) return 0.0;
  if (k2 < k1) std::swap(k1, k2);
  return std::sqrt(norm_ratio(k1) * norm_ratio(k2)) * I1(k1, k2, rule);
}

double u_raw_value(Mode k1, Mode k2, Mode l1, Mode l2, const QuadratureRule& rule) {
  if (k1.m + k2.m != l1.m + l2.m) return 0.0;
  const int s = std::abs(k1.m) + std::abs(k2.m) + std::abs(l1.m) + std::abs(l2.m);
  const double prod = norm_ratio(k1) * norm_ratio(k2) * norm_ratio(l1) * norm_ratio(l2);
  return std::numbers::inv_pi * std::pow(2.0, -0.5 * s) * std::sqrt(prod) *
         I2(k1, k2, l1, l2, rule);
}

}  // namespace

double V_element(Mode k1, Mode k2, double anisotropy) {
  if (anisotropy == 0.0) return 0.0;
  return anisotropy * v_raw_value(k1, k2, default_rule());
}

double U_element(Mode k1, Mode k2, Mode l1, Mode l2, double g) {
  if (g == 0.0) return 0.0;
  return g * u_raw_value(k1, k2, l1, l2, default_rule());
}

ElementCache::ElementCache(std::span<const Mode> modes, int quadrature_order)
    : modes_(modes.begin(), modes.end()) {
  const std::size_t nm = modes_.size();
  if (nm > std::numeric_limits<std::uint16_t>::max()) throw ParameterError("ElementCache: too many modes");

  int max_degree = 1;
  int max_abs_m = 0;
  int max_n = 0;
  for (const auto& k : modes_) {
    max_abs_m = std::max(max_abs_m, std::abs(k.m));
    max_n = std::max(max_n, k.n);
  }
  max_degree = std::max(max_degree, (2 * max_abs_m + 2) / 2 + 2 * max_n);
  max_degree = std::max(max_degree, 2 * max_abs_m + 4 * max_n);
  int order = quadrature_order > 0 ? quadrature_order : kDefaultQuadratureOrder;
  order = std::max(order, (max_degree + 2) / 2);
  rule_ = gauss_laguerre(order);

  v_raw_.assign(nm * nm, 0.0);
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = 0; b < nm; ++b) v_raw_[a * nm + b] = v_raw_value(modes_[a], modes_[b], rule_);
  }

  int min_m = 0;
  int max_m = 0;
  for (const auto& k : modes_) {
    min_m = std::min(min_m, k.m);
    max_m = std::max(max_m, k.m);
  }
  min_pair_m_ = 2 * min_m;
  pairs_by_m_.assign(static_cast<std::size_t>(2 * max_m - 2 * min_m + 1), {});
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = 0; b < nm; ++b) {
      pairs_by_m_[static_cast<std::size_t>(modes_[a].m + modes_[b].m - min_pair_m_)].emplace_back(
          static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b));
    }
  }

  for (std::size_t k1 = 0; k1 < nm; ++k1) {
    for (std::size_t k2 = k1; k2 < nm; ++k2) {
      const int total = modes_[k1].m + modes_[k2].m;
      for (const auto& [l1, l2] : pairs_with_total_m(total)) {
        if (l2 < l1) continue;
        const Key key{static_cast<std::uint16_t>(k1), static_cast<std::uint16_t>(k2), l1, l2};
        if (canonical(key) != key) continue;
        const double value = u_raw_value(modes_[k1], modes_[k2], modes_[l1], modes_[l2], rule_);
        u_entries_.push_back({key, value});
        u_index_.emplace(pack(key), value);
      }
    }
  }
}

std::span<const std::pair<std::uint16_t, std::uint16_t>> ElementCache::pairs_with_total_m(
    int total_m) const {
  const int slot = total_m - min_pair_m_;
  if (slot < 0 || slot >= static_cast<int>(pairs_by_m_.size())) return {};
  return pairs_by_m_[static_cast<std::size_t>(slot)];
}

ElementCache::Key ElementCache::canonical(Key key) noexcept {
  auto sorted_pair = [](std::uint16_t a, std::uint16_t b) {
    return a <= b ? std::array<std::uint16_t, 2>{a, b} : std::array<std::uint16_t, 2>{b, a};
  };
  const auto k = sorted_pair(key[0], key[1]);
  const auto l = sorted_pair(key[2], key[3]);
  if (l < k) return {l[0], l[1], k[0], k[1]};
  return {k[0], k[1], l[0], l[1]};
}

std::uint64_t ElementCache::pack(Key key) noexcept {
  return (std::uint64_t{key[0]} << 48) | (std::uint64_t{key[1]} << 32) |
         (std::uint64_t{key[2]} << 16) | std::uint64_t{key[3]};
}

double ElementCache::u_raw(std::size_t k1, std::size_t k2, std::size_t l1, std::size_t l2) const {
  const Key key = canonical({static_cast<std::uint16_t>(k1), static_cast<std::uint16_t>(k2),
                             static_cast<std::uint16_t>(l1), static_cast<std::uint16_t>(l2)});
  auto it = u_index_.find(pack(key));
  return it == u_index_.end() ? 0.0 : it->second;
}

bool ElementCache::matches(std::span<const Mode> modes) const {
  return std::equal(modes.begin(), modes.end(), modes_.begin(), modes_.end());
}

void write_elements_csv(std::ostream& out, const ElementCache& cache) {
  const auto prec = out.precision(17);
  out << "kind,k1,k2,l1,l2,value\n";
  const std::size_t nm = cache.mode_count();
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = 0; b < nm; ++b) {
      const double v = cache.v_raw(a, b);
      if (v != 0.0) out << "V," << a << ',' << b << ",,," << v << '\n';
    }
  }
  for (const auto& e : cache.u_entries()) {
    out << "U," << e.key[0] << ',' << e.key[1] << ',' << e.key[2] << ',' << e.key[3] << ','
        << e.value << '\n';
  }
  out.precision(prec);
}

}  // namespace critgyro
