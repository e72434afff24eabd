#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "critgyro/fock.hpp"

namespace critgyro {

/// Generalized Laguerre polynomial L_n^alpha(x) by the three-term recurrence.
double laguerre(int n, int alpha, double x);

/// Gauss-Laguerre rule for the weight e^{-x} on [0, inf).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  /// Exact for polynomials of degree <= 2*order - 1.
  int max_exact_degree() const noexcept { return 2 * order - 1; }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Golub-Welsch nodes refined by Newton iteration in extended precision;
/// weights from x_i / ((Q+1) L_{Q+1}(x_i))^2.
QuadratureRule gauss_laguerre(int order);

constexpr int kDefaultQuadratureOrder = 40;

/// Total polynomial degree of the I1 integrand, including the e^{-x}-free part.
int i1_degree(Mode k1, Mode k2);
int i2_degree(Mode k1, Mode k2, Mode l1, Mode l2);

/// int_0^inf e^{-x} x^{(|m1|+|m2|+2)/2} L_{n1}^{|m1|}(x) L_{n2}^{|m2|}(x) dx.
/// Throws ParameterError when |m1|+|m2| is odd.
double I1(Mode k1, Mode k2, const QuadratureRule& rule);
double I1(Mode k1, Mode k2);

/// int_0^inf e^{-x} x^{sum|m_t|/2} prod_t L_{n_t}^{|m_t|}(x/2) dx.
/// Throws ParameterError when sum|m_t| is odd.
double I2(Mode k1, Mode k2, Mode l1, Mode l2, const QuadratureRule& rule);
double I2(Mode k1, Mode k2, Mode l1, Mode l2);

/// Anisotropy coupling. Zero unless m2 = m1 +- 2.
double V_element(Mode k1, Mode k2, double anisotropy);

/// Contact-interaction coefficient. Zero unless m_k1 + m_k2 = m_l1 + m_l2.
double U_element(Mode k1, Mode k2, Mode l1, Mode l2, double g);

/// g- and A-free matrix elements over a fixed mode list.
///
/// U values are stored once per symmetry class under the lexicographically
/// smallest of the eight images generated by k1<->k2, l1<->l2 and
/// (k1,k2)<->(l1,l2).
class ElementCache {
 public:
  using Key = std::array<std::uint16_t, 4>;

  struct UEntry {
    Key key;
    double value;
  };

  explicit ElementCache(std::span<const Mode> modes, int quadrature_order = 0);

  std::span<const Mode> modes() const noexcept { return modes_; }
  std::size_t mode_count() const noexcept { return modes_.size(); }
  int quadrature_order() const noexcept { return rule_.order; }

  /// V_element / A, indexed by positions in modes().
  double v_raw(std::size_t k1, std::size_t k2) const { return v_raw_[k1 * modes_.size() + k2]; }
  /// U_element / g.
  double u_raw(std::size_t k1, std::size_t k2, std::size_t l1, std::size_t l2) const;

  std::span<const UEntry> u_entries() const noexcept { return u_entries_; }

  /// Mode pairs (k1, k2) grouped by m_k1 + m_k2, for creation-pair loops.
  std::span<const std::pair<std::uint16_t, std::uint16_t>> pairs_with_total_m(int total_m) const;

  static Key canonical(Key key) noexcept;

  bool matches(std::span<const Mode> modes) const;

 private:
  static std::uint64_t pack(Key key) noexcept;

  std::vector<Mode> modes_;
  QuadratureRule rule_;
  std::vector<double> v_raw_;
  std::vector<UEntry> u_entries_;
  std::unordered_map<std::uint64_t, double> u_index_;
  int min_pair_m_ = 0;
  std::vector<std::vector<std::pair<std::uint16_t, std::uint16_t>>> pairs_by_m_;
};

/// CSV dump: kind,k1,k2,l1,l2,value with mode positions; kind is V or U.
void write_elements_csv(std::ostream& out, const ElementCache& cache);

}  // namespace critgyro
