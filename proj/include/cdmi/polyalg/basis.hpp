#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cdmi/errors.hpp"

namespace cdmi::polyalg {

inline constexpr int kVars = 6;
inline constexpr int kMaxOrder = 10;

using MultiIndex = std::array<std::uint8_t, kVars>;

inline int total_degree(const MultiIndex& e) {
  int d = 0;
  for (auto v : e) d += v;
  return d;
}

// Number of monomials in kVars variables with total degree <= order.
inline constexpr std::size_t monomial_count(int order) {
  // C(order + 6, 6)
  if (order < 0) return 0;
  std::size_t num = 1;
  std::size_t den = 1;
  for (int i = 1; i <= kVars; ++i) {
    num *= static_cast<std::size_t>(order + i);
    den *= static_cast<std::size_t>(i);
  }
  return num / den;
}

/// Index tables shared by every polynomial of a given truncation order.
///
/// Monomials are stored in graded-lexicographic order: by total degree first,
/// then lexicographically descending in (e1, ..., e6) so that x1 precedes x2.
/// Because of the grading, all monomials of degree <= d form a prefix of
/// length monomial_count(d); products exploit that to avoid degree checks.
class PolyBasis {
 public:
  explicit PolyBasis(int order) : order_(order) {
    if (order < 0 || order > kMaxOrder) {
      throw ContractViolation("polynomial order " + std::to_string(order) +
                              " outside [0, " + std::to_string(kMaxOrder) + "]");
    }
    build_exponents();
    build_lookup();
    build_products();
    build_derivatives();
    build_monomial_recurrence();
  }

  PolyBasis(const PolyBasis&) = delete;
  PolyBasis& operator=(const PolyBasis&) = delete;

  /// Process-wide cached basis for `order`; thread-safe.
  static const PolyBasis& get(int order) {
    if (order < 0 || order > kMaxOrder) {
      throw ContractViolation("polynomial order " + std::to_string(order) +
                              " outside [0, " + std::to_string(kMaxOrder) + "]");
    }
    static std::array<std::once_flag, kMaxOrder + 1> flags;
    static std::array<std::unique_ptr<PolyBasis>, kMaxOrder + 1> cache;
    std::call_once(flags[static_cast<std::size_t>(order)],
                   [order] { cache[static_cast<std::size_t>(order)] = std::make_unique<PolyBasis>(order); });
    return *cache[static_cast<std::size_t>(order)];
  }

  int order() const { return order_; }
  std::size_t size() const { return exps_.size(); }
  const MultiIndex& exponents(std::size_t i) const { return exps_[i]; }
  int degree(std::size_t i) const { return degree_[i]; }

  // First index of the degree-d block.
  std::size_t degree_begin(int d) const { return d <= 0 ? 0 : monomial_count(d - 1); }
  std::size_t degree_end(int d) const { return monomial_count(d); }

  /// Index of a multi-index, or -1 when its degree exceeds the order.
  long index_of(const MultiIndex& e) const {
    if (total_degree(e) > order_) return -1;
    return lookup_[encode(e)];
  }

  /// For monomial i, products with monomials j < product_row_length(i) stay
  /// within the order; product_index(i, j) is the resulting monomial.
  std::size_t product_row_length(std::size_t i) const { return row_len_[i]; }
  const std::uint32_t* product_row(std::size_t i) const { return prod_.data() + row_off_[i]; }

  struct DerivTerm {
    std::uint32_t source;  // monomial containing the variable
    std::uint32_t target;  // monomial after differentiation
    double factor;         // exponent brought down
  };
  const std::vector<DerivTerm>& derivative_terms(int var) const { return deriv_[static_cast<std::size_t>(var)]; }

  /// monomial[i] = monomial[parent(i)] * x[parent_var(i)] for i > 0.
  std::uint32_t parent(std::size_t i) const { return parent_[i]; }
  int parent_var(std::size_t i) const { return parent_var_[i]; }

 private:
  std::size_t encode(const MultiIndex& e) const {
    std::size_t key = 0;
    for (auto v : e) key = key * static_cast<std::size_t>(order_ + 1) + v;
    return key;
  }

  void build_exponents() {
    for (int d = 0; d <= order_; ++d) {
      MultiIndex e{};
      enumerate(d, 0, e);
    }
    degree_.reserve(exps_.size());
    for (const auto& e : exps_) degree_.push_back(total_degree(e));
  }

  // Descending lexicographic enumeration of all exponents with the given sum.
  void enumerate(int remaining, int var, MultiIndex& e) {
    if (var == kVars - 1) {
      e[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(remaining);
      exps_.push_back(e);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      e[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(k);
      enumerate(remaining - k, var + 1, e);
    }
    e[static_cast<std::size_t>(var)] = 0;
  }

  void build_lookup() {
    std::size_t table = 1;
    for (int i = 0; i < kVars; ++i) table *= static_cast<std::size_t>(order_ + 1);
    lookup_.assign(table, -1);
    for (std::size_t i = 0; i < exps_.size(); ++i) lookup_[encode(exps_[i])] = static_cast<long>(i);
  }

  void build_products() {
    row_len_.resize(exps_.size());
    row_off_.resize(exps_.size());
    for (std::size_t i = 0; i < exps_.size(); ++i) {
      row_off_[i] = prod_.size();
      const std::size_t len = monomial_count(order_ - degree_[i]);
      row_len_[i] = len;
      for (std::size_t j = 0; j < len; ++j) {
        MultiIndex e;
        for (std::size_t v = 0; v < kVars; ++v) e[v] = static_cast<std::uint8_t>(exps_[i][v] + exps_[j][v]);
        prod_.push_back(static_cast<std::uint32_t>(lookup_[encode(e)]));
      }
    }
  }

  void build_derivatives() {
    for (int v = 0; v < kVars; ++v) {
      auto& terms = deriv_[static_cast<std::size_t>(v)];
      for (std::size_t i = 0; i < exps_.size(); ++i) {
        const auto ev = exps_[i][static_cast<std::size_t>(v)];
        if (ev == 0) continue;
        MultiIndex e = exps_[i];
        e[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(ev - 1);
        terms.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(lookup_[encode(e)]),
                         static_cast<double>(ev)});
      }
    }
  }

  void build_monomial_recurrence() {
    parent_.assign(exps_.size(), 0);
    parent_var_.assign(exps_.size(), -1);
    for (std::size_t i = 1; i < exps_.size(); ++i) {
      for (int v = 0; v < kVars; ++v) {
        if (exps_[i][static_cast<std::size_t>(v)] == 0) continue;
        MultiIndex e = exps_[i];
        e[static_cast<std::size_t>(v)]--;
        parent_[i] = static_cast<std::uint32_t>(lookup_[encode(e)]);
        parent_var_[i] = v;
        break;
      }
    }
  }

  int order_;
  std::vector<MultiIndex> exps_;
  std::vector<int> degree_;
  std::vector<long> lookup_;
  std::vector<std::size_t> row_len_;
  std::vector<std::size_t> row_off_;
  std::vector<std::uint32_t> prod_;
  std::array<std::vector<DerivTerm>, kVars> deriv_;
  std::vector<std::uint32_t> parent_;
  std::vector<int> parent_var_;
};

}  // namespace cdmi::polyalg
