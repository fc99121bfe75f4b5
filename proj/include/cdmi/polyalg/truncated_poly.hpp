#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdmi/errors.hpp"
#include "cdmi/polyalg/basis.hpp"

namespace cdmi::polyalg {

/// Multivariate Taylor polynomial in six deviation variables, truncated at a
/// fixed total degree. Coefficients are dense and graded-lex ordered (see
/// PolyBasis). Every binary operation requires both operands to share the
/// same order; mixed orders throw ContractViolation.
class TruncatedPoly {
 public:
  explicit TruncatedPoly(int order = 1) : basis_(&PolyBasis::get(order)), c_(basis_->size(), 0.0) {}

  static TruncatedPoly constant(int order, double value) {
    TruncatedPoly p(order);
    p.c_[0] = value;
    return p;
  }

  /// value + x_var (the identity polynomial in one deviation variable).
  static TruncatedPoly variable(int order, int var, double value = 0.0) {
    if (var < 0 || var >= kVars) throw ContractViolation("variable index out of range");
    TruncatedPoly p(order);
    p.c_[0] = value;
    if (order >= 1) p.c_[1 + static_cast<std::size_t>(var)] = 1.0;
    return p;
  }

  int order() const { return basis_->order(); }
  std::size_t size() const { return c_.size(); }
  const PolyBasis& basis() const { return *basis_; }

  double constant_part() const { return c_[0]; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  std::span<const double> coefficients() const { return c_; }

  double coeff(const MultiIndex& e) const {
    const long i = basis_->index_of(e);
    return i < 0 ? 0.0 : c_[static_cast<std::size_t>(i)];
  }
  void set_coeff(const MultiIndex& e, double v) {
    const long i = basis_->index_of(e);
    if (i < 0) throw ContractViolation("multi-index degree exceeds polynomial order");
    c_[static_cast<std::size_t>(i)] = v;
  }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
  }

  TruncatedPoly& operator+=(const TruncatedPoly& q) {
    check_compatible(q);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += q.c_[i];
    return *this;
  }
  TruncatedPoly& operator-=(const TruncatedPoly& q) {
    check_compatible(q);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= q.c_[i];
    return *this;
  }
  TruncatedPoly& operator*=(const TruncatedPoly& q) {
    *this = *this * q;
    return *this;
  }
  TruncatedPoly& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  TruncatedPoly& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  TruncatedPoly& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  TruncatedPoly& operator/=(double s) {
    for (auto& v : c_) v /= s;
    return *this;
  }

  TruncatedPoly operator-() const {
    TruncatedPoly r(*this);
    for (auto& v : r.c_) v = -v;
    return r;
  }

  friend TruncatedPoly operator+(TruncatedPoly p, const TruncatedPoly& q) { return p += q; }
  friend TruncatedPoly operator-(TruncatedPoly p, const TruncatedPoly& q) { return p -= q; }
  friend TruncatedPoly operator+(TruncatedPoly p, double s) { return p += s; }
  friend TruncatedPoly operator+(double s, TruncatedPoly p) { return p += s; }
  friend TruncatedPoly operator-(TruncatedPoly p, double s) { return p -= s; }
  friend TruncatedPoly operator-(double s, const TruncatedPoly& p) { return (-p) += s; }
  friend TruncatedPoly operator*(TruncatedPoly p, double s) { return p *= s; }
  friend TruncatedPoly operator*(double s, TruncatedPoly p) { return p *= s; }
  friend TruncatedPoly operator/(TruncatedPoly p, double s) { return p /= s; }

  /// Truncated product: terms of total degree above the order are dropped.
  friend TruncatedPoly operator*(const TruncatedPoly& p, const TruncatedPoly& q) {
    p.check_compatible(q);
    TruncatedPoly r(p.order());
    const PolyBasis& b = *p.basis_;
    const double* qc = q.c_.data();
    double* rc = r.c_.data();
    for (std::size_t i = 0; i < p.c_.size(); ++i) {
      const double a = p.c_[i];
      if (a == 0.0) continue;
      const std::uint32_t* row = b.product_row(i);
      const std::size_t len = b.product_row_length(i);
      for (std::size_t j = 0; j < len; ++j) rc[row[j]] += a * qc[j];
    }
    return r;
  }

  /// Formal partial derivative with respect to variable `var`. The result is
  /// kept at the same order (its top-degree block is zero).
  TruncatedPoly derivative(int var) const {
    if (var < 0 || var >= kVars) throw ContractViolation("variable index out of range");
    TruncatedPoly r(order());
    for (const auto& t : basis_->derivative_terms(var)) r.c_[t.target] += t.factor * c_[t.source];
    return r;
  }

  /// Values of every basis monomial at delta, in basis order.
  static std::vector<double> monomials(const PolyBasis& b, std::span<const double> delta) {
    if (delta.size() != kVars) throw ContractViolation("evaluation point must have 6 components");
    std::vector<double> m(b.size());
    m[0] = 1.0;
    for (std::size_t i = 1; i < m.size(); ++i)
      m[i] = m[b.parent(i)] * delta[static_cast<std::size_t>(b.parent_var(i))];
    return m;
  }

  double eval(std::span<const double> delta) const {
    const auto m = monomials(*basis_, delta);
    return eval_monomials(m);
  }

  double eval_monomials(std::span<const double> m) const {
    double s = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * m[i];
    return s;
  }

  /// Copy keeping only the monomials of total degree <= max_degree.
  TruncatedPoly truncated(int max_degree) const {
    TruncatedPoly r(*this);
    const std::size_t keep = monomial_count(std::max(max_degree, -1));
    for (std::size_t i = keep; i < r.c_.size(); ++i) r.c_[i] = 0.0;
    return r;
  }

  /// Debug text form: one line per nonzero coefficient,
  /// `e1 e2 e3 e4 e5 e6 coefficient`, graded-lex order, 17 significant digits.
  std::string to_text() const {
    std::ostringstream os;
    os << std::scientific << std::setprecision(16);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == 0.0) continue;
      const auto& e = basis_->exponents(i);
      for (int v = 0; v < kVars; ++v) os << static_cast<int>(e[static_cast<std::size_t>(v)]) << ' ';
      os << c_[i] << '\n';
    }
    return os.str();
  }

  static TruncatedPoly from_text(int order, const std::string& text) {
    TruncatedPoly p(order);
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      MultiIndex e{};
      for (int v = 0; v < kVars; ++v) {
        int x = -1;
        if (!(ls >> x) || x < 0) throw ConfigError("polynomial text line " + std::to_string(lineno) + ": bad exponent");
        e[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(x);
      }
      double value = 0.0;
      if (!(ls >> value)) throw ConfigError("polynomial text line " + std::to_string(lineno) + ": bad coefficient");
      p.set_coeff(e, value);
    }
    return p;
  }

  friend bool operator==(const TruncatedPoly& p, const TruncatedPoly& q) {
    return p.order() == q.order() && p.c_ == q.c_;
  }

 private:
  void check_compatible(const TruncatedPoly& q) const {
    if (basis_ != q.basis_) {
      throw ContractViolation("mixed polynomial orders " + std::to_string(order()) + " and " +
                              std::to_string(q.order()));
    }
  }

  const PolyBasis* basis_;
  std::vector<double> c_;
};

inline double constant_part(double x) { return x; }
inline double constant_part(const TruncatedPoly& p) { return p.constant_part(); }

}  // namespace cdmi::polyalg
