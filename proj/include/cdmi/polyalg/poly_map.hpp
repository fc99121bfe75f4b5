#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cdmi/errors.hpp"
#include "cdmi/polyalg/truncated_poly.hpp"

namespace cdmi::polyalg {

/// Vector-valued polynomial map over the six deviation variables. Used for
/// flow maps (6 components) and stacked measurement maps (2N components).
class PolyMap {
 public:
  PolyMap() = default;
  explicit PolyMap(std::vector<TruncatedPoly> components) : comps_(std::move(components)) {
    for (const auto& c : comps_) {
      if (c.order() != comps_.front().order()) throw ContractViolation("PolyMap components must share one order");
    }
  }

  /// Identity map ref + delta at the given order.
  static PolyMap identity(int order, std::span<const double> ref) {
    if (ref.size() != kVars) throw ContractViolation("identity map needs a 6-vector");
    std::vector<TruncatedPoly> c;
    for (int v = 0; v < kVars; ++v) c.push_back(TruncatedPoly::variable(order, v, ref[static_cast<std::size_t>(v)]));
    return PolyMap(std::move(c));
  }

  std::size_t size() const { return comps_.size(); }
  int order() const { return comps_.empty() ? 0 : comps_.front().order(); }
  const TruncatedPoly& operator[](std::size_t i) const { return comps_[i]; }
  TruncatedPoly& operator[](std::size_t i) { return comps_[i]; }
  const std::vector<TruncatedPoly>& components() const { return comps_; }

  void append(const PolyMap& other) {
    for (const auto& c : other.comps_) {
      if (!comps_.empty() && c.order() != order()) throw ContractViolation("PolyMap components must share one order");
      comps_.push_back(c);
    }
  }

  Eigen::VectorXd constant_part() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(comps_.size()));
    for (std::size_t i = 0; i < comps_.size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].constant_part();
    return v;
  }

  Eigen::VectorXd eval(std::span<const double> delta) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(comps_.size()));
    if (comps_.empty()) return v;
    const auto m = TruncatedPoly::monomials(comps_.front().basis(), delta);
    for (std::size_t i = 0; i < comps_.size(); ++i) v[static_cast<Eigen::Index>(i)] = comps_[i].eval_monomials(m);
    return v;
  }

  Eigen::VectorXd eval(const Eigen::Matrix<double, 6, 1>& delta) const {
    return eval(std::span<const double>(delta.data(), kVars));
  }

  /// Degree-1 coefficient block (the Jacobian at the expansion point).
  Eigen::MatrixXd linear_part() const {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(comps_.size()), kVars);
    for (std::size_t r = 0; r < comps_.size(); ++r)
      for (int v = 0; v < kVars; ++v)
        J(static_cast<Eigen::Index>(r), v) = order() >= 1 ? comps_[r][1 + static_cast<std::size_t>(v)] : 0.0;
    return J;
  }

  /// Partial derivatives of every component at delta, via formal
  /// differentiation contracted against the monomials of delta.
  Eigen::MatrixXd jacobian_at(std::span<const double> delta) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(comps_.size()), kVars);
    if (comps_.empty()) return J;
    const PolyBasis& b = comps_.front().basis();
    const auto m = TruncatedPoly::monomials(b, delta);
    for (int v = 0; v < kVars; ++v) {
      const auto& terms = b.derivative_terms(v);
      for (std::size_t r = 0; r < comps_.size(); ++r) {
        const auto& p = comps_[r];
        double s = 0.0;
        for (const auto& t : terms) s += t.factor * p[t.source] * m[t.target];
        J(static_cast<Eigen::Index>(r), v) = s;
      }
    }
    return J;
  }

  Eigen::MatrixXd jacobian_at(const Eigen::Matrix<double, 6, 1>& delta) const {
    return jacobian_at(std::span<const double>(delta.data(), kVars));
  }

 private:
  std::vector<TruncatedPoly> comps_;
};

}  // namespace cdmi::polyalg
