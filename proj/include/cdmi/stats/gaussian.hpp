#pragma once

#include <Eigen/Dense>
#include <random>

#include "cdmi/errors.hpp"
#include "cdmi/stats/chi_square.hpp"

namespace cdmi::stats {

/// Statistic q * d' S^-1 d; q = 0.5 is the half convention used throughout
/// the detection logic, q = 1 the ordinary squared Mahalanobis distance.
inline double mahalanobis_stat(const Eigen::VectorXd& d, const Eigen::MatrixXd& cov, double q) {
  if (cov.rows() != d.size() || cov.cols() != d.size()) throw ContractViolation("mahalanobis: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw FactorizationError("mahalanobis: covariance is not positive definite");
  const Eigen::VectorXd w = llt.matrixL().solve(d);
  return q * w.squaredNorm();
}

inline double half_mahalanobis(const Eigen::VectorXd& d, const Eigen::MatrixXd& cov) {
  return mahalanobis_stat(d, cov, 0.5);
}

/// Confidence level alpha_x and its chi-square quantile m_x (6 DoF).
struct ConfidenceBudget {
  double alpha_x = 0.0;
  double m_x = 0.0;
  int dof_state = 6;

  static ConfidenceBudget from_alpha(double alpha_x, int dof = 6) {
    return {alpha_x, chi2_quantile(alpha_x, dof), dof};
  }
  bool unbounded() const { return is_unbounded(m_x); }
};

/// Mean and covariance with cached factors: cov = L L', cov^-1 = U' U, U = L^-1.
class GaussianState {
 public:
  using Vec = Eigen::Matrix<double, 6, 1>;
  using Mat = Eigen::Matrix<double, 6, 6>;

  GaussianState(const Vec& mean, const Mat& cov) : mean_(mean), cov_(cov) {
    const double scale = cov.cwiseAbs().maxCoeff();
    if (!((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale))
      throw ContractViolation("covariance is not symmetric");
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw FactorizationError("covariance is not positive definite");
    chol_ = llt.matrixL();
    chol_inv_ = chol_.triangularView<Eigen::Lower>().solve(Mat::Identity());
  }

  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  const Mat& chol() const { return chol_; }
  const Mat& chol_inv() const { return chol_inv_; }

 private:
  Vec mean_;
  Mat cov_;
  Mat chol_;
  Mat chol_inv_;
};

/// L z with z standard normal.
template <class Rng>
Eigen::Matrix<double, 6, 1> correlated_normal(const Eigen::Matrix<double, 6, 6>& chol, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix<double, 6, 1> z;
  for (int i = 0; i < 6; ++i) z[i] = g(rng);
  return chol * z;
}

/// Zero-mean deviation drawn from the state's covariance.
template <class Rng>
Eigen::Matrix<double, 6, 1> sample_gaussian(const GaussianState& g, Rng& rng) {
  return correlated_normal(g.chol(), rng);
}

}  // namespace cdmi::stats
