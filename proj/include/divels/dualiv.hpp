#pragma once

#include "divels/dataset.hpp"
#include "divels/kernels.hpp"

#include <Eigen/Dense>

namespace divels {

struct SolveDiagnostics {
  /// Relative residual of the instrument-side Cholesky solves.
  double inner_residual = 0.0;
  /// |S theta - b| / |b| for the outer system S theta = b.
  double outer_residual = 0.0;
  /// Columns of the pivoted Cholesky factor of K (its numerical rank).
  Eigen::Index rank = 0;
  /// 1 / rcond of A K + n lambda2 I.
  double condition_estimate = 1.0;
};

/// f(x) = sum_i thetas[i] k(train_xs.row(i), x).
struct DualIVModel {
  Eigen::VectorXd thetas;
  Eigen::MatrixXd train_xs;
  KernelSpec k_spec;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  SolveDiagnostics diagnostics;
};

/// Dual IV regression in kernel form:
///
///   K = [k(x_i, x_j)],  L = [l((y_i, z_i), (y_j, z_j))]
///   M = K (L + n lambda1 I)^{-1} L
///   (M K + n lambda2 K) theta = M y
///
/// L + n lambda1 I is factored by Cholesky in long double: with a polynomial
/// kernel on (y, z) the spectrum of L is wide enough that rounding it to
/// double shows up at 1e-8 in the predictions. The outer system factors as
/// K (A K + n lambda2 I) theta = K A y with A = (L + n lambda1 I)^{-1} L and
/// is singular whenever K is rank deficient. The inner factor never is (its
/// eigenvalues are at least n lambda2), so theta solves it by pivoted LU.
/// That theta solves the full system exactly, and every solution gives the
/// same predictions. K enters through a pivoted Cholesky factor G G^T, so
/// only rank(K) + 1 columns need the extended-precision solve.
///
/// Throws InputError for invalid data or lambdas and NumericalError if a
/// factorization fails or the solution is not finite.
DualIVModel fit(const TripleDataset& data, const KernelSpec& k, const KernelSpec& l,
                double lambda1, double lambda2);

/// Kernel ridge regression of y on x, ignoring the instruments:
/// theta = (K + n lambda I)^{-1} y.
DualIVModel naive_krr_fit(const TripleDataset& data, const KernelSpec& k, double lambda);

double predict(const DualIVModel& model, const ConstVecRef& x);

/// Predictions at every row of xs, evaluated in parallel over rows.
Eigen::VectorXd predict_batch(const DualIVModel& model, const Eigen::MatrixXd& xs);
/// Single-threaded reference for predict_batch.
Eigen::VectorXd predict_batch_serial(const DualIVModel& model, const Eigen::MatrixXd& xs);

/// The same estimator written with explicit feature-space covariances:
///
///   C_yz = U^T U / n,  C_xyz = P^T U / n,  r = U^T y / n
///   w = (C_xyz (C_yz + l1 I)^{-1} C_xyz^T + l2 I)^{-1} C_xyz (C_yz + l1 I)^{-1} r
///
/// where P and U hold phi(x_i) and varphi(y_i, z_i) as rows. Returns the
/// primal weights w over phi's coordinates; f(x) = <w, phi(x)>.
Eigen::VectorXd closed_form_feature_space(const TripleDataset& data, const FeatureMap& phi,
                                          const FeatureMap& varphi, double lambda1,
                                          double lambda2);

double predict_features(const FeatureMap& phi, const Eigen::VectorXd& weights,
                        const ConstVecRef& x);

/// Terms of the empirical regularized saddle objective for
/// f = sum_i f_coeffs[i] k(x_i, .) and u = sum_i u_coeffs[i] l((y_i, z_i), .).
struct ObjectiveReport {
  /// (1/n) sum (f(x_i) - y_i) u_i + (l2/2)|f|^2 - (1/2n) sum u_i^2 - (l1/2)|u|^2
  double psi_hat = 0.0;
  /// max over u in span{l((y_i, z_i), .)} of psi_hat without the f penalty.
  double primal_risk = 0.0;
  double dual_norm_sq = 0.0;
  double primal_norm_sq = 0.0;
};

ObjectiveReport objective_report(const TripleDataset& data, const Eigen::VectorXd& f_coeffs,
                                 const Eigen::VectorXd& u_coeffs, const KernelSpec& k,
                                 const KernelSpec& l, double lambda1, double lambda2);

/// Coefficients of the inner maximizer u for a fixed f:
/// beta = (L + n lambda1 I)^{-1} (K f_coeffs - y).
Eigen::VectorXd dual_coefficients(const TripleDataset& data, const Eigen::VectorXd& f_coeffs,
                                  const KernelSpec& k, const KernelSpec& l, double lambda1);

}  // namespace divels
