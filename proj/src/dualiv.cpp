#include "divels/dualiv.hpp"

#include "divels/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace divels {

namespace {

void check_lambda(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InputError(std::string(name) + " must be finite and > 0");
  }
}

Eigen::MatrixXd symmetrized_gram(const KernelSpec& spec, const Eigen::MatrixXd& samples) {
  Eigen::MatrixXd g = gram(spec, samples, samples);
  return 0.5 * (g + g.transpose());
}

// L in 80-bit precision. Its spectrum runs from |L| down to n l1 and below
// (the reward enters the kernel raised to the degree), and rounding L or
// (L + n l1 I)^{-1} L to double already costs ~1e-8 in the fitted predictions.
using MatrixXe = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

MatrixXe extended_gram(const KernelSpec& spec, const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows(), d = samples.cols();
  MatrixXe g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      long double acc = 0.0L;
      if (spec.family == KernelFamily::Rbf) {
        for (Eigen::Index c = 0; c < d; ++c) {
          const long double diff = static_cast<long double>(samples(i, c)) - samples(j, c);
          acc += diff * diff;
        }
        const long double bw = spec.bandwidth;
        acc = std::exp(-acc / (2.0L * bw * bw));
      } else {
        for (Eigen::Index c = 0; c < d; ++c) acc += static_cast<long double>(samples(i, c)) * samples(j, c);
        if (spec.family == KernelFamily::Polynomial) {
          const long double base = acc + spec.offset;
          acc = 1.0L;
          for (int e = 0; e < spec.degree; ++e) acc *= base;
        }
      }
      g(i, j) = g(j, i) = acc;
    }
  return g;
}

// K ~ G G^T by diagonal pivoting. Stops once every remaining diagonal entry
// is below n eps max_i K_ii, which is the size of K's own rounding error, so
// G has as many columns as K has numerical rank.
Eigen::MatrixXd pivoted_cholesky(const Eigen::MatrixXd& k) {
  const Eigen::Index n = k.rows();
  Eigen::VectorXd rest = k.diagonal();
  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                     std::max(rest.maxCoeff(), 0.0);
  Eigen::MatrixXd g(n, n);
  Eigen::Index r = 0;
  while (r < n) {
    Eigen::Index p = 0;
    const double top = rest.maxCoeff(&p);
    if (!(top > tol)) break;
    Eigen::VectorXd col = k.col(p) - g.leftCols(r) * g.row(p).head(r).transpose();
    col /= std::sqrt(top);
    g.col(r) = col;
    rest -= col.cwiseAbs2();
    rest(p) = 0.0;
    ++r;
  }
  return g.leftCols(r);
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    const Eigen::VectorXd diag = a.diagonal();
    throw NumericalError(std::string("Cholesky factorization failed for ") + what,
                         diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300));
  }
  return llt;
}

}  // namespace

DualIVModel fit(const TripleDataset& data, const KernelSpec& k, const KernelSpec& l,
                double lambda1, double lambda2) {
  data.validate();
  k.validate();
  l.validate();
  check_lambda(lambda1, "lambda1");
  check_lambda(lambda2, "lambda2");

  const auto n = static_cast<Eigen::Index>(data.size());
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd kmat = symmetrized_gram(k, data.xs);
  const MatrixXe lmat = extended_gram(l, data.yz());

  MatrixXe lreg = lmat;
  lreg.diagonal().array() += static_cast<long double>(nd) * lambda1;
  const Eigen::LLT<MatrixXe> llt(lreg);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed for L + n*lambda1*I",
                         static_cast<double>(lreg.diagonal().maxCoeff() /
                                             std::max(lreg.diagonal().minCoeff(), 1e-300L)));
  }
  // A = (L + n l1 I)^{-1} L is only ever applied, never formed, and as
  // A v = v - n l1 (L + n l1 I)^{-1} v: applying L first would amplify the
  // rounding in v by |L| / (n l1).
  const long double shift = static_cast<long double>(nd) * lambda1;
  const auto apply_a = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    const MatrixXe ve = v.cast<long double>();
    return (ve - shift * llt.solve(ve)).cast<double>();
  };

  DualIVModel model;
  model.train_xs = data.xs;
  model.k_spec = k;
  model.lambda1 = lambda1;
  model.lambda2 = lambda2;

  // K (A K + n l2 I) theta = K A y is singular whenever K is, but the inner
  // factor is not: A K is similar to K^(1/2) A K^(1/2) >= 0, so every
  // eigenvalue of A K + n l2 I is at least n l2. Solving that factor alone
  // gives an exact solution of the full system. With K = G G^T only the r
  // columns of G and y go through the extended-precision solve.
  const Eigen::MatrixXd g = pivoted_cholesky(kmat);
  const Eigen::Index r = g.cols();
  model.diagnostics.rank = r;
  Eigen::MatrixXd v(n, r + 1);
  v << g, data.ys;
  const MatrixXe ve = v.cast<long double>();
  const MatrixXe sol = llt.solve(ve);
  model.diagnostics.inner_residual = relative(static_cast<double>((lreg * sol - ve).norm()),
                                              static_cast<double>(ve.norm()));
  const Eigen::MatrixXd aw = (ve - shift * sol).cast<double>();
  Eigen::MatrixXd b = aw.leftCols(r) * g.transpose();
  b.diagonal().array() += nd * lambda2;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  const double rcond = lu.rcond();
  model.diagnostics.condition_estimate =
      rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  model.thetas = lu.solve(aw.col(r));
  if (!model.thetas.allFinite()) {
    throw NumericalError("dual IV solve produced non-finite coefficients",
                         model.diagnostics.condition_estimate);
  }
  // (M K + n l2 K) theta - M y = K (A (K theta - y) + n l2 theta)
  const Eigen::VectorXd kay = kmat * aw.col(r);
  const Eigen::MatrixXd resid_in = kmat * model.thetas - data.ys;
  const Eigen::VectorXd resid =
      kmat * (apply_a(resid_in).col(0) + nd * lambda2 * model.thetas);
  model.diagnostics.outer_residual = relative(resid.norm(), kay.norm());
  return model;
}

DualIVModel naive_krr_fit(const TripleDataset& data, const KernelSpec& k, double lambda) {
  data.validate();
  k.validate();
  check_lambda(lambda, "lambda");
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::MatrixXd kmat = symmetrized_gram(k, data.xs);
  Eigen::MatrixXd kreg = kmat;
  kreg.diagonal().array() += static_cast<double>(n) * lambda;
  const auto llt = cholesky(kreg, "K + n*lambda*I");

  DualIVModel model;
  model.thetas = llt.solve(data.ys);
  model.train_xs = data.xs;
  model.k_spec = k;
  model.lambda1 = lambda;
  model.lambda2 = lambda;
  model.diagnostics.outer_residual =
      relative((kreg * model.thetas - data.ys).norm(), data.ys.norm());
  model.diagnostics.rank = n;
  return model;
}

double predict(const DualIVModel& model, const ConstVecRef& x) {
  if (x.size() != model.train_xs.cols()) {
    throw InputError("predict: expected dimension " + std::to_string(model.train_xs.cols()) +
                     ", got " + std::to_string(x.size()));
  }
  double out = 0.0;
  for (Eigen::Index i = 0; i < model.thetas.size(); ++i) {
    out += model.thetas(i) * eval_kernel(model.k_spec, model.train_xs.row(i).transpose(), x);
  }
  return out;
}

Eigen::VectorXd predict_batch_serial(const DualIVModel& model, const Eigen::MatrixXd& xs) {
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index r = 0; r < xs.rows(); ++r) out(r) = predict(model, xs.row(r).transpose());
  return out;
}

Eigen::VectorXd predict_batch(const DualIVModel& model, const Eigen::MatrixXd& xs) {
  if (xs.cols() != model.train_xs.cols()) {
    throw InputError("predict_batch: dimension mismatch");
  }
  Eigen::VectorXd out(xs.rows());
  const Eigen::Index rows = xs.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r) out(r) = predict(model, xs.row(r).transpose());
  return out;
}

Eigen::VectorXd closed_form_feature_space(const TripleDataset& data, const FeatureMap& phi,
                                          const FeatureMap& varphi, double lambda1,
                                          double lambda2) {
  data.validate();
  check_lambda(lambda1, "lambda1");
  check_lambda(lambda2, "lambda2");
  if (phi.input_dim() != data.xs.cols() || varphi.input_dim() != data.zs.cols() + 1) {
    throw InputError("feature maps do not match the dataset dimensions");
  }
  const double n = static_cast<double>(data.size());
  const Eigen::MatrixXd p = phi.featurize_rows(data.xs);
  const Eigen::MatrixXd u = varphi.featurize_rows(data.yz());

  Eigen::MatrixXd c_yz = u.transpose() * u / n;
  c_yz = 0.5 * (c_yz + c_yz.transpose());
  const Eigen::MatrixXd c_xyz = p.transpose() * u / n;
  const Eigen::VectorXd r = u.transpose() * data.ys / n;

  c_yz.diagonal().array() += lambda1;
  const auto inner = cholesky(c_yz, "C_yz + lambda1*I");
  const Eigen::MatrixXd b_cyx = inner.solve(c_xyz.transpose());
  Eigen::MatrixXd op = c_xyz * b_cyx;
  op = 0.5 * (op + op.transpose());
  op.diagonal().array() += lambda2;
  const auto outer = cholesky(op, "C_xyz (C_yz + lambda1*I)^-1 C_yzx + lambda2*I");
  return outer.solve(c_xyz * inner.solve(r));
}

double predict_features(const FeatureMap& phi, const Eigen::VectorXd& weights,
                        const ConstVecRef& x) {
  return weights.dot(phi.featurize(x));
}

Eigen::VectorXd dual_coefficients(const TripleDataset& data, const Eigen::VectorXd& f_coeffs,
                                  const KernelSpec& k, const KernelSpec& l, double lambda1) {
  data.validate();
  check_lambda(lambda1, "lambda1");
  if (f_coeffs.size() != data.ys.size()) throw InputError("f_coeffs length mismatch");
  const Eigen::MatrixXd kmat = symmetrized_gram(k, data.xs);
  Eigen::MatrixXd lreg = symmetrized_gram(l, data.yz());
  lreg.diagonal().array() += static_cast<double>(data.size()) * lambda1;
  return cholesky(lreg, "L + n*lambda1*I").solve(kmat * f_coeffs - data.ys);
}

ObjectiveReport objective_report(const TripleDataset& data, const Eigen::VectorXd& f_coeffs,
                                 const Eigen::VectorXd& u_coeffs, const KernelSpec& k,
                                 const KernelSpec& l, double lambda1, double lambda2) {
  data.validate();
  check_lambda(lambda1, "lambda1");
  const Eigen::Index n = data.ys.size();
  if (f_coeffs.size() != n || u_coeffs.size() != n) {
    throw InputError("objective_report: coefficient vectors must have length n");
  }
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd kmat = symmetrized_gram(k, data.xs);
  const Eigen::MatrixXd lmat = symmetrized_gram(l, data.yz());
  const Eigen::VectorXd f_vals = kmat * f_coeffs;
  const Eigen::VectorXd u_vals = lmat * u_coeffs;
  const Eigen::VectorXd resid = f_vals - data.ys;

  ObjectiveReport report;
  report.primal_norm_sq = f_coeffs.dot(f_vals);
  report.dual_norm_sq = u_coeffs.dot(u_vals);
  report.psi_hat = resid.dot(u_vals) / nd + 0.5 * lambda2 * report.primal_norm_sq -
                   u_vals.squaredNorm() / (2.0 * nd) - 0.5 * lambda1 * report.dual_norm_sq;

  // Inner maximum: (1/2n) g^T L (L + n l1 I)^{-1} g with g = f - y.
  Eigen::MatrixXd lreg = lmat;
  lreg.diagonal().array() += nd * lambda1;
  const Eigen::VectorXd beta = cholesky(lreg, "L + n*lambda1*I").solve(resid);
  report.primal_risk = resid.dot(lmat * beta) / (2.0 * nd);
  return report;
}

}  // namespace divels
