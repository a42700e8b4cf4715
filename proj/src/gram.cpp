#include "divels/errors.hpp"
#include "divels/kernels.hpp"

namespace divels {

namespace {

void check_gram_inputs(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                       const Eigen::MatrixXd& cols) {
  spec.validate();
  if (rows.rows() == 0 || cols.rows() == 0) throw InputError("gram: empty input");
  if (rows.cols() != cols.cols()) {
    throw InputError("gram: row and column samples differ in dimension");
  }
}

}  // namespace

Eigen::MatrixXd gram_serial(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols) {
  check_gram_inputs(spec, rows, cols);
  Eigen::MatrixXd g(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols.rows(); ++j) {
      g(i, j) = eval_kernel(spec, rows.row(i).transpose(), cols.row(j).transpose());
    }
  }
  return g;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols) {
  check_gram_inputs(spec, rows, cols);
  const Eigen::Index n = rows.rows();
  const Eigen::Index m = cols.rows();
  Eigen::MatrixXd g(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      g(i, j) = eval_kernel(spec, rows.row(i).transpose(), cols.row(j).transpose());
    }
  }
  return g;
}

}  // namespace divels
