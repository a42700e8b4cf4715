#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace divels {

enum class KernelFamily { Linear, Polynomial, Rbf };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Declarative positive-definite kernel.
///   Linear:      k(w, w') = <w, w'>
///   Polynomial:  k(w, w') = (<w, w'> + offset)^degree
///   Rbf:         k(w, w') = exp(-|w - w'|^2 / (2 bandwidth^2))
struct KernelSpec {
  KernelFamily family = KernelFamily::Linear;
  int degree = 1;
  double offset = 0.0;
  double bandwidth = 1.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(int degree, double offset) {
    return {KernelFamily::Polynomial, degree, offset, 1.0};
  }
  static KernelSpec rbf(double bandwidth) {
    return {KernelFamily::Rbf, 1, 0.0, bandwidth};
  }

  /// Throws InputError on degree < 1, offset < 0 or bandwidth <= 0.
  void validate() const;
  bool finite_rank() const { return family != KernelFamily::Rbf; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Accepts contiguous vectors and strided views such as matrix rows.
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

double eval_kernel(const KernelSpec& spec, const ConstVecRef& w,
                   const ConstVecRef& w_prime);

/// G(i, j) = k(rows.row(i), cols.row(j)); samples are stored one per row.
/// Rows of G are filled in parallel; every entry is computed exactly as in
/// gram_serial, so both return bit-identical matrices.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols);

/// Single-threaded reference for gram().
Eigen::MatrixXd gram_serial(const KernelSpec& spec, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols);

std::size_t binomial(int n, int k);

/// Exponent vectors of all monomials of total degree <= max_degree in `dim`
/// variables, graded lexicographic: by total degree ascending, then
/// lexicographically descending in (e_1, ..., e_dim). For dim = 2, degree 2:
/// 1, x1, x2, x1^2, x1 x2, x2^2.
std::vector<std::vector<int>> graded_lex_monomials(int dim, int max_degree);

/// Explicit finite-rank feature map phi with <phi(w), phi(w')> = k(w, w').
///
/// Linear kernels use the identity map. Polynomial kernels expand
/// (<w, w'> + c)^p by the multinomial theorem: the monomial w^a with
/// |a| <= p carries coefficient sqrt(p! / ((p - |a|)! a_1! ... a_d!) * c^(p - |a|)).
/// With c = 0 the lower-degree coordinates are identically zero but kept, so
/// output_dim is always binomial(d + p, p).
class FeatureMap {
 public:
  /// Throws UnsupportedFamilyError for Rbf.
  FeatureMap(const KernelSpec& spec, int input_dim);

  const KernelSpec& spec() const { return spec_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return static_cast<int>(coefficients_.size()); }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }

  Eigen::VectorXd featurize(const ConstVecRef& w) const;
  /// Featurizes every row; result is n x output_dim.
  Eigen::MatrixXd featurize_rows(const Eigen::MatrixXd& samples) const;

 private:
  KernelSpec spec_;
  int input_dim_;
  std::vector<std::vector<int>> exponents_;
  std::vector<double> coefficients_;
};

/// Dimension of the RKHS spanned by a finite-rank kernel on `input_dim`
/// variables: d for Linear, binomial(d + p, p) for Polynomial with offset > 0
/// and binomial(d + p - 1, p) (homogeneous monomials only) with offset 0.
std::size_t rkhs_dimension(const KernelSpec& spec, int input_dim);

}  // namespace divels
