#include "divels/kernels.hpp"

#include "divels/errors.hpp"

#include <cmath>
#include <string>

namespace divels {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear:
      return "linear";
    case KernelFamily::Polynomial:
      return "polynomial";
    case KernelFamily::Rbf:
      return "rbf";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "linear") return KernelFamily::Linear;
  if (name == "polynomial" || name == "poly") return KernelFamily::Polynomial;
  if (name == "rbf") return KernelFamily::Rbf;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::Linear:
      break;
    case KernelFamily::Polynomial:
      if (degree < 1) throw InputError("polynomial kernel requires degree >= 1");
      if (!(offset >= 0.0) || !std::isfinite(offset))
        throw InputError("polynomial kernel requires a finite offset >= 0");
      break;
    case KernelFamily::Rbf:
      if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw InputError("rbf kernel requires bandwidth > 0");
      break;
  }
}

namespace {

double int_pow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

double factorial(int n) {
  double result = 1.0;
  for (int i = 2; i <= n; ++i) result *= i;
  return result;
}

void append_degree(int dim, int remaining, std::vector<int>& current, int pos,
                   std::vector<std::vector<int>>& out) {
  if (pos == dim - 1) {
    current[pos] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[pos] = e;
    append_degree(dim, remaining - e, current, pos + 1, out);
  }
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const ConstVecRef& w,
                   const ConstVecRef& w_prime) {
  spec.validate();
  if (w.size() != w_prime.size()) {
    throw InputError("kernel arguments differ in dimension: " +
                     std::to_string(w.size()) + " vs " +
                     std::to_string(w_prime.size()));
  }
  // Plain loops keep the summation order fixed, so k(w, w') == k(w', w)
  // bit for bit.
  const Eigen::Index d = w.size();
  switch (spec.family) {
    case KernelFamily::Linear:
    case KernelFamily::Polynomial: {
      double dot = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) dot += w(j) * w_prime(j);
      if (spec.family == KernelFamily::Linear) return dot;
      return int_pow(dot + spec.offset, spec.degree);
    }
    case KernelFamily::Rbf: {
      double sq = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = w(j) - w_prime(j);
        sq += diff * diff;
      }
      return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
    }
  }
  return 0.0;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  }
  return result;
}

std::vector<std::vector<int>> graded_lex_monomials(int dim, int max_degree) {
  if (dim < 1) throw InputError("monomial enumeration needs dim >= 1");
  if (max_degree < 0) throw InputError("monomial enumeration needs degree >= 0");
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(dim), 0);
  for (int degree = 0; degree <= max_degree; ++degree) {
    append_degree(dim, degree, current, 0, out);
  }
  return out;
}

FeatureMap::FeatureMap(const KernelSpec& spec, int input_dim)
    : spec_(spec), input_dim_(input_dim) {
  spec_.validate();
  if (input_dim < 1) throw InputError("feature map needs input_dim >= 1");
  switch (spec_.family) {
    case KernelFamily::Rbf:
      throw UnsupportedFamilyError("rbf kernel has no finite feature map");
    case KernelFamily::Linear:
      for (int j = 0; j < input_dim; ++j) {
        std::vector<int> e(static_cast<std::size_t>(input_dim), 0);
        e[static_cast<std::size_t>(j)] = 1;
        exponents_.push_back(std::move(e));
        coefficients_.push_back(1.0);
      }
      break;
    case KernelFamily::Polynomial: {
      const int p = spec_.degree;
      exponents_ = graded_lex_monomials(input_dim, p);
      coefficients_.reserve(exponents_.size());
      for (const auto& e : exponents_) {
        int total = 0;
        double denom = 1.0;
        for (int a : e) {
          total += a;
          denom *= factorial(a);
        }
        const int rest = p - total;
        denom *= factorial(rest);
        const double weight = factorial(p) / denom * int_pow(spec_.offset, rest);
        coefficients_.push_back(std::sqrt(weight));
      }
      break;
    }
  }
}

Eigen::VectorXd FeatureMap::featurize(const ConstVecRef& w) const {
  if (w.size() != input_dim_) {
    throw InputError("featurize: expected dimension " + std::to_string(input_dim_) +
                     ", got " + std::to_string(w.size()));
  }
  Eigen::VectorXd out(output_dim());
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    double monomial = 1.0;
    for (int j = 0; j < input_dim_; ++j) {
      monomial *= int_pow(w(j), exponents_[k][static_cast<std::size_t>(j)]);
    }
    out(static_cast<Eigen::Index>(k)) = coefficients_[k] * monomial;
  }
  return out;
}

Eigen::MatrixXd FeatureMap::featurize_rows(const Eigen::MatrixXd& samples) const {
  Eigen::MatrixXd out(samples.rows(), output_dim());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    out.row(i) = featurize(samples.row(i).transpose()).transpose();
  }
  return out;
}

std::size_t rkhs_dimension(const KernelSpec& spec, int input_dim) {
  spec.validate();
  switch (spec.family) {
    case KernelFamily::Linear:
      return static_cast<std::size_t>(input_dim);
    case KernelFamily::Polynomial:
      if (spec.offset > 0.0) return binomial(input_dim + spec.degree, spec.degree);
      return binomial(input_dim + spec.degree - 1, spec.degree);
    case KernelFamily::Rbf:
      throw UnsupportedFamilyError("rbf kernel spans an infinite-dimensional RKHS");
  }
  return 0;
}

}  // namespace divels
