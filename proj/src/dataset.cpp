#include "divels/dataset.hpp"

#include "divels/errors.hpp"

#include <cstring>

namespace divels {

void TripleDataset::validate() const {
  const Eigen::Index n = ys.size();
  if (n < 1) throw InputError("dataset is empty");
  if (xs.rows() != n || zs.rows() != n) {
    throw InputError("dataset row counts disagree: xs=" + std::to_string(xs.rows()) +
                     " ys=" + std::to_string(n) + " zs=" + std::to_string(zs.rows()));
  }
  if (!xs.allFinite() || !ys.allFinite() || !zs.allFinite()) {
    throw InputError("dataset contains non-finite entries");
  }
}

Eigen::MatrixXd TripleDataset::yz() const {
  Eigen::MatrixXd out(ys.size(), 1 + zs.cols());
  out.col(0) = ys;
  out.rightCols(zs.cols()) = zs;
  return out;
}

namespace {

void fnv_mix(std::uint64_t& h, const double* data, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, data + i, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
}

}  // namespace

std::uint64_t TripleDataset::checksum() const {
  std::uint64_t h = 14695981039346656037ull;
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    const Eigen::VectorXd x = xs.row(i).transpose();
    const Eigen::VectorXd z = zs.row(i).transpose();
    fnv_mix(h, x.data(), x.size());
    fnv_mix(h, &ys(i), 1);
    fnv_mix(h, z.data(), z.size());
  }
  return h;
}

void TripleBuffer::append(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& z) {
  if (x.size() != x_dim_ || z.size() != z_dim_) {
    throw InputError("buffer row has the wrong dimension");
  }
  xs_.insert(xs_.end(), x.data(), x.data() + x.size());
  ys_.push_back(y);
  zs_.insert(zs_.end(), z.data(), z.data() + z.size());
}

void TripleBuffer::clear() {
  xs_.clear();
  ys_.clear();
  zs_.clear();
}

TripleDataset TripleBuffer::to_dataset() const {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto n = static_cast<Eigen::Index>(ys_.size());
  TripleDataset out;
  out.xs = Eigen::Map<const RowMajor>(xs_.data(), n, x_dim_);
  out.ys = Eigen::Map<const Eigen::VectorXd>(ys_.data(), n);
  out.zs = Eigen::Map<const RowMajor>(zs_.data(), n, z_dim_);
  return out;
}

}  // namespace divels
