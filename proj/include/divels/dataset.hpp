#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace divels {

/// (x, y, z) rows for one regression problem: regressors x, rewards y and
/// instruments z, one sample per row.
struct TripleDataset {
  Eigen::MatrixXd xs;
  Eigen::VectorXd ys;
  Eigen::MatrixXd zs;

  std::size_t size() const { return static_cast<std::size_t>(ys.size()); }

  /// Throws InputError unless n >= 1, row counts agree and every entry is
  /// finite.
  void validate() const;

  /// Rows (y_i, z_i1, ..., z_id): the input of the instrument-side kernel.
  Eigen::MatrixXd yz() const;

  /// FNV-1a over the raw bytes of every entry; identifies exactly which rows
  /// a model was trained on.
  std::uint64_t checksum() const;
};

/// Growable buffer used while an epoch is in progress.
class TripleBuffer {
 public:
  TripleBuffer() = default;
  TripleBuffer(int x_dim, int z_dim) : x_dim_(x_dim), z_dim_(z_dim) {}

  void append(const Eigen::VectorXd& x, double y, const Eigen::VectorXd& z);
  std::size_t size() const { return ys_.size(); }
  bool empty() const { return ys_.empty(); }
  void clear();
  TripleDataset to_dataset() const;

 private:
  int x_dim_ = 0;
  int z_dim_ = 0;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> zs_;
};

}  // namespace divels
