#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gvpr {

/// Row-per-image descriptor matrix with id alignment.
class DescriptorSet {
 public:
  DescriptorSet() = default;
  DescriptorSet(std::vector<std::string> ids, Eigen::MatrixXd matrix,
                bool normalized = false)
      : ids_(std::move(ids)), matrix_(std::move(matrix)), normalized_(normalized) {
    if (static_cast<Eigen::Index>(ids_.size()) != matrix_.rows()) {
      throw std::invalid_argument("DescriptorSet: " + std::to_string(ids_.size()) +
                                  " ids for " + std::to_string(matrix_.rows()) + " rows");
    }
    if (!matrix_.allFinite()) throw std::invalid_argument("DescriptorSet: non-finite value");
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!index_.emplace(ids_[i], i).second) {
        throw std::invalid_argument("DescriptorSet: duplicate id '" + ids_[i] + "'");
      }
    }
    if (normalized_) {
      for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
        if (std::abs(matrix_.row(r).norm() - 1.0) > 1e-6) {
          throw std::invalid_argument("DescriptorSet: row '" + ids_[r] +
                                      "' is not unit-norm");
        }
      }
    }
  }

  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  bool normalized() const { return normalized_; }
  std::size_t size() const { return ids_.size(); }
  Eigen::Index dim() const { return matrix_.cols(); }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t index_of(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("unknown descriptor id '" + id + "'");
    return it->second;
  }

  /// Same ids with every row scaled to unit norm.
  DescriptorSet l2_normalized() const {
    Eigen::MatrixXd m = matrix_;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double n = m.row(r).norm();
      if (n <= 1e-12) {
        throw std::domain_error("cannot normalize near-zero descriptor '" + ids_[r] + "'");
      }
      m.row(r) /= n;
    }
    return DescriptorSet(ids_, std::move(m), true);
  }

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd matrix_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace gvpr
