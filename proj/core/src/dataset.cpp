#include "hvinfer/dataset.hpp"

#include <string>

#include "hvinfer/error.hpp"

namespace hvinfer {

Matrix center_columns(const Matrix& m) {
  if (m.rows() == 0) return m;
  const Eigen::RowVectorXd mean = m.colwise().mean();
  return m.rowwise() - mean;
}

Dataset::Dataset(Matrix x, Matrix y, bool center)
    : x_(std::move(x)), y_(std::move(y)), centered_(center) {
  if (x_.rows() != y_.rows()) {
    throw InputError("X has " + std::to_string(x_.rows()) + " rows but Y has " +
                     std::to_string(y_.rows()));
  }
  if (x_.rows() < 2) throw InputError("need at least 2 samples");
  if (x_.cols() < 1) throw InputError("X has no columns");
  if (y_.cols() < 1) throw InputError("Y has no columns");
  if (!x_.allFinite() || !y_.allFinite()) throw InputError("non-finite entries in X or Y");
  if (center) {
    x_ = center_columns(x_);
    y_ = center_columns(y_);
  }
}

}  // namespace hvinfer
