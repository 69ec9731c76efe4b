#pragma once

#include "hvinfer/types.hpp"

namespace hvinfer {

/// Subtracts each column's mean. An empty matrix is returned unchanged.
Matrix center_columns(const Matrix& m);

/// Paired design X (n x p) and responses Y (n x m), one sample per row.
/// Immutable after construction.
class Dataset {
 public:
  /// Validates shapes (n >= 2, p >= 1, m >= 1, equal row counts) and, when
  /// `center` is set, centers both matrices exactly once.
  Dataset(Matrix x, Matrix y, bool center = true);

  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  bool centered() const noexcept { return centered_; }

  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  Index m() const noexcept { return y_.cols(); }

 private:
  Matrix x_;
  Matrix y_;
  bool centered_;
};

}  // namespace hvinfer
