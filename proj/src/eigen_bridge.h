#pragma once

#include <Eigen/Dense>

#include "lurerad/matrix.h"

namespace lurerad::internal {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::MatrixXd ToEigen(const Mat& m) {
  return Eigen::Map<const RowMatrix>(m.data().data(),
                                     static_cast<Eigen::Index>(m.rows()),
                                     static_cast<Eigen::Index>(m.cols()));
}

}  // namespace lurerad::internal
