#ifndef TAXDIFF_TENSOR_HPP
#define TAXDIFF_TENSOR_HPP

#include <Eigen/Dense>

namespace taxdiff {

// All numerics run in 64-bit. Row-major so that a row is one token / one
// sequence position, matching the on-disk layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool same_shape(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace taxdiff

#endif
