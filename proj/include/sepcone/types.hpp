#pragma once

#include <Eigen/Dense>

namespace sepcone {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Three-way cone membership verdict.
enum class Region { Interior, Boundary, Outside };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Interior: return "interior";
    case Region::Boundary: return "boundary";
    case Region::Outside: return "outside";
  }
  return "?";
}

}  // namespace sepcone
