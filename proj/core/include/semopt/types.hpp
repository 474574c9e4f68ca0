#pragma once

#include <Eigen/Core>

namespace semopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace semopt
