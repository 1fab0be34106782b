#pragma once

#include <Eigen/Dense>

#include <vector>

namespace dpdsis {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;  // column-major, so covariates are contiguous columns
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using IndexList = std::vector<Index>;

}  // namespace dpdsis
