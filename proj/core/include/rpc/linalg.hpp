#pragma once

#include <Eigen/Core>

namespace rpc {

/// Largest singular value of M.
double spectral_norm(const Eigen::MatrixXd& M);

/// Smallest nonzero singular value of M, i.e. the inverse of the spectral
/// norm of the Moore-Penrose pseudoinverse. This is the guaranteed gain b
/// of the proxy dynamics built from a local gain matrix.
///
/// Singular values below rel_tol * sigma_max are treated as zero.
/// @throws ZeroMatrixError if all singular values vanish.
double pinv_norm_inverse(const Eigen::MatrixXd& M, double rel_tol = 1e-12);

/// Moore-Penrose pseudoinverse via SVD with the same zero threshold.
/// @throws ZeroMatrixError if all singular values vanish.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& M, double rel_tol = 1e-12);

}  // namespace rpc
