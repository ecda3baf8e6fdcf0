#include "rpc/linalg.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "rpc/errors.hpp"
#include "rpc/rng.hpp"

namespace {

constexpr double kTol = 1e-12;

// Orthogonal factor from the QR decomposition of a seeded random matrix.
Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
  rpc::RandomStream rng(seed, 7);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.gaussian();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
}

}  // namespace

TEST(PinvNormInverse, IdentityIsOne) {
  EXPECT_DOUBLE_EQ(rpc::pinv_norm_inverse(Eigen::Matrix2d::Identity()), 1.0);
}

TEST(PinvNormInverse, DiagonalTakesSmallestEntry) {
  Eigen::Matrix2d M = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  EXPECT_DOUBLE_EQ(rpc::pinv_norm_inverse(M), 1.0);
}

TEST(PinvNormInverse, MatchesConstructedSvd) {
  // Build M = U S V' with known singular values; the smallest must come back.
  const Eigen::MatrixXd U = random_orthogonal(3, 11);
  const Eigen::MatrixXd V = random_orthogonal(3, 23);
  Eigen::Vector3d sv(3.0, 1.7, 0.4);
  const Eigen::MatrixXd M = U * sv.asDiagonal() * V.transpose();
  EXPECT_NEAR(rpc::pinv_norm_inverse(M), 0.4, 1e-10);

  // Cross-check against a direct decomposition of the assembled matrix.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  EXPECT_NEAR(rpc::pinv_norm_inverse(M), svd.singularValues().minCoeff(), 1e-12);
}

TEST(PinvNormInverse, SmallestNonzeroOnRankDeficient) {
  // Rank-one 2x2: one singular value is zero and must be skipped.
  Eigen::Matrix2d M;
  M << 2, 0, 0, 0;
  EXPECT_NEAR(rpc::pinv_norm_inverse(M), 2.0, kTol);
}

TEST(PinvNormInverse, ZeroMatrixThrows) {
  EXPECT_THROW(rpc::pinv_norm_inverse(Eigen::Matrix3d::Zero()), rpc::ZeroMatrixError);
}

TEST(PinvNormInverse, PositiveAndAbsolutelyHomogeneous) {
  rpc::RandomStream rng(5, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform(0.0, 3.0));
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = rng.gaussian();
    if (M.cwiseAbs().maxCoeff() < 1e-9) continue;
    const double base = rpc::pinv_norm_inverse(M);
    EXPECT_GT(base, 0.0);
    const double alpha = rng.uniform(-3.0, 3.0);
    if (std::abs(alpha) < 1e-3) continue;
    EXPECT_NEAR(rpc::pinv_norm_inverse(alpha * M), std::abs(alpha) * base,
                1e-9 * std::abs(alpha) * base);
  }
}

TEST(SpectralNorm, LargestSingularValue) {
  Eigen::Matrix2d M = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  EXPECT_DOUBLE_EQ(rpc::spectral_norm(M), 2.0);
  EXPECT_DOUBLE_EQ(rpc::spectral_norm(Eigen::Matrix3d::Zero()), 0.0);
}

TEST(Pseudoinverse, InverseOnFullRank) {
  Eigen::Matrix2d M;
  M << 1, 2, 3, 4;
  const Eigen::MatrixXd P = rpc::pseudoinverse(M);
  EXPECT_LT((P * M - Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

TEST(Pseudoinverse, MoorePenroseIdentitiesOnRankDeficient) {
  Eigen::MatrixXd M(2, 2);
  M << 1, 1, 1, 1;
  const Eigen::MatrixXd P = rpc::pseudoinverse(M);
  EXPECT_LT((M * P * M - M).norm(), 1e-12);
  EXPECT_LT((P * M * P - P).norm(), 1e-12);
}

TEST(Pseudoinverse, NormConsistentWithGain) {
  // |M^+| in the spectral norm is the inverse of the smallest nonzero
  // singular value, the identity the proxy gain relies on.
  const Eigen::MatrixXd U = random_orthogonal(2, 3);
  const Eigen::MatrixXd V = random_orthogonal(2, 9);
  Eigen::Vector2d sv(2.5, 0.5);
  const Eigen::MatrixXd M = U * sv.asDiagonal() * V.transpose();
  EXPECT_NEAR(rpc::spectral_norm(rpc::pseudoinverse(M)) * rpc::pinv_norm_inverse(M), 1.0,
              1e-10);
}
