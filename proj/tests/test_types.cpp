#include "rpc/types.hpp"

#include <gtest/gtest.h>

#include "rpc/errors.hpp"

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Partition, VehicleStateSplitsHeadingSpeedFromPosition) {
  // Canonical order [theta, v, x, y]: heading and speed are actuated.
  const auto s = rpc::partition(vec({0.0, 2.0, 0.0, 0.0}), 2);
  EXPECT_EQ(s.actuated_dim(), 2);
  EXPECT_EQ(s.unactuated_dim(), 2);
  EXPECT_TRUE(s.actuated().isApprox(vec({0.0, 2.0})));
  EXPECT_TRUE(s.unactuated().isApprox(vec({0.0, 0.0})));
}

TEST(Partition, FullyActuatedLeavesEmptyRemainder) {
  const auto s = rpc::partition(vec({1.0, 2.0}), 2);
  EXPECT_EQ(s.unactuated_dim(), 0);
  EXPECT_TRUE(s.actuated().isApprox(vec({1.0, 2.0})));
  EXPECT_EQ(s.unactuated().size(), 0);
}

TEST(Partition, SingleActuatedEntry) {
  const auto s = rpc::partition(vec({1.0, 2.0, 3.0}), 1);
  EXPECT_TRUE(s.actuated().isApprox(vec({1.0})));
  EXPECT_TRUE(s.unactuated().isApprox(vec({2.0, 3.0})));
}

TEST(Partition, RoundTripsThroughFull) {
  const Eigen::VectorXd x = vec({0.3, -1.2, 4.5, 6.7});
  for (int m = 1; m <= 4; ++m) {
    const auto s = rpc::partition(x, m);
    EXPECT_TRUE(s.full().isApprox(x)) << "m=" << m;
    Eigen::VectorXd rebuilt(4);
    rebuilt << s.actuated(), s.unactuated();
    EXPECT_TRUE(rebuilt.isApprox(x)) << "m=" << m;
  }
}

TEST(Partition, RejectsInvalidSplit) {
  EXPECT_THROW(rpc::partition(vec({1.0, 2.0}), 3), rpc::DimensionMismatchError);
  EXPECT_THROW(rpc::partition(vec({1.0, 2.0}), 0), rpc::DimensionMismatchError);
}

TEST(PartitionedState, SettersKeepTheSplit) {
  auto s = rpc::partition(vec({1.0, 2.0, 3.0, 4.0}), 2);
  s.set_actuated(vec({9.0, 8.0}));
  s.set_unactuated(vec({7.0, 6.0}));
  EXPECT_TRUE(s.full().isApprox(vec({9.0, 8.0, 7.0, 6.0})));
}

TEST(LipschitzBounds, RejectsNegativeEntries) {
  rpc::LipschitzBounds b{-0.1, 0.0, 1.0};
  EXPECT_THROW(b.validate(), rpc::ConfigError);
  b = {0.0, -1.0, 1.0};
  EXPECT_THROW(b.validate(), rpc::ConfigError);
  b = {0.0, 1.0, -0.25};
  EXPECT_THROW(b.validate(), rpc::ConfigError);
  // All-zero bounds are legal: they express a locally constant model, and
  // the contraction-free (c = 0) paths handle them throughout.
  b = {0.0, 0.0, 0.0};
  EXPECT_NO_THROW(b.validate());
  b = {0.0, 3.0, 0.25};
  EXPECT_NO_THROW(b.validate());
}

TEST(ControlInput, AdmissibilityIsTheUnitBall) {
  EXPECT_TRUE(rpc::ControlInput(vec({0.6, 0.8})).admissible());
  EXPECT_FALSE(rpc::ControlInput(vec({0.8, 0.8})).admissible());
  EXPECT_TRUE(rpc::ControlInput::zero(2).admissible());
  EXPECT_EQ(rpc::ControlInput::zero(3).dim(), 3);
}

TEST(LocalModel, DerivesGuaranteedGainAndMargin) {
  const auto anchor = rpc::partition(vec({0.0, 2.0, 0.0, 0.0}), 2);
  Eigen::Matrix2d G = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  const rpc::LipschitzBounds bounds{0.0, 3.0, 0.25};
  const auto model =
      rpc::make_local_model(anchor, vec({0.3, 0.4}), G, vec({2.0, 0.0}), bounds);
  EXPECT_DOUBLE_EQ(model.b, 1.0);  // smallest singular value of diag(1,2)
  EXPECT_DOUBLE_EQ(model.c, 3.0);  // l_f + l_g
  EXPECT_DOUBLE_EQ(model.b_tilde, 1.0 - 0.5);
  EXPECT_TRUE(model.drift.isApprox(vec({0.3, 0.4})));
  EXPECT_TRUE(model.unactuated_drift.isApprox(vec({2.0, 0.0})));
}

TEST(LocalModel, RejectsZeroGain) {
  const auto anchor = rpc::partition(vec({0.0, 2.0, 0.0, 0.0}), 2);
  EXPECT_THROW(rpc::make_local_model(anchor, vec({0.0, 0.0}), Eigen::Matrix2d::Zero(),
                                     vec({2.0, 0.0}), {0.0, 3.0, 0.25}),
               rpc::ZeroMatrixError);
}

TEST(LocalModel, RejectsShapeMismatch) {
  const auto anchor = rpc::partition(vec({0.0, 2.0, 0.0, 0.0}), 2);
  EXPECT_THROW(rpc::make_local_model(anchor, vec({0.0}), Eigen::Matrix2d::Identity(),
                                     vec({2.0, 0.0}), {0.0, 3.0, 0.25}),
               rpc::DimensionMismatchError);
  EXPECT_THROW(rpc::make_local_model(anchor, vec({0.0, 0.0}), Eigen::Matrix2d::Identity(),
                                     vec({2.0}), {0.0, 3.0, 0.25}),
               rpc::DimensionMismatchError);
}

TEST(LocalModel, DriftCanDominateTheGain) {
  // b_tilde <= 0 is representable; consumers decide whether it is an error.
  const auto anchor = rpc::partition(vec({0.0, 2.0}), 2);
  const auto model = rpc::make_local_model(anchor, vec({3.0, 0.0}),
                                           Eigen::Matrix2d::Identity(), Eigen::VectorXd(),
                                           {0.0, 3.0, 0.25});
  EXPECT_LT(model.b_tilde, 0.0);
}
