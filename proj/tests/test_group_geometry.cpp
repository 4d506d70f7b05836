#include <gtest/gtest.h>

#include "equizeta/testing/oracles.hpp"
#include "equizeta/testing/selftest.hpp"

using namespace equizeta;

namespace {

Eigen::Matrix3d rot3(double t) { return block_rotation(3, {t}); }

}  // namespace

TEST(AxisAndKernel, Examples) {
  KernelInfo k = axis_and_kernel(rot3(two_pi / 3));
  EXPECT_EQ(k.kernel_dim, 1);
  ASSERT_TRUE(k.axis.has_value());
  EXPECT_NEAR((*k.axis - Eigen::Vector3d(0, 0, 1)).norm(), 0.0, 1e-12);

  KernelInfo id = axis_and_kernel(Eigen::Matrix3d::Identity());
  EXPECT_EQ(id.kernel_dim, 3);
  EXPECT_FALSE(id.axis.has_value());

  KernelInfo s4 = axis_and_kernel(block_rotation(4, {1.0, std::numbers::sqrt2}));
  EXPECT_EQ(s4.kernel_dim, 0);
  EXPECT_FALSE(s4.axis.has_value());
}

TEST(AxisAndKernel, NearlyDegenerateRotationIsRejected) {
  EXPECT_THROW(axis_and_kernel(rot3(1e-9)), Error);
}

TEST(SolveTransverse, Examples) {
  AxisRotation half = AxisRotation::planar(3, pi);
  EXPECT_NEAR(solve_transverse(half, Eigen::Vector3d::Zero()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((solve_transverse(half, Eigen::Vector3d(2, 0, 0)) - Eigen::Vector3d(1, 0, 0)).norm(), 0.0, 1e-14);

  AxisRotation third = AxisRotation::planar(3, two_pi / 3);
  Eigen::Vector3d wp(1, 0, 0);
  VectorXd w = solve_transverse(third, wp);
  EXPECT_NEAR(w(2), 0.0, 1e-15);
  EXPECT_NEAR(((Eigen::Matrix3d::Identity() - third.matrix) * w - wp).norm(), 0.0, 1e-14);
  EXPECT_THROW(solve_transverse(third, Eigen::Vector3d(0, 0, 1)), Error);
}

TEST(FixedCondition, Examples) {
  AxisRotation r = AxisRotation::planar(3, two_pi / 3);
  const VectorXd& v0 = r.v0();
  const double l = 1.7;
  EXPECT_TRUE(euclidean_fixed_condition({l * v0, r.matrix}, l, Eigen::Vector3d::Zero(), v0));
  EXPECT_FALSE(euclidean_fixed_condition({l * v0, r.matrix}, l, Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, 0)));

  Eigen::Vector3d wp(0.4, -1.1, 0.0);
  EuclideanMotion g{l * v0 + wp, r.matrix};
  // the transverse part of x solves (I - r) x = w'
  EXPECT_TRUE(euclidean_fixed_condition(g, l, solve_transverse(r, wp), v0));
  EXPECT_FALSE(euclidean_fixed_condition(g, l, solve_transverse(r, -wp), v0));
  EXPECT_FALSE(euclidean_fixed_condition(g, l + 0.1, solve_transverse(r, wp), v0));
}

TEST(PoincareDeterminant, Examples) {
  for (auto [theta, want] : {std::pair{two_pi / 3, 9.0}, std::pair{pi, 16.0}, std::pair{pi / 2, 4.0}}) {
    for (double l : {0.5, 1.0, 7.0}) {
      PoincareData pd = poincare_determinant_euclidean(AxisRotation::planar(3, theta), l);
      EXPECT_EQ(pd.det_sign, 1);
      EXPECT_NEAR(pd.det_abs, want, 1e-12);
      EXPECT_NEAR(pd.det_restricted_squared, want, 1e-12);
    }
  }
}

TEST(SignedWedgeTrace, Examples) {
  EXPECT_NEAR(std::abs(signed_wedge_trace(MatrixXd::Identity(1, 1)) - cplx(-1.0)), 0.0, 1e-14);
  MatrixXd d2 = Eigen::Vector2d(1, 2).asDiagonal();
  EXPECT_NEAR(oracle::signed_wedge_trace_brute(d2), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(signed_wedge_trace(d2) - cplx(1.0)), 0.0, 1e-12);
  MatrixXd d3 = Eigen::Vector3d(1, 3, 0.5).asDiagonal();
  EXPECT_NEAR(oracle::signed_wedge_trace_brute(d3), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(signed_wedge_trace(d3) - cplx(1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(quotient_determinant(d3) - cplx(1.0)), 0.0, 1e-12);
}

TEST(SignedWedgeTrace, RequiresSimpleUnitEigenvalue) {
  EXPECT_THROW(signed_wedge_trace(Eigen::Matrix2d::Identity()), Error);
  MatrixXd d = Eigen::Vector2d(2, 3).asDiagonal();
  EXPECT_THROW(signed_wedge_trace(d), Error);
}

TEST(ReturnMaps, SpherePoincareSignsArePositive) {
  for (double l : {1.0, -1.0, 1.0 + two_pi, std::numbers::sqrt2}) {
    EXPECT_EQ(poincare_sign(adjoint_return_so3(l)), 1);
    EXPECT_EQ(poincare_sign(adjoint_return_so4_quotient(l)), 1);
  }
}

TEST(SphereClassifier, Examples) {
  const double t1 = 1.0, t2 = std::numbers::sqrt2;
  auto c1 = sphere_fixed_classifier(Eigen::Matrix4d::Identity(), t1, t2, t1);
  ASSERT_TRUE(std::holds_alternative<SphereType1>(c1));
  const auto& ty1 = std::get<SphereType1>(c1);
  EXPECT_EQ(ty1.eps, 1);
  EXPECT_TRUE(ty1.a.isApprox(Eigen::Matrix2d::Identity()));
  EXPECT_TRUE(ty1.d.isApprox(Eigen::Matrix2d::Identity()));

  // block antidiagonal with identity blocks: determinant +1
  Eigen::Matrix4d anti = Eigen::Matrix4d::Zero();
  anti.topRightCorner<2, 2>().setIdentity();
  anti.bottomLeftCorner<2, 2>().setIdentity();
  auto c2 = sphere_fixed_classifier(anti, t1, t2, t2);
  ASSERT_TRUE(std::holds_alternative<SphereType2>(c2));
  EXPECT_EQ(std::get<SphereType2>(c2).eps, 1);

  // mixed reflections in the two blocks leave SO(4)
  Eigen::Matrix4d mixed = Eigen::Matrix4d::Zero();
  mixed.topRightCorner<2, 2>() = reflection_w(1);
  mixed.bottomLeftCorner<2, 2>() = reflection_w(-1);
  EXPECT_THROW(sphere_fixed_classifier(mixed, t1, t2, t2), Error);

  std::mt19937_64 rng(7);
  auto c3 = sphere_fixed_classifier(oracle::random_rotation(4, rng), t1, t2, t1);
  EXPECT_TRUE(std::holds_alternative<NotPeriodic>(c3));

  // reflected conjugator picks up l = -theta1
  Eigen::Matrix4d refl = Eigen::Matrix4d::Zero();
  refl.topLeftCorner<2, 2>() = reflection_w(-1);
  refl.bottomRightCorner<2, 2>() = reflection_w(-1);
  auto c4 = sphere_fixed_classifier(refl, t1, t2, -t1 + two_pi);
  ASSERT_TRUE(std::holds_alternative<SphereType1>(c4));
  EXPECT_EQ(std::get<SphereType1>(c4).eps, -1);
}

TEST(Oracle, ExteriorPowerOfDiagonal) {
  MatrixXd d = Eigen::Vector3d(2, 3, 5).asDiagonal();
  EXPECT_NEAR(oracle::exterior_power(d, 2).trace(), 2 * 3 + 2 * 5 + 3 * 5, 1e-12);
  EXPECT_NEAR(oracle::exterior_power(d, 3)(0, 0), 30.0, 1e-12);
}

class GroupGeometrySuites : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GroupGeometrySuites, InvariantsHold) {
  for (const auto& [name, suite] : selftest::all_suites()) {
    if (name.rfind("group_geometry.", 0) != 0) continue;
    auto r = selftest::run_suite(name, suite, GetParam());
    EXPECT_TRUE(r.passed) << name << ": " << r.failure;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GroupGeometrySuites, ::testing::Values(1u, 2u, 3u));
