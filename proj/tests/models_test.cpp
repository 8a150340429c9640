#include "hybridloc/deployment.hpp"
#include "hybridloc/errors.hpp"
#include "hybridloc/models.hpp"

#include "testkit/oracles.hpp"
#include "testkit/properties.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hybridloc;

namespace {

const Anchor kBleOrigin{"b0", Vec2(0.0, 0.0), Tech::kBle};
const Anchor kUwbEast{"u1", Vec2(10.0, 0.0), Tech::kUwb};
const Anchor kUwbWest{"u0", Vec2(-10.0, 0.0), Tech::kUwb};

}  // namespace

TEST(DwnaTransition, ZeroDtIsIdentity) {
    EXPECT_EQ(dwna_transition(0.0), Mat4::Identity());
}

TEST(DwnaTransition, UnitStepMovesAlongVelocity) {
    const Vec4 next = dwna_transition(1.0) * Vec4(0, 0, 1, 0);
    EXPECT_DOUBLE_EQ(next(0), 1.0);
    EXPECT_DOUBLE_EQ(next(1), 0.0);
}

TEST(DwnaTransition, WalkingStep) {
    const Vec4 next = dwna_transition(0.1) * Vec4(2, 3, 1.4, 0);
    EXPECT_NEAR(next(0), 2.14, 1e-15);
    EXPECT_DOUBLE_EQ(next(1), 3.0);
}

TEST(DwnaTransition, RejectsNegativeOrNonFiniteDt) {
    EXPECT_THROW(dwna_transition(-0.1), InvalidArgument);
    EXPECT_THROW(dwna_transition(std::nan("")), InvalidArgument);
    EXPECT_THROW(dwna_process_noise(-1.0, DwnaParams{}), InvalidArgument);
}

TEST(DwnaProcessNoise, ZeroDtIsZero) {
    EXPECT_EQ(dwna_process_noise(0.0, DwnaParams{2.0}), Mat4::Zero());
}

TEST(DwnaProcessNoise, TenthSecondEntries) {
    const Mat4 q = dwna_process_noise(0.1, DwnaParams{1.0});
    for (int axis = 0; axis < 2; ++axis) {
        EXPECT_DOUBLE_EQ(q(axis, axis), 2.5e-5);
        EXPECT_DOUBLE_EQ(q(axis, axis + 2), 5e-4);
        EXPECT_DOUBLE_EQ(q(axis + 2, axis), 5e-4);
        EXPECT_DOUBLE_EQ(q(axis + 2, axis + 2), 1e-2);
    }
    // no x-y coupling
    EXPECT_EQ(q(0, 1), 0.0);
    EXPECT_EQ(q(0, 3), 0.0);
    EXPECT_EQ(q(2, 3), 0.0);
}

TEST(DwnaProcessNoise, SymmetricAndPsdOverDtRange) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dt_dist(0.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        const Mat4 q = dwna_process_noise(dt_dist(rng), DwnaParams{1.0});
        ASSERT_EQ(q, q.transpose());
        const double min_eig = Eigen::SelfAdjointEigenSolver<Mat4>(q).eigenvalues().minCoeff();
        ASSERT_GE(min_eig, -1e-12);
    }
}

// Q is rank 2, so the solver's zero eigenvalues carry roundoff proportional to ||Q||.
TEST(DwnaProcessNoise, PsdRelativeToScale) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dt_dist(0.0, 10.0);
    std::uniform_real_distribution<double> sigma_dist(0.0, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const Mat4 q = dwna_process_noise(dt_dist(rng), DwnaParams{sigma_dist(rng)});
        ASSERT_EQ(q, q.transpose());
        const double min_eig = Eigen::SelfAdjointEigenSolver<Mat4>(q).eigenvalues().minCoeff();
        ASSERT_GE(min_eig, -1e-15 * std::max(1.0, q.norm()));
    }
}

TEST(RssPredict, ReferenceDistanceGivesRss0) {
    const PathLossParams pl{-40.0, 1.0, 1.9};
    EXPECT_EQ(rss_predict(Vec2(1.0, 0.0), kBleOrigin, pl), -40.0);
}

TEST(RssPredict, SimulationAndExperimentParameters) {
    EXPECT_NEAR(rss_predict(Vec2(10.0, 0.0), kBleOrigin, PathLossParams{-40.0, 1.0, 1.9}), -59.0, 1e-12);
    // -38 - 33 log10(2)
    EXPECT_NEAR(rss_predict(Vec2(0.0, 2.0), kBleOrigin, PathLossParams{-38.0, 1.0, 3.3}), -47.93398985691138, 1e-12);
}

TEST(RssPredict, StrictlyDecreasingInDistance) {
    const PathLossParams pl{-40.0, 1.0, 1.9};
    double previous = rss_predict(Vec2(0.01, 0.0), kBleOrigin, pl);
    for (double d = 0.02; d < 50.0; d *= 1.3) {
        const double value = rss_predict(Vec2(d, 0.0), kBleOrigin, pl);
        EXPECT_LT(value, previous);
        previous = value;
    }
}

TEST(RssPredict, CoincidentPositionIsDegenerate) {
    const PathLossParams pl;
    EXPECT_THROW(rss_predict(Vec2(0.0, 0.0), kBleOrigin, pl), DegenerateGeometry);
    EXPECT_THROW(rss_jacobian_row(Vec2(1e-8, 0.0), kBleOrigin, pl), DegenerateGeometry);
    // The filter loop clamps instead.
    EXPECT_TRUE(std::isfinite(rss_predict(Vec2(0.0, 0.0), kBleOrigin, pl, DegeneratePolicy::kClamp)));
    EXPECT_TRUE(rss_jacobian_row(Vec2(0.0, 0.0), kBleOrigin, pl, DegeneratePolicy::kClamp).allFinite());
}

TEST(RssJacobian, AxisExample) {
    const RowVec4 row = rss_jacobian_row(Vec2(10.0, 0.0), kBleOrigin, PathLossParams{-40.0, 1.0, 1.9});
    // central-difference oracle: -0.8251595...
    const RowVec4 fd = testkit::central_difference(
        [](const Vec2& p) { return rss_predict(p, kBleOrigin, PathLossParams{-40.0, 1.0, 1.9}); }, Vec2(10.0, 0.0));
    EXPECT_NEAR(row(0), -0.8251595156161784, 1e-12);
    EXPECT_NEAR(row(0), fd(0), 1e-8);
    EXPECT_EQ(row(1), 0.0);
    EXPECT_EQ(row(2), 0.0);
    EXPECT_EQ(row(3), 0.0);
}

TEST(RssJacobian, MirrorAntisymmetry) {
    const Anchor anchor{"b", Vec2(3.0, 0.0), Tech::kBle};
    const PathLossParams pl;
    const RowVec4 right = rss_jacobian_row(Vec2(4.5, 2.0), anchor, pl);
    const RowVec4 left = rss_jacobian_row(Vec2(1.5, 2.0), anchor, pl);
    EXPECT_NEAR(right(0), -left(0), 1e-15);
    EXPECT_NEAR(right(1), left(1), 1e-15);
}

TEST(TdoaPredict, Examples) {
    EXPECT_EQ(tdoa_predict(Vec2(0.0, 0.0), kUwbEast, kUwbWest), 0.0);
    EXPECT_EQ(tdoa_predict(Vec2(0.0, 7.0), kUwbEast, kUwbWest), 0.0);
    EXPECT_DOUBLE_EQ(tdoa_predict(Vec2(5.0, 0.0), kUwbEast, kUwbWest), -10.0);
}

TEST(TdoaPredict, RejectsBadPairs) {
    EXPECT_THROW(tdoa_predict(Vec2(1.0, 1.0), kUwbEast, kUwbEast), InvalidArgument);
    const Anchor ble{"b", Vec2(0.0, 5.0), Tech::kBle};
    EXPECT_THROW(tdoa_predict(Vec2(1.0, 1.0), ble, kUwbWest), InvalidArgument);
}

TEST(TdoaPredict, BoundedByBaseline) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
        const Anchor m{"m", Vec2(u(rng), u(rng)), Tech::kUwb};
        const Anchor r{"r", Vec2(u(rng), u(rng)), Tech::kUwb};
        const double baseline = (m.position - r.position).norm();
        ASSERT_LE(std::abs(tdoa_predict(Vec2(u(rng), u(rng)), m, r)), baseline + 1e-12);
    }
}

TEST(TdoaJacobian, MidpointExample) {
    const RowVec4 row = tdoa_jacobian_row(Vec2(0.0, 0.0), kUwbEast, kUwbWest);
    const RowVec4 fd = testkit::central_difference(
        [](const Vec2& p) { return tdoa_predict(p, kUwbEast, kUwbWest); }, Vec2(0.0, 0.0));
    EXPECT_NEAR(row(0), -2.0, 1e-15);
    EXPECT_NEAR(fd(0), -2.0, 1e-8);
    EXPECT_EQ(row(1), 0.0);
    EXPECT_EQ(row(2), 0.0);
    EXPECT_EQ(row(3), 0.0);
}

TEST(TdoaJacobian, VanishesFarAlongBisector) {
    double previous = 2.0;
    for (double range : {10.0, 100.0, 1000.0, 10000.0}) {
        const double gx = std::abs(tdoa_jacobian_row(Vec2(0.0, range), kUwbEast, kUwbWest)(0));
        EXPECT_LT(gx, previous);
        EXPECT_NEAR(gx, 2.0 * 10.0 / std::hypot(10.0, range), 1e-12);
        previous = gx;
    }
}

TEST(TdoaJacobian, DegenerateAtAnchor) {
    EXPECT_THROW(tdoa_jacobian_row(Vec2(10.0, 0.0), kUwbEast, kUwbWest), DegenerateGeometry);
}

TEST(ModelProperties, JacobiansMatchFiniteDifferences) {
    const auto report = testkit::jacobian_agreement(2024, 1000);
    EXPECT_EQ(report.cases, 1000);
    EXPECT_LT(report.worst_rss_rel, 1e-5);
    EXPECT_LT(report.worst_tdoa_rel, 1e-5);
}

TEST(Deployment, LookupAndReference) {
    const Deployment d({{"uwb2", Vec2(1, 0), Tech::kUwb}, {"ble", Vec2(0, 0), Tech::kBle},
                        {"uwb1", Vec2(2, 0), Tech::kUwb}});
    EXPECT_EQ(d.at("ble").tech, Tech::kBle);
    EXPECT_THROW(d.at("nope"), LookupError);
    ASSERT_TRUE(d.tdoa_reference());
    EXPECT_EQ(d.tdoa_reference()->id, "uwb1");
    EXPECT_EQ(d.of_tech(Tech::kUwb).size(), 2u);
}

TEST(Deployment, RejectsDuplicateIds) {
    EXPECT_THROW(Deployment({{"a", Vec2(0, 0), Tech::kBle}, {"a", Vec2(1, 0), Tech::kUwb}}), InvalidArgument);
}

TEST(Constants, TimeNoiseInMeters) {
    EXPECT_NEAR(kSpeedOfLight * 0.2e-9, 0.0599584916, 1e-12);
}
