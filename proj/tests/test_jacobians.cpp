#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"
#include "radioslam/jacobians.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace radioslam;

namespace {

// Independent central-difference Jacobian of the measurement w.r.t. UE state.
MeasJacobianUE numeric_ue(const Landmark& lm, const Vec3& bs, const UEState& ue, double speed) {
    MeasJacobianUE j;
    const double h = 1e-6;
    for (int c = 0; c < 4; ++c) {
        Vec4 p = ue.vec(), m = ue.vec();
        p(c) += h;
        m(c) -= h;
        const Vec zp = measure(lm, bs, UEState{p(0), p(1), p(2), p(3)}, speed).vec();
        const Vec zm = measure(lm, bs, UEState{m(0), m(1), m(2), m(3)}, speed).vec();
        j.col(c) = innovation(zp, zm) / (2 * h);
    }
    return j;
}

TEST(Jacobians, DopplerRowMatchesFiniteDifferences) {
    const Landmark bs{Vec3::Zero(), LandmarkKind::BS};
    const UEState ue{10, 0, 0, 0};
    const MeasJacobianUE an = meas_jacobian_ue(bs, bs.position, ue, 1.0);
    const MeasJacobianUE fd = numeric_ue(bs, bs.position, ue, 1.0);
    EXPECT_LT((an.row(kDopplerIndex) - fd.row(kDopplerIndex)).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LT(fd_check(bs, bs.position, ue, 1.0), 1e-5);
}

TEST(Jacobians, BiasColumnIsExact) {
    const Scenario s = Scenario::standard();
    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const UEState ue = test_util::random_pose(rng, s);
        for (const auto& lm : s.landmarks) {
            const MeasJacobianUE j = meas_jacobian_ue(lm, s.bs.position, ue, 22.22);
            EXPECT_EQ(j(kDopplerIndex, 3), 0.0);
            EXPECT_EQ(j(0, 3), 1.0);
            for (int r = 1; r < 5; ++r) EXPECT_EQ(j(r, 3), 0.0);
        }
    }
}

TEST(Jacobians, DopplerRowVanishesWhenVelocityAlongArrival) {
    // Planar scene (everything at z = 0); UE heads straight at the BS.
    const Landmark bs{Vec3(0, 0, 0), LandmarkKind::BS};
    const UEState ue{-30, -40, std::atan2(40.0, 30.0), 0};
    const MeasJacobianUE j = meas_jacobian_ue(bs, bs.position, ue, 7.0);
    EXPECT_LT(j.row(kDopplerIndex).norm(), 1e-12);
    const Landmark sp{Vec3(60, 80, 0), LandmarkKind::SP};
    const MeasJacobians both = meas_jacobians(sp, bs.position, ue, 7.0);
    EXPECT_LT(both.ue.row(kDopplerIndex).norm(), 1e-12);
    EXPECT_LT(both.lm.row(kDopplerIndex).norm(), 1e-12);
}

TEST(Jacobians, ScatterPointLandmarkDopplerRow) {
    const Landmark sp{Vec3(99, 0, 10), LandmarkKind::SP};
    const Vec3 bs(0, 0, 40);
    const UEState ue{20, 35, 0.7, 10};
    const double v = 22.22;
    const Vec3 vel = ue_velocity(ue.heading, v);
    const Vec3 diff = sp.position - ue.position3d();
    const Vec3 q = diff.normalized();
    const double d = vel.dot(q);
    const Vec3 expected = (vel - d * q) / diff.norm();
    const MeasJacobianLM j = meas_jacobian_lm(sp, bs, ue, v);
    EXPECT_LT((j.row(kDopplerIndex).transpose() - expected).norm(), 1e-12);
}

TEST(Jacobians, VirtualAnchorPerpendicularVelocity) {
    // With v perpendicular to q (d = 0) the landmark Doppler row is the
    // incidence-point derivative applied to v over the arrival distance.
    const Landmark va{Vec3(200, 0, 40), LandmarkKind::VA};
    const Vec3 bs(0, 0, 40);
    const UEState ue{70.7285, 0, kPi / 2, 300};
    const double v = 22.22;
    const IncidenceGeometry g = incidence_geometry(va, bs, ue.position3d());
    const Vec3 vel = ue_velocity(ue.heading, v);
    ASSERT_NEAR(vel.dot((g.point - ue.position3d()).normalized()), 0.0, 1e-12);
    const Vec3 expected = g.d_landmark.transpose() * vel / (g.point - ue.position3d()).norm();
    const MeasJacobianLM j = meas_jacobian_lm(va, bs, ue, v);
    EXPECT_LT((j.row(kDopplerIndex).transpose() - expected).norm(), 1e-12);
}

TEST(Jacobians, VirtualAnchorFarSideMatchesFd) {
    // UE on the side of the reflecting plane opposite the BS is still
    // differentiable; the oracle just has to agree.
    const Landmark va{Vec3(200, 0, 40), LandmarkKind::VA};
    EXPECT_LT(fd_check(va, Vec3(0, 0, 40), UEState{60, -30, 2.0, 50}, 22.22), 1e-5);
}

TEST(Jacobians, ZeroVelocity) {
    const Scenario s = Scenario::standard();
    const UEState ue{10, 20, 1.0, 0};
    for (const auto& lm : s.landmarks) {
        const MeasJacobians j = meas_jacobians(lm, s.bs.position, ue, 0.0);
        EXPECT_EQ(j.ue.row(kDopplerIndex).norm(), 0.0);
        EXPECT_EQ(j.lm.row(kDopplerIndex).norm(), 0.0);
        EXPECT_LT(fd_check(lm, s.bs.position, ue, 0.0), 1e-5);
    }
}

TEST(Jacobians, HeadingAffectsOnlyAoaAzimuthAndDoppler) {
    const Scenario s = Scenario::standard();
    const UEState ue{-40, 25, -1.1, 80};
    for (const auto& lm : s.landmarks) {
        const MeasJacobianUE j = meas_jacobian_ue(lm, s.bs.position, ue, 22.22);
        EXPECT_EQ(j(kAoaAzIndex, 2), -1.0);
        EXPECT_EQ(j(0, 2), 0.0);
        EXPECT_EQ(j(2, 2), 0.0);
        EXPECT_EQ(j(3, 2), 0.0);
        EXPECT_EQ(j(4, 2), 0.0);
    }
}

TEST(Jacobians, BsHasNoLandmarkBlock) {
    const Landmark bs{Vec3(0, 0, 40), LandmarkKind::BS};
    EXPECT_THROW(meas_jacobian_lm(bs, bs.position, UEState{1, 2, 0, 0}, 1.0), InvalidKind);
    EXPECT_TRUE(meas_jacobians(bs, bs.position, UEState{1, 2, 0, 0}, 1.0).lm.isZero());
}

TEST(Jacobians, RandomPosesAgainstFiniteDifferences) {
    const Scenario s = Scenario::standard();
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const UEState ue = test_util::random_pose(rng, s);
        worst = std::max(worst, fd_check(s.bs, s.bs.position, ue, 22.22));
        for (const auto& lm : s.landmarks) worst = std::max(worst, fd_check(lm, s.bs.position, ue, 22.22));
    }
    EXPECT_LT(worst, 1e-5);
}

}  // namespace
