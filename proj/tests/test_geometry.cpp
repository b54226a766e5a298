#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace radioslam;

namespace {

const Vec3 kBs(0, 0, 40);

TEST(IncidencePoint, ScatterPointIsItself) {
    const Landmark sp{Vec3(99, 0, 10), LandmarkKind::SP};
    for (const Vec3 ue : {Vec3(0, 0, 0), Vec3(-50, 20, 0), Vec3(123, -7, 0)})
        EXPECT_EQ(incidence_point(sp, kBs, ue), sp.position);
}

TEST(IncidencePoint, VirtualAnchorOnAxis) {
    const Landmark va{Vec3(200, 0, 40), LandmarkKind::VA};
    const Vec3 ue(70.7285, 0, 0);
    const Vec3 p = incidence_point(va, kBs, ue);
    // Bisecting plane x = 100; line UE -> VA crosses it at this fraction.
    const double t = (100 - 70.7285) / (200 - 70.7285);
    EXPECT_NEAR(p.x(), 100.0, 1e-12);
    EXPECT_NEAR(p.y(), 0.0, 1e-12);
    EXPECT_NEAR(p.z(), 40.0 * t, 1e-12);
    EXPECT_NEAR(p.z(), 9.0573, 1e-4);
    // Mirror symmetry: the incidence point is equidistant from BS and VA.
    EXPECT_NEAR((p - kBs).norm(), (p - va.position).norm(), 1e-9);
}

TEST(IncidencePoint, LiesOnBisectingPlane) {
    const Landmark va{Vec3(200, 0, 40), LandmarkKind::VA};
    EXPECT_NEAR(incidence_point(va, kBs, Vec3(100, 50, 0)).x(), 100.0, 1e-12);
}

TEST(IncidencePoint, Errors) {
    EXPECT_THROW(incidence_point(Landmark{kBs, LandmarkKind::BS}, kBs, Vec3(1, 2, 0)), InvalidKind);
    const Landmark va{Vec3(200, 0, 40), LandmarkKind::VA};
    EXPECT_THROW(incidence_point(va, kBs, va.position), DegenerateGeometry);
}

TEST(IncidencePoint, PathLengthAndReflectionLaw) {
    const Scenario s = Scenario::standard();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        // Inside the walls: the reflection is only physical on the BS side.
        const Vec3 ue = test_util::random_pose(rng, s, 95.0).position3d();
        for (const auto& lm : s.landmarks) {
            if (lm.kind != LandmarkKind::VA) continue;
            const Vec3 p = incidence_point(lm, s.bs.position, ue);
            const double direct = (lm.position - ue).norm();
            EXPECT_LT(std::abs((p - ue).norm() + (p - s.bs.position).norm() - direct), 1e-9 * direct);
            const Vec3 n = (lm.position - s.bs.position).normalized();
            const double cos_in = std::abs((ue - p).normalized().dot(n));
            const double cos_out = std::abs((s.bs.position - p).normalized().dot(n));
            EXPECT_LT(std::abs(cos_in - cos_out), 1e-9);
        }
    }
}

TEST(Measure, HeadOnApproach) {
    const Landmark bs{Vec3::Zero(), LandmarkKind::BS};
    const Measurement z = measure(bs, bs.position, UEState{10, 0, kPi, 0}, 1.0);
    EXPECT_NEAR(z.range, 10.0, 1e-12);
    EXPECT_NEAR(z.aoa_az, 0.0, 1e-12);
    EXPECT_NEAR(z.aoa_el, 0.0, 1e-12);
    EXPECT_NEAR(z.aod_az, 0.0, 1e-12);
    EXPECT_NEAR(z.aod_el, 0.0, 1e-12);
    ASSERT_TRUE(z.doppler);
    EXPECT_NEAR(*z.doppler, 1.0, 1e-12);
}

TEST(Measure, MovingAwayIsNegative) {
    const Landmark bs{Vec3::Zero(), LandmarkKind::BS};
    EXPECT_NEAR(*measure(bs, bs.position, UEState{10, 0, 0, 0}, 1.0).doppler, -1.0, 1e-12);
}

TEST(Measure, StandardStartPose) {
    const Landmark bs{kBs, LandmarkKind::BS};
    const Measurement z = measure(bs, kBs, UEState{70.7285, 0, kPi / 2, 300}, 22.22);
    EXPECT_NEAR(z.range, std::hypot(70.7285, 40.0) + 300.0, 1e-9);
    EXPECT_NEAR(z.range, 381.256, 1e-3);
    EXPECT_NEAR(*z.doppler, 0.0, 1e-12);
}

TEST(Measure, WithoutDoppler) {
    const Landmark bs{kBs, LandmarkKind::BS};
    const Measurement z = measure(bs, kBs, UEState{10, 3, 0, 0}, 5.0, false);
    EXPECT_FALSE(z.doppler);
    EXPECT_EQ(z.dim(), 5);
    EXPECT_EQ(z.vec().size(), 5);
}

TEST(Measure, DopplerBoundedBySpeed) {
    const Scenario s = Scenario::standard();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const UEState ue = test_util::random_pose(rng, s);
        for (const auto& lm : s.landmarks)
            EXPECT_LE(std::abs(*measure(lm, s.bs.position, ue, 22.22).doppler), 22.22 + 1e-12);
    }
}

TEST(Measure, DopplerEqualsSpeedWhenAligned) {
    // Planar: UE heading straight at a scatter point in its own plane.
    const Landmark sp{Vec3(50, 50, 0), LandmarkKind::SP};
    const UEState ue{0, 0, kPi / 4, 0};
    EXPECT_NEAR(*measure(sp, Vec3(0, 100, 0), ue, 3.0).doppler, 3.0, 1e-12);
    EXPECT_NEAR(*measure(sp, Vec3(0, 100, 0), UEState{0, 0, -3 * kPi / 4, 0}, 3.0).doppler, -3.0, 1e-12);
}

TEST(Measure, HeadingOnlyShiftsAoaAzimuth) {
    const Scenario s = Scenario::standard();
    const UEState ue{30, -20, 0.3, 100};
    UEState turned = ue;
    turned.heading += 0.25;
    for (const auto& lm : s.landmarks) {
        const Measurement a = measure(lm, s.bs.position, ue, 22.22);
        const Measurement b = measure(lm, s.bs.position, turned, 22.22);
        EXPECT_NEAR(wrap_angle(b.aoa_az - a.aoa_az), -0.25, 1e-12);
        EXPECT_NEAR(b.range, a.range, 1e-12);
        EXPECT_NEAR(b.aoa_el, a.aoa_el, 1e-12);
        EXPECT_NEAR(b.aod_az, a.aod_az, 1e-12);
        EXPECT_NEAR(b.aod_el, a.aod_el, 1e-12);
    }
}

Measurement along_y(double range) {
    Measurement z;
    z.range = range;
    z.aoa_az = kPi / 2;  // UE heading 0 -> global +y
    return z;
}

TEST(BirthPosition, SingleLegForVa) {
    const Vec3 p = birth_position(along_y(20), UEState{10, 0, 0, 0}, Vec3::Zero(), LandmarkKind::VA);
    EXPECT_NEAR((p - Vec3(10, 20, 0)).norm(), 0.0, 1e-12);
}

TEST(BirthPosition, EllipseForSp) {
    const Vec3 p = birth_position(along_y(20), UEState{10, 0, 0, 0}, Vec3::Zero(), LandmarkKind::SP);
    EXPECT_NEAR((p - Vec3(10, 7.5, 0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(7.5 + p.norm(), 20.0, 1e-12);
}

TEST(BirthPosition, InfeasibleSp) {
    EXPECT_THROW(birth_position(along_y(5), UEState{10, 0, 0, 0}, Vec3::Zero(), LandmarkKind::SP),
                 InfeasibleBirth);
    EXPECT_THROW(birth_position(along_y(5), UEState{10, 0, 0, 0}, Vec3::Zero(), LandmarkKind::BS), InvalidKind);
}

TEST(BirthPosition, RoundTripStandardScenario) {
    const Scenario s = Scenario::standard();
    std::mt19937_64 rng(3);
    std::vector<UEState> poses{UEState{70.7285, 0, kPi / 2, 300}};
    for (int i = 0; i < 100; ++i) poses.push_back(test_util::random_pose(rng, s, 95.0));
    for (const auto& ue : poses)
        for (const auto& lm : s.landmarks) {
            const Vec3 p = birth_position(measure(lm, s.bs.position, ue, 22.22), ue, s.bs.position, lm.kind);
            EXPECT_LT((p - lm.position).norm(), 1e-6);
        }
}

TEST(Scenario, StandardLayout) {
    const Scenario s = Scenario::standard();
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.bs.position, kBs);
    ASSERT_EQ(s.landmarks.size(), 8u);
    int va = 0, sp = 0;
    for (const auto& lm : s.landmarks) {
        if (lm.kind == LandmarkKind::VA) {
            ++va;
            EXPECT_DOUBLE_EQ(lm.position.head<2>().norm(), 200.0);
            EXPECT_DOUBLE_EQ(lm.position.z(), 40.0);
        } else {
            ++sp;
            EXPECT_DOUBLE_EQ(lm.position.head<2>().norm(), 99.0);
            EXPECT_DOUBLE_EQ(lm.position.z(), 10.0);
        }
    }
    EXPECT_EQ(va, 4);
    EXPECT_EQ(sp, 4);
}

TEST(Scenario, RejectsDuplicates) {
    Scenario s = Scenario::standard();
    s.landmarks.push_back(s.landmarks.front());
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Types, WrapAngleAndInnovation) {
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
    EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-15);
    Vec z = Vec::Zero(6), zhat = Vec::Zero(6);
    z(kAoaAzIndex) = kPi - 0.1;
    zhat(kAoaAzIndex) = -kPi + 0.1;
    z(kAoaAzIndex + 1) = 1.0;
    const Vec nu = innovation(z, zhat);
    EXPECT_NEAR(nu(kAoaAzIndex), -0.2, 1e-12);
    EXPECT_DOUBLE_EQ(nu(kAoaAzIndex + 1), 1.0);
    EXPECT_EQ(kind_from_string(to_string(LandmarkKind::VA)), LandmarkKind::VA);
    EXPECT_THROW(kind_from_string("wall"), std::invalid_argument);
}

}  // namespace
