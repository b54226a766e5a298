#include "radioslam/dynamics.hpp"
#include "radioslam/errors.hpp"
#include "radioslam/pcrb.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace radioslam;

namespace {

const UEState kStart{70.7285, 0.0, kPi / 2, 300.0};
const Mat4 kUeCov = Vec4(0.3, 0.3, 0.0052, 0.3).asDiagonal();

double min_eig(const Mat& m) {
    return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

TEST(PimInit, BlockDiagonalInverse) {
    const JointInfoMatrix j = pim_init(kUeCov, 100.0 * Mat3::Identity(), 8);
    ASSERT_EQ(j.info.rows(), 28);
    EXPECT_TRUE((j.info.topLeftCorner<4, 4>().isApprox(kUeCov.inverse())));
    for (int i = 0; i < 8; ++i)
        EXPECT_TRUE((j.info.block<3, 3>(JointInfoMatrix::landmark_offset(i), JointInfoMatrix::landmark_offset(i))
                         .isApprox(0.01 * Mat3::Identity())));
    EXPECT_DOUBLE_EQ(j.info.topRightCorner(4, 24).norm(), 0.0);
    EXPECT_EQ(pim_init(kUeCov, Mat3::Identity(), 0).info.rows(), 4);
    EXPECT_THROW(pim_init(Mat4::Zero(), Mat3::Identity(), 1), SingularPrior);
    EXPECT_THROW(pim_init(kUeCov, -Mat3::Identity(), 1), SingularPrior);
}

TEST(ExtractBounds, Identity) {
    const BoundsReport b = extract_bounds(JointInfoMatrix{Mat::Identity(7, 7)});
    EXPECT_NEAR(b.peb, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(b.heb, 1.0, 1e-15);
    EXPECT_NEAR(b.ceb, 1.0, 1e-15);
    ASSERT_EQ(b.leb.size(), 1u);
    EXPECT_NEAR(b.leb[0], std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(b.leb_avg, std::sqrt(3.0), 1e-15);
}

TEST(ExtractBounds, Diagonal) {
    Vec d(7);
    d << 4, 4, 1, 1, 1, 1, 1;
    const BoundsReport b = extract_bounds(JointInfoMatrix{d.asDiagonal()});
    EXPECT_NEAR(b.peb, std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(b.leb[0], std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(b.heb_deg(), 180.0 / kPi, 1e-12);
}

TEST(SpdInverse, ConditionGuard) {
    Mat m = Mat::Identity(3, 3);
    EXPECT_TRUE(spd_inverse(4.0 * m).isApprox(0.25 * m));
    m(2, 2) = 1e-14;
    EXPECT_THROW(spd_inverse(m), NumericalFailure);
}

TEST(PimStep, PriorOnlyRecursion) {
    Scenario s = Scenario::standard();
    s.landmarks.clear();
    const MotionConfig motion;
    SensorConfig sensor;
    JointInfoMatrix j = pim_init(kUeCov, Mat3::Identity(), 0);
    UEState prev = kStart;
    double last_peb = extract_bounds(j).peb;
    for (int k = 0; k < 10; ++k) {
        const UEState next = propagate(prev, motion);
        const Mat4 f = transition_jacobian(prev, motion);
        const Mat expected = (motion.process_noise + f * j.info.inverse() * f.transpose()).inverse();
        j = pim_step(j, prev, next, s, motion, sensor, {false});
        EXPECT_TRUE(j.info.isApprox(expected, 1e-12));
        const double peb = extract_bounds(j).peb;
        EXPECT_GE(peb, last_peb);
        last_peb = peb;
        prev = next;
    }
}

TEST(PimStep, HugeDopplerNoiseCarriesNoInformation) {
    const Scenario s = Scenario::standard();
    const MotionConfig motion;
    SensorConfig on, off;
    on.sigma_d = 1e6;
    off.with_doppler = false;
    const JointInfoMatrix j0 = pim_init(kUeCov, 100.0 * Mat3::Identity(), 8);
    const UEState next = propagate(kStart, motion);
    const Mat a = pim_step(j0, kStart, next, s, motion, on).info;
    const Mat b = pim_step(j0, kStart, next, s, motion, off).info;
    EXPECT_LT((a - b).norm() / a.norm(), 1e-9);
}

TEST(DataInformation, DopplerAddsPsdInformation) {
    const Scenario s = Scenario::standard();
    SensorConfig on, off;
    off.with_doppler = false;
    const auto traj = simulate_trajectory(kStart, MotionConfig{}, 40, false, 0);
    for (const auto& ue : traj) {
        const Mat diff = data_information(ue, s, 22.22, on) - data_information(ue, s, 22.22, off);
        EXPECT_GE(min_eig(diff), -1e-10);
    }
}

TEST(DataInformation, MisdetectionZeroesTheLandmarkBlock) {
    const Scenario s = Scenario::standard();
    std::vector<bool> detected(9, true);
    detected[3] = false;  // landmark index 2
    const Mat j = data_information(kStart, s, 22.22, SensorConfig{}, detected);
    const int off = JointInfoMatrix::landmark_offset(2);
    EXPECT_EQ(j.middleRows(off, 3).norm(), 0.0);
    EXPECT_EQ(j.middleCols(off, 3).norm(), 0.0);
    EXPECT_GT((j.block<3, 3>(off + 3, off + 3).norm()), 0.0);
}

TEST(PimStep, FewerDetectionsNeverHelp) {
    const Scenario s = Scenario::standard();
    const MotionConfig motion;
    const SensorConfig sensor;
    const auto traj = simulate_trajectory(kStart, motion, 40, false, 0);
    for (std::size_t drop = 0; drop < 9; ++drop) {
        std::vector<bool> detected(9, true);
        detected[drop] = false;
        JointInfoMatrix all = pim_init(kUeCov, 100.0 * Mat3::Identity(), 8), some = all;
        UEState prev = kStart;
        for (const auto& ue : traj) {
            all = pim_step(all, prev, ue, s, motion, sensor);
            some = pim_step(some, prev, ue, s, motion, sensor, detected);
            EXPECT_GE(extract_bounds(some).peb, extract_bounds(all).peb - 1e-12);
            prev = ue;
        }
    }
}

TEST(DopplerDecomposition, StructureAndSum) {
    const Scenario s = Scenario::standard();
    const SensorConfig sensor;
    const auto traj = simulate_trajectory(kStart, MotionConfig{}, 40, false, 0);
    for (const auto& ue : traj) {
        const DopplerDecomposition d = doppler_decomposition(ue, s, 22.22, sensor);
        const Mat j = data_information(ue, s, 22.22, sensor);
        const Mat4 ue_block = j.topLeftCorner<4, 4>();
        EXPECT_LE((d.ue_non_doppler + d.ue_doppler - ue_block).norm(), 1e-10 * ue_block.norm());
        EXPECT_EQ(d.ue_doppler.row(3).norm(), 0.0);
        EXPECT_EQ(d.ue_doppler.col(3).norm(), 0.0);
        ASSERT_EQ(d.ue_doppler_per_path.size(), 9u);
        Mat4 sum = Mat4::Zero();
        for (const auto& t : d.ue_doppler_per_path) {
            sum += t;
            Eigen::SelfAdjointEigenSolver<Mat4> eig(t);
            EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * std::max(1.0, t.norm()));
            EXPECT_LE((eig.eigenvalues().array() > 1e-9 * std::max(1.0, t.norm())).count(), 1);
        }
        EXPECT_LE((sum - d.ue_doppler).norm(), 1e-12 * std::max(1.0, sum.norm()));
        for (int i = 0; i < 8; ++i) {
            const int off = JointInfoMatrix::landmark_offset(i);
            const Mat3 blk = j.block<3, 3>(off, off);
            const Mat3& dop = d.lm_doppler[static_cast<std::size_t>(i)];
            EXPECT_LE((d.lm_non_doppler[static_cast<std::size_t>(i)] + dop - blk).norm(), 1e-10 * blk.norm());
            Eigen::SelfAdjointEigenSolver<Mat3> eig(dop);
            EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * std::max(1.0, dop.norm()));
            EXPECT_LE((eig.eigenvalues().array() > 1e-9 * std::max(1.0, dop.norm())).count(), 1);
        }
    }
}

TEST(DopplerDecomposition, VanishesWhenMovingAlongArrival) {
    // Planar scene: BS and an SP in the UE plane; UE drives straight at the BS.
    Scenario s;
    s.bs = Landmark{Vec3(0, 0, 0), LandmarkKind::BS};
    s.landmarks = {Landmark{Vec3(60, 80, 0), LandmarkKind::SP}};
    const UEState ue{-30, -40, std::atan2(40.0, 30.0), 0};
    const DopplerDecomposition d = doppler_decomposition(ue, s, 10.0, SensorConfig{});
    for (const auto& t : d.ue_doppler_per_path) EXPECT_LT(t.norm(), 1e-12);
    EXPECT_LT(d.lm_doppler[0].norm(), 1e-12);
}

BoundsSetup standard_setup() { return BoundsSetup{}; }

TEST(Sweep, ShapeAndMonotonicity) {
    const std::vector<double> grid{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    const auto table = sweep_sigma_d(standard_setup(), grid);
    ASSERT_EQ(table.size(), grid.size() + 1);
    const BoundsSeries& base = table.back();
    EXPECT_FALSE(base.doppler_enabled);
    for (auto how : {Aggregation::Final, Aggregation::Mean}) {
        const BoundsReport b = base.aggregate(how);
        BoundsReport prev{};
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const BoundsReport r = table[g].aggregate(how);
            EXPECT_LE(r.peb, b.peb);
            EXPECT_LE(r.heb, b.heb);
            EXPECT_LE(r.ceb, b.ceb);
            EXPECT_LE(r.leb_avg, b.leb_avg);
            EXPECT_GE(r.peb, prev.peb);
            EXPECT_GE(r.heb, prev.heb);
            EXPECT_GE(r.ceb, prev.ceb);
            EXPECT_GE(r.leb_avg, prev.leb_avg);
            prev = r;
        }
    }
    // Per step, too.
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t k = 0; k < base.steps.size(); ++k) {
            EXPECT_LE(table[g].steps[k].peb, base.steps[k].peb + 1e-12);
            EXPECT_LE(table[g].steps[k].heb, base.steps[k].heb + 1e-12);
            EXPECT_LE(table[g].steps[k].ceb, base.steps[k].ceb + 1e-12);
        }
    const double ratio = table[5].aggregate(Aggregation::Final).peb / base.aggregate(Aggregation::Final).peb;
    EXPECT_GT(ratio, 0.98);
}

TEST(Sweep, BaselineIndependentOfGrid) {
    const auto a = sweep_sigma_d(standard_setup(), {0.05});
    const auto b = sweep_sigma_d(standard_setup(), {0.5});
    EXPECT_EQ(a.back().aggregate(Aggregation::Final).peb, b.back().aggregate(Aggregation::Final).peb);
}

TEST(Sweep, CsvLayout) {
    BoundsSetup setup = standard_setup();
    setup.steps = 3;
    const auto table = sweep_sigma_d(setup, {0.05, 0.1, 0.2, 0.3, 0.4, 0.5});
    std::ostringstream os;
    write_bounds_csv(os, table);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line.rfind("sigma_d,doppler_enabled,k,PEB_m,HEB_rad,HEB_deg,CEB_m,LEB_avg_m,LEB_1_m", 0), 0u);
    int rows = 0, baseline = 0;
    while (std::getline(is, line)) {
        ++rows;
        if (line.find(",0,") != std::string::npos && line.rfind("nan", 0) == 0) ++baseline;
    }
    EXPECT_EQ(rows, 7 * 3);
    EXPECT_EQ(baseline, 3);
}

}  // namespace
