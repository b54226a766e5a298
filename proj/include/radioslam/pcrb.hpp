#pragma once

#include "radioslam/dynamics.hpp"
#include "radioslam/sensing.hpp"
#include "radioslam/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace radioslam {

/// Posterior information matrix over (x, y, heading, bias, landmark_1, ...,
/// landmark_I). Landmark i (0-based) occupies rows 4 + 3i .. 6 + 3i.
struct JointInfoMatrix {
    Mat info;

    int num_landmarks() const { return static_cast<int>((info.rows() - 4) / 3); }
    static int landmark_offset(int i) { return 4 + 3 * i; }
};

struct BoundsReport {
    double peb = 0.0;      // m
    double heb = 0.0;      // rad
    double ceb = 0.0;      // m
    std::vector<double> leb;  // m, per landmark
    double leb_avg = 0.0;  // m

    double heb_deg() const { return heb * 180.0 / kPi; }
};

/// Block-diagonal inverse of the UE and (identical) landmark prior
/// covariances. Throws SingularPrior unless both are positive definite.
JointInfoMatrix pim_init(const Mat4& ue_prior_cov, const Mat3& lm_prior_cov, int num_landmarks);

/// Inverse of a symmetric positive-definite matrix through LLT with a
/// condition-number guard. Throws NumericalFailure.
Mat spd_inverse(const Mat& m, double max_condition = 1e12);

/// Measurement information H^T R^-1 H of one scan at the true state, with
/// ground-truth association. `detected` has one flag per path (index 0 is the
/// BS, index i + 1 scenario landmark i); empty means every path is detected.
Mat data_information(const UEState& true_ue, const Scenario& scenario, double speed,
                     const SensorConfig& sensor, const std::vector<bool>& detected = {});

/// One step of the information recursion
///   J_k = H^T R^-1 H + (Q + F J_{k-1}^-1 F^T)^-1,
/// with F evaluated at `prev_ue` and H at `true_ue`.
JointInfoMatrix pim_step(const JointInfoMatrix& prev, const UEState& prev_ue,
                         const UEState& true_ue, const Scenario& scenario,
                         const MotionConfig& motion, const SensorConfig& sensor,
                         const std::vector<bool>& detected = {});

BoundsReport extract_bounds(const JointInfoMatrix& j);

/// Additive split of the data-information diagonal blocks into terms from
/// delay/angles and terms from Doppler.
struct DopplerDecomposition {
    Mat4 ue_non_doppler = Mat4::Zero();
    Mat4 ue_doppler = Mat4::Zero();
    /// Per path, BS first; each is a rank <= 1 outer product.
    std::vector<Mat4> ue_doppler_per_path;
    std::vector<Mat3> lm_non_doppler;
    std::vector<Mat3> lm_doppler;
};

DopplerDecomposition doppler_decomposition(const UEState& true_ue, const Scenario& scenario,
                                           double speed, const SensorConfig& sensor);

enum class Aggregation { Final, Mean };

struct BoundsSeries {
    double sigma_d = 0.0;
    bool doppler_enabled = true;
    std::vector<BoundsReport> steps;  // k = 1..K

    BoundsReport aggregate(Aggregation how) const;
};

/// Everything the bound recursion needs besides sigma_d.
struct BoundsSetup {
    Scenario scenario = Scenario::standard();
    MotionConfig motion;
    SensorConfig sensor;
    UEState init{70.7285, 0.0, kPi / 2, 300.0};
    Mat4 ue_prior_cov = Vec4(0.3, 0.3, 0.0052, 0.3).asDiagonal();
    Mat3 lm_prior_cov = 100.0 * Mat3::Identity();
    int steps = 40;
};

/// Runs the recursion over the noiseless trajectory from `setup.init`.
BoundsSeries run_bounds(const BoundsSetup& setup, bool with_doppler, double sigma_d);

/// One series per grid value (with Doppler) followed by the no-Doppler
/// baseline.
std::vector<BoundsSeries> sweep_sigma_d(const BoundsSetup& setup, const std::vector<double>& grid);

/// Per-step CSV: sigma_d, doppler_enabled, k, PEB_m, HEB_rad, HEB_deg, CEB_m,
/// LEB_avg_m, LEB_1_m, ... The baseline row carries sigma_d = nan.
void write_bounds_csv(std::ostream& os, const std::vector<BoundsSeries>& table);

}  // namespace radioslam
