#pragma once

#include "radioslam/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace radioslam {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Per-dimension [lo, hi] box that clutter is drawn from uniformly.
struct ClutterRegion {
    std::array<double, 6> lo{0.0, -kPi, -kPi / 2, -kPi, -kPi / 2, -22.22};
    std::array<double, 6> hi{600.0, kPi, kPi / 2, kPi, kPi / 2, 22.22};

    /// Volume of the first `dim` dimensions.
    double volume(int dim) const;
};

struct SensorConfig {
    /// Covariance of (range, aoa_az, aoa_el, aod_az, aod_el) noise.
    Eigen::Matrix<double, 5, 5> base_noise =
        (Eigen::Matrix<double, 5, 1>() << 1e-2, 2.5e-3, 2.5e-3, 2.5e-3, 2.5e-3).finished().asDiagonal();
    double sigma_d = 0.1;  // m/s
    double detection_prob = 0.9;
    double clutter_rate = 1.0;
    ClutterRegion clutter_region;
    bool with_doppler = true;

    /// blkdiag(base_noise, sigma_d^2).
    Mat6 full_noise() const;
    /// Noise covariance of the measurement vectors the filter sees (5x5
    /// without Doppler).
    Mat noise() const;
    int meas_dim() const { return with_doppler ? 6 : 5; }
    /// Clutter intensity (expected count per unit measurement-space volume).
    double clutter_density() const;

    void validate() const;
};

/// Source label for clutter in `Scan::truth_assoc`; the BS is 0 and scenario
/// landmark i is i + 1.
inline constexpr int kClutterLabel = -1;

struct Scan {
    std::vector<Measurement> measurements;
    /// Hidden source labels, parallel to `measurements`. Diagnostics only.
    std::vector<int> truth_assoc;
};

/// One scan at the true UE state. Every path (BS included) is detected
/// independently with probability p_D and perturbed by N(0, R); a
/// Poisson(clutter_rate) number of clutter points is added and the result is
/// shuffled. Doppler noise is always drawn so that scans with and without
/// Doppler share every other coordinate; it is dropped when
/// `cfg.with_doppler` is false.
Scan generate_scan(const Scenario& scenario, const UEState& ue_truth, double speed,
                   const SensorConfig& cfg, std::uint64_t seed);

}  // namespace radioslam
