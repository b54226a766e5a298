#include "radioslam/sensing.hpp"

#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace radioslam {

double ClutterRegion::volume(int dim) const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    return v;
}

Mat6 SensorConfig::full_noise() const {
    Mat6 r = Mat6::Zero();
    r.topLeftCorner<5, 5>() = base_noise;
    r(5, 5) = sigma_d * sigma_d;
    return r;
}

Mat SensorConfig::noise() const {
    const Mat6 r = full_noise();
    return r.topLeftCorner(meas_dim(), meas_dim());
}

double SensorConfig::clutter_density() const {
    return clutter_rate / clutter_region.volume(meas_dim());
}

void SensorConfig::validate() const {
    if (!(detection_prob >= 0.0 && detection_prob <= 1.0))
        throw ConfigError("detection probability must lie in [0, 1]");
    if (!(clutter_rate >= 0.0)) throw ConfigError("clutter rate must be non-negative");
    if (!(sigma_d > 0.0)) throw ConfigError("sigma_d must be positive");
    if (!base_noise.isApprox(base_noise.transpose(), 1e-12))
        throw ConfigError("measurement noise must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> eig(base_noise);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        throw ConfigError("measurement noise must be positive definite");
    for (std::size_t i = 0; i < 6; ++i) {
        if (!(clutter_region.hi[i] > clutter_region.lo[i]))
            throw ConfigError("clutter region bounds must satisfy lo < hi");
    }
}

Scan generate_scan(const Scenario& scenario, const UEState& ue_truth, double speed,
                   const SensorConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;

    const Mat6 r = cfg.full_noise();
    Eigen::SelfAdjointEigenSolver<Mat6> eig(r);
    const Mat6 root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    Scan scan;
    auto emit = [&](const Landmark& lm, int label) {
        // Draw both uniforms and noise unconditionally so the random stream
        // does not depend on which paths were detected.
        const bool detected = unit(rng) < cfg.detection_prob;
        Eigen::Matrix<double, 6, 1> w;
        for (int i = 0; i < 6; ++i) w(i) = normal(rng);
        if (!detected) return;
        Vec z = measure(lm, scenario.bs.position, ue_truth, speed, true).vec() + root * w;
        z(kAoaAzIndex) = wrap_angle(z(kAoaAzIndex));
        z(kAodAzIndex) = wrap_angle(z(kAodAzIndex));
        scan.measurements.push_back(Measurement::from_vec(z));
        scan.truth_assoc.push_back(label);
    };
    emit(scenario.bs, 0);
    for (std::size_t i = 0; i < scenario.landmarks.size(); ++i)
        emit(scenario.landmarks[i], static_cast<int>(i) + 1);

    std::poisson_distribution<int> clutter_count(cfg.clutter_rate);
    const int n_clutter = cfg.clutter_rate > 0.0 ? clutter_count(rng) : 0;
    for (int c = 0; c < n_clutter; ++c) {
        Vec z(6);
        for (std::size_t i = 0; i < 6; ++i) {
            const double lo = cfg.clutter_region.lo[i];
            const double hi = cfg.clutter_region.hi[i];
            z(static_cast<int>(i)) = lo + (hi - lo) * unit(rng);
        }
        scan.measurements.push_back(Measurement::from_vec(z));
        scan.truth_assoc.push_back(kClutterLabel);
    }

    std::vector<std::size_t> order(scan.measurements.size());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own uniform draws; std::shuffle's use of the
    // engine is implementation-defined.
    for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(unit(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    Scan shuffled;
    for (std::size_t idx : order) {
        Measurement m = scan.measurements[idx];
        if (!cfg.with_doppler) m.doppler.reset();
        shuffled.measurements.push_back(m);
        shuffled.truth_assoc.push_back(scan.truth_assoc[idx]);
    }
    return shuffled;
}

}  // namespace radioslam
