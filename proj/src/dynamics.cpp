#include "radioslam/dynamics.hpp"

#include "radioslam/errors.hpp"

#include <random>

namespace radioslam {

namespace {

constexpr double kStraightTurnRate = 1e-9;

// 2v/w sin(wT/2), the chord length travelled in one period.
double chord(const MotionConfig& cfg) {
    const double w = cfg.turn_rate;
    if (std::abs(w) < kStraightTurnRate) return cfg.speed * cfg.period;
    return 2.0 * cfg.speed / w * std::sin(0.5 * w * cfg.period);
}

}  // namespace

void MotionConfig::validate() const {
    if (!(period > 0.0)) throw ConfigError("motion period must be positive");
    if (!std::isfinite(speed) || !std::isfinite(turn_rate))
        throw ConfigError("speed and turn rate must be finite");
    if (!process_noise.isApprox(process_noise.transpose(), 1e-12))
        throw ConfigError("process noise must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat4> eig(process_noise);
    if (eig.eigenvalues().minCoeff() < -1e-12) throw ConfigError("process noise must be PSD");
}

UEState propagate(const UEState& ue, const MotionConfig& cfg) {
    const double l = chord(cfg);
    const double mid = ue.heading + 0.5 * cfg.turn_rate * cfg.period;
    return {ue.x + l * std::cos(mid), ue.y + l * std::sin(mid),
            wrap_angle(ue.heading + cfg.turn_rate * cfg.period), ue.clock_bias};
}

Mat4 transition_jacobian(const UEState& ue, const MotionConfig& cfg) {
    const double l = chord(cfg);
    const double mid = ue.heading + 0.5 * cfg.turn_rate * cfg.period;
    Mat4 f = Mat4::Identity();
    f(0, 2) = -l * std::sin(mid);
    f(1, 2) = l * std::cos(mid);
    return f;
}

std::vector<UEState> simulate_trajectory(const UEState& init, const MotionConfig& cfg, int steps,
                                         bool noise, std::uint64_t seed) {
    if (steps < 1) throw ConfigError("trajectory needs at least one step");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Mat4 chol = Mat4::Zero();
    if (noise) {
        // Eigen square root so singular Q (e.g. zero heading noise) is accepted.
        Eigen::SelfAdjointEigenSolver<Mat4> eig(cfg.process_noise);
        chol = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    std::vector<UEState> out;
    out.reserve(static_cast<std::size_t>(steps));
    UEState s = init;
    for (int k = 0; k < steps; ++k) {
        s = propagate(s, cfg);
        if (noise) {
            Vec4 w;
            for (int i = 0; i < 4; ++i) w(i) = normal(rng);
            s = UEState::from_vec(s.vec() + chol * w);
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace radioslam
