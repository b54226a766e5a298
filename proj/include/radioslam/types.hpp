#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace radioslam {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

/// Planar UE pose plus clock bias. The bias is carried in meters.
struct UEState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double clock_bias = 0.0;

    Vec3 position3d() const { return {x, y, 0.0}; }
    Vec4 vec() const { return {x, y, heading, clock_bias}; }
    static UEState from_vec(const Vec4& s) { return {s(0), s(1), wrap_angle(s(2)), s(3)}; }
};

enum class LandmarkKind { BS, VA, SP };

std::string_view to_string(LandmarkKind kind);
LandmarkKind kind_from_string(std::string_view name);

struct Landmark {
    Vec3 position = Vec3::Zero();
    LandmarkKind kind = LandmarkKind::SP;
};

/// One known base station plus the landmarks the filter has to discover.
struct Scenario {
    Landmark bs{Vec3::Zero(), LandmarkKind::BS};
    std::vector<Landmark> landmarks;
    double speed_of_light = kSpeedOfLight;

    /// Throws ConfigError when the BS is missing or two landmarks coincide.
    void validate() const;

    /// BS at (0,0,40), four VAs at (+-200,0,40)/(0,+-200,40), four SPs at
    /// (+-99,0,10)/(0,+-99,10).
    static Scenario standard();
};

/// Channel parameters of one path. Range is c*tau in meters including the
/// clock bias; azimuths in (-pi, pi], elevations in [-pi/2, pi/2].
struct Measurement {
    double range = 0.0;
    double aoa_az = 0.0;
    double aoa_el = 0.0;
    double aod_az = 0.0;
    double aod_el = 0.0;
    std::optional<double> doppler;

    int dim() const { return doppler ? 6 : 5; }
    Vec vec() const;
    static Measurement from_vec(const Vec& z);
};

/// Indices of the azimuth entries in a measurement vector (need wrapping).
inline constexpr int kAoaAzIndex = 1;
inline constexpr int kAodAzIndex = 3;
inline constexpr int kDopplerIndex = 5;

/// z - zhat with azimuth entries wrapped.
inline Vec innovation(const Vec& z, const Vec& zhat) {
    Vec nu = z - zhat;
    nu(kAoaAzIndex) = wrap_angle(nu(kAoaAzIndex));
    nu(kAodAzIndex) = wrap_angle(nu(kAodAzIndex));
    return nu;
}

}  // namespace radioslam
