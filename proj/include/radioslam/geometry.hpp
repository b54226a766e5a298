#pragma once

#include "radioslam/types.hpp"

namespace radioslam {

/// UE velocity in the global frame for a planar heading.
inline Vec3 ue_velocity(double heading, double speed) {
    return {speed * std::cos(heading), speed * std::sin(heading), 0.0};
}

/// Point where the path BS -> landmark -> UE touches the landmark.
///
/// For a scattering point this is the point itself. For a virtual anchor the
/// reflecting surface is the plane that perpendicularly bisects BS -> VA, and
/// the incidence point is where the segment UE -> VA crosses that plane.
/// Throws InvalidKind for a BS and DegenerateGeometry when the UE -> VA line
/// is parallel to the plane or the UE sits on the VA.
Vec3 incidence_point(const Landmark& landmark, const Vec3& bs_pos, const Vec3& ue_pos);

/// Incidence point together with its derivatives with respect to the UE
/// position (3D) and the landmark position.
struct IncidenceGeometry {
    Vec3 point;
    Mat3 d_ue;
    Mat3 d_landmark;
};

IncidenceGeometry incidence_geometry(const Landmark& landmark, const Vec3& bs_pos,
                                     const Vec3& ue_pos);

/// Noiseless channel parameters of the path through `landmark`.
/// Doppler is filled in only when `with_doppler` is set; it is positive when
/// the UE approaches the incidence point.
Measurement measure(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                    double speed, bool with_doppler = true);

/// Inverse of `measure` from range and AOA: the landmark position of the
/// given kind that reproduces the measured range along the measured arrival
/// direction. Throws InfeasibleBirth when no such position exists.
Vec3 birth_position(const Measurement& z, const UEState& ue, const Vec3& bs_pos,
                    LandmarkKind kind);

/// Global-frame unit arrival direction encoded by a measurement's AOA.
Vec3 arrival_direction(const Measurement& z, double heading);

}  // namespace radioslam
