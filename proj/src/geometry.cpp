#include "radioslam/geometry.hpp"

#include "radioslam/errors.hpp"

#include <algorithm>
#include <string>

namespace radioslam {

std::string_view to_string(LandmarkKind kind) {
    switch (kind) {
        case LandmarkKind::BS: return "BS";
        case LandmarkKind::VA: return "VA";
        case LandmarkKind::SP: return "SP";
    }
    return "?";
}

LandmarkKind kind_from_string(std::string_view name) {
    if (name == "BS") return LandmarkKind::BS;
    if (name == "VA") return LandmarkKind::VA;
    if (name == "SP") return LandmarkKind::SP;
    throw InvalidKind("unknown landmark kind '" + std::string(name) + "'");
}

void Scenario::validate() const {
    if (bs.kind != LandmarkKind::BS) throw ConfigError("scenario BS must have kind BS");
    if (!bs.position.allFinite()) throw ConfigError("BS position must be finite");
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        const auto& lm = landmarks[i];
        if (lm.kind == LandmarkKind::BS) throw ConfigError("only one BS is allowed");
        if (!lm.position.allFinite()) throw ConfigError("landmark position must be finite");
        if ((lm.position - bs.position).norm() < 1e-9)
            throw ConfigError("landmark coincides with the BS");
        for (std::size_t j = 0; j < i; ++j) {
            if ((lm.position - landmarks[j].position).norm() < 1e-9)
                throw ConfigError("landmark positions must be pairwise distinct");
        }
    }
    if (!(speed_of_light > 0.0)) throw ConfigError("speed of light must be positive");
}

Scenario Scenario::standard() {
    Scenario s;
    s.bs = {Vec3(0, 0, 40), LandmarkKind::BS};
    for (const auto& p : {Vec3(200, 0, 40), Vec3(-200, 0, 40), Vec3(0, 200, 40), Vec3(0, -200, 40)})
        s.landmarks.push_back({p, LandmarkKind::VA});
    for (const auto& p : {Vec3(99, 0, 10), Vec3(-99, 0, 10), Vec3(0, 99, 10), Vec3(0, -99, 10)})
        s.landmarks.push_back({p, LandmarkKind::SP});
    return s;
}

Vec Measurement::vec() const {
    Vec z(dim());
    z.head<5>() << range, aoa_az, aoa_el, aod_az, aod_el;
    if (doppler) z(kDopplerIndex) = *doppler;
    return z;
}

Measurement Measurement::from_vec(const Vec& z) {
    Measurement m{z(0), z(1), z(2), z(3), z(4), std::nullopt};
    if (z.size() > kDopplerIndex) m.doppler = z(kDopplerIndex);
    return m;
}

namespace {

constexpr double kDegenerateTol = 1e-12;

double azimuth(const Vec3& q) { return std::atan2(q.y(), q.x()); }

double elevation(const Vec3& q) { return std::asin(std::clamp(q.z() / q.norm(), -1.0, 1.0)); }

}  // namespace

IncidenceGeometry incidence_geometry(const Landmark& landmark, const Vec3& bs_pos,
                                     const Vec3& ue_pos) {
    switch (landmark.kind) {
        case LandmarkKind::BS:
            throw InvalidKind("incidence point is undefined for the BS");
        case LandmarkKind::SP:
            return {landmark.position, Mat3::Zero(), Mat3::Identity()};
        case LandmarkKind::VA:
            break;
    }

    const Vec3& va = landmark.position;
    const Vec3 normal = va - bs_pos;  // unnormalized plane normal
    const Vec3 mid = 0.5 * (va + bs_pos);
    const Vec3 ray = va - ue_pos;
    const double scale = normal.norm() * ray.norm();
    const double den = normal.dot(ray);
    if (scale < kDegenerateTol || std::abs(den) <= kDegenerateTol * scale)
        throw DegenerateGeometry("UE -> VA line does not cross the reflecting plane");
    const double num = normal.dot(mid - ue_pos);
    const double t = num / den;

    // p = ue + t (va - ue), t = n.(m - ue) / n.(va - ue)
    const Eigen::RowVector3d dt_due = normal.transpose() * (num - den) / (den * den);
    const Eigen::RowVector3d dnum_dva = (mid - ue_pos).transpose() + 0.5 * normal.transpose();
    const Eigen::RowVector3d dden_dva = ray.transpose() + normal.transpose();
    const Eigen::RowVector3d dt_dva = (dnum_dva * den - num * dden_dva) / (den * den);

    IncidenceGeometry g;
    g.point = ue_pos + t * ray;
    g.d_ue = (1.0 - t) * Mat3::Identity() + ray * dt_due;
    g.d_landmark = t * Mat3::Identity() + ray * dt_dva;
    return g;
}

Vec3 incidence_point(const Landmark& landmark, const Vec3& bs_pos, const Vec3& ue_pos) {
    return incidence_geometry(landmark, bs_pos, ue_pos).point;
}

Measurement measure(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                    double speed, bool with_doppler) {
    const Vec3 u = ue.position3d();
    Vec3 arrival;   // UE -> incidence point
    Vec3 departure; // BS -> incidence point (or UE for LOS)
    double path = 0.0;
    if (landmark.kind == LandmarkKind::BS) {
        arrival = bs_pos - u;
        departure = u - bs_pos;
        path = arrival.norm();
    } else {
        const Vec3 p = incidence_point(landmark, bs_pos, u);
        arrival = p - u;
        departure = p - bs_pos;
        path = arrival.norm() + departure.norm();
    }
    if (arrival.norm() < kDegenerateTol || departure.norm() < kDegenerateTol)
        throw DegenerateGeometry("UE or BS coincides with the incidence point");

    Measurement z;
    z.range = path + ue.clock_bias;
    z.aoa_az = wrap_angle(azimuth(arrival) - ue.heading);
    z.aoa_el = elevation(arrival);
    z.aod_az = azimuth(departure);
    z.aod_el = elevation(departure);
    if (with_doppler) z.doppler = ue_velocity(ue.heading, speed).dot(arrival.normalized());
    return z;
}

Vec3 arrival_direction(const Measurement& z, double heading) {
    const double az = z.aoa_az + heading;
    const double ce = std::cos(z.aoa_el);
    return {ce * std::cos(az), ce * std::sin(az), std::sin(z.aoa_el)};
}

Vec3 birth_position(const Measurement& z, const UEState& ue, const Vec3& bs_pos,
                    LandmarkKind kind) {
    const Vec3 u = ue.position3d();
    const Vec3 q = arrival_direction(z, ue.heading);
    const double path = z.range - ue.clock_bias;
    switch (kind) {
        case LandmarkKind::VA:
            if (!(path > 0.0)) throw InfeasibleBirth("non-positive path length for VA birth");
            return u + path * q;
        case LandmarkKind::SP: {
            const Vec3 d = u - bs_pos;
            const double dn = d.norm();
            if (!(path > dn)) throw InfeasibleBirth("path shorter than the BS-UE distance");
            const double r = (path * path - dn * dn) / (2.0 * (path + q.dot(d)));
            if (!(r > 0.0) || !std::isfinite(r)) throw InfeasibleBirth("no positive SP range");
            return u + r * q;
        }
        case LandmarkKind::BS:
            break;
    }
    throw InvalidKind("birth is only defined for VA and SP");
}

}  // namespace radioslam
