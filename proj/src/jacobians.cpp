#include "radioslam/jacobians.hpp"

#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"

#include <algorithm>

namespace radioslam {

namespace {

using Row3 = Eigen::RowVector3d;

Row3 d_azimuth(const Vec3& a) {
    const double rho2 = a.x() * a.x() + a.y() * a.y();
    if (rho2 <= 0.0) throw DegenerateGeometry("azimuth undefined for a vertical direction");
    return Row3(-a.y(), a.x(), 0.0) / rho2;
}

Row3 d_elevation(const Vec3& a) {
    const double rho = std::hypot(a.x(), a.y());
    if (rho <= 0.0) throw DegenerateGeometry("elevation derivative undefined for a vertical direction");
    const double n = a.norm();
    const Vec3 q = a / n;
    return (Vec3::UnitZ() - q.z() * q).transpose() / rho;
}

}  // namespace

MeasJacobians meas_jacobians(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                             double speed) {
    const Vec3 u = ue.position3d();
    const bool los = landmark.kind == LandmarkKind::BS;

    // a = incidence - UE, e = incidence - BS (UE - BS for LOS).
    Vec3 a, e;
    Mat3 da_du, de_du, da_dl = Mat3::Zero(), de_dl = Mat3::Zero();
    if (los) {
        a = bs_pos - u;
        e = u - bs_pos;
        da_du = -Mat3::Identity();
        de_du = Mat3::Identity();
    } else {
        const IncidenceGeometry g = incidence_geometry(landmark, bs_pos, u);
        a = g.point - u;
        e = g.point - bs_pos;
        da_du = g.d_ue - Mat3::Identity();
        de_du = g.d_ue;
        da_dl = g.d_landmark;
        de_dl = g.d_landmark;
    }
    const double ra = a.norm();
    const double re = e.norm();
    if (ra <= 0.0 || re <= 0.0) throw DegenerateGeometry("zero-length path leg");
    const Vec3 qa = a / ra;
    const Vec3 qe = e / re;
    const Vec3 vel = ue_velocity(ue.heading, speed);
    const double doppler = vel.dot(qa);

    // Row derivatives with respect to a and e.
    const Row3 range_da = qa.transpose();
    const Row3 range_de = los ? Row3::Zero() : Row3(qe.transpose());
    const Row3 aoa_az_da = d_azimuth(a);
    const Row3 aoa_el_da = d_elevation(a);
    const Row3 aod_az_de = d_azimuth(e);
    const Row3 aod_el_de = d_elevation(e);
    const Row3 doppler_da = (vel - doppler * qa).transpose() / ra;

    Eigen::Matrix<double, 6, 3> d_u3;
    d_u3.row(0) = range_da * da_du + range_de * de_du;
    d_u3.row(1) = aoa_az_da * da_du;
    d_u3.row(2) = aoa_el_da * da_du;
    d_u3.row(3) = aod_az_de * de_du;
    d_u3.row(4) = aod_el_de * de_du;
    d_u3.row(5) = doppler_da * da_du;

    MeasJacobians jac;
    jac.ue.leftCols<2>() = d_u3.leftCols<2>();
    const Vec3 vel_perp(-speed * std::sin(ue.heading), speed * std::cos(ue.heading), 0.0);
    jac.ue(1, 2) = -1.0;
    jac.ue(5, 2) = vel_perp.dot(qa);
    jac.ue(0, 3) = 1.0;

    if (!los) {
        jac.lm.row(0) = range_da * da_dl + range_de * de_dl;
        jac.lm.row(1) = aoa_az_da * da_dl;
        jac.lm.row(2) = aoa_el_da * da_dl;
        jac.lm.row(3) = aod_az_de * de_dl;
        jac.lm.row(4) = aod_el_de * de_dl;
        jac.lm.row(5) = doppler_da * da_dl;
    }
    return jac;
}

MeasJacobianUE meas_jacobian_ue(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                                double speed) {
    return meas_jacobians(landmark, bs_pos, ue, speed).ue;
}

MeasJacobianLM meas_jacobian_lm(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                                double speed) {
    if (landmark.kind == LandmarkKind::BS)
        throw InvalidKind("the BS is known and has no landmark Jacobian");
    return meas_jacobians(landmark, bs_pos, ue, speed).lm;
}

double fd_check(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue, double speed,
                double step) {
    const MeasJacobians jac = meas_jacobians(landmark, bs_pos, ue, speed);
    auto diff = [](const Vec& plus, const Vec& minus) { return innovation(plus, minus); };

    double worst = 0.0;
    auto compare = [&](const Vec& numeric, const auto& analytic_col) {
        for (int r = 0; r < 6; ++r) {
            const double an = analytic_col(r);
            worst = std::max(worst, std::abs(an - numeric(r)) / std::max(1.0, std::abs(an)));
        }
    };

    for (int c = 0; c < 4; ++c) {
        Vec4 sp = ue.vec(), sm = ue.vec();
        sp(c) += step;
        sm(c) -= step;
        // Keep the raw heading; wrapping is handled on the measurement side.
        const UEState up{sp(0), sp(1), sp(2), sp(3)};
        const UEState um{sm(0), sm(1), sm(2), sm(3)};
        const Vec numeric = diff(measure(landmark, bs_pos, up, speed).vec(),
                                 measure(landmark, bs_pos, um, speed).vec()) / (2.0 * step);
        compare(numeric, jac.ue.col(c));
    }
    if (landmark.kind != LandmarkKind::BS) {
        for (int c = 0; c < 3; ++c) {
            Landmark lp = landmark, lm = landmark;
            lp.position(c) += step;
            lm.position(c) -= step;
            const Vec numeric = diff(measure(lp, bs_pos, ue, speed).vec(),
                                     measure(lm, bs_pos, ue, speed).vec()) / (2.0 * step);
            compare(numeric, jac.lm.col(c));
        }
    }
    return worst;
}

}  // namespace radioslam
