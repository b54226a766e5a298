#pragma once

#include "radioslam/types.hpp"

namespace radioslam {

/// Rows: range, aoa_az, aoa_el, aod_az, aod_el, doppler.
/// Columns: x, y, heading, clock_bias.
using MeasJacobianUE = Eigen::Matrix<double, 6, 4>;
/// Rows as MeasJacobianUE; columns: landmark x, y, z.
using MeasJacobianLM = Eigen::Matrix<double, 6, 3>;

/// Derivative of `measure` with respect to the UE state. The bias column of
/// the Doppler row is exactly zero and the bias entry of the range row is
/// exactly one.
MeasJacobianUE meas_jacobian_ue(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                                double speed);

/// Derivative of `measure` with respect to a VA/SP position. Throws
/// InvalidKind for the BS, which is not part of the estimated map.
MeasJacobianLM meas_jacobian_lm(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                                double speed);

/// Both blocks from one geometry evaluation. `lm` is left zero for the BS.
struct MeasJacobians {
    MeasJacobianUE ue = MeasJacobianUE::Zero();
    MeasJacobianLM lm = MeasJacobianLM::Zero();
};

MeasJacobians meas_jacobians(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue,
                             double speed);

/// Largest |analytic - central difference| / max(1, |analytic|) over every
/// entry of the UE and (for VA/SP) landmark Jacobians.
double fd_check(const Landmark& landmark, const Vec3& bs_pos, const UEState& ue, double speed,
                double step = 1e-6);

}  // namespace radioslam
