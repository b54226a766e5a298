#include "radioslam/metrics.hpp"

#include "radioslam/assignment.hpp"
#include "radioslam/errors.hpp"

#include <algorithm>

namespace radioslam {

void GospaParams::validate() const {
    if (!(cutoff > 0.0)) throw ConfigError("GOSPA cutoff must be positive");
    if (!(order >= 1.0)) throw ConfigError("GOSPA order must be >= 1");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("GOSPA alpha must lie in (0, 2]");
}

GospaResult gospa(const std::vector<Vec3>& truth, const std::vector<Vec3>& estimate,
                  const GospaParams& params) {
    params.validate();
    const double cp = std::pow(params.cutoff, params.order);
    const auto m = static_cast<Eigen::Index>(truth.size());
    const auto n = static_cast<Eigen::Index>(estimate.size());

    GospaResult out;
    double sum = cp / params.alpha * static_cast<double>(std::abs(m - n));
    if (m > 0 && n > 0) {
        CostMatrix cost(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                cost(i, j) = std::pow(std::min((truth[i] - estimate[j]).norm(), params.cutoff), params.order);
        const Assignment a = solve_lap(cost);
        sum += a.cost;
        for (Eigen::Index i = 0; i < m; ++i) {
            const int j = a.row_to_col[static_cast<std::size_t>(i)];
            if (j < 0) continue;
            const double d = (truth[i] - estimate[j]).norm();
            if (d < params.cutoff) {
                out.localization += std::pow(d, params.order);
            } else {
                ++out.missed;
                ++out.false_targets;
            }
        }
    }
    if (m > n) out.missed += static_cast<int>(m - n);
    if (n > m) out.false_targets += static_cast<int>(n - m);
    out.total = std::pow(sum, 1.0 / params.order);
    return out;
}

UERmse rmse(const std::vector<UEState>& truth, const std::vector<UEState>& estimate) {
    if (truth.size() != estimate.size()) throw LengthMismatch("RMSE series lengths differ");
    UERmse out;
    if (truth.empty()) return out;
    double pos = 0.0, head = 0.0, bias = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double dx = estimate[i].x - truth[i].x;
        const double dy = estimate[i].y - truth[i].y;
        const double dh = wrap_angle(estimate[i].heading - truth[i].heading);
        const double db = estimate[i].clock_bias - truth[i].clock_bias;
        pos += dx * dx + dy * dy;
        head += dh * dh;
        bias += db * db;
    }
    const double n = static_cast<double>(truth.size());
    out.pos_m = std::sqrt(pos / n);
    out.heading_rad = std::sqrt(head / n);
    out.bias_m = std::sqrt(bias / n);
    return out;
}

}  // namespace radioslam
