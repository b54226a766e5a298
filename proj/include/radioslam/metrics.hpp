#pragma once

#include "radioslam/types.hpp"

#include <vector>

namespace radioslam {

struct GospaParams {
    double cutoff = 20.0;  // m
    double order = 2.0;
    double alpha = 2.0;

    void validate() const;
};

/// GOSPA distance and its decomposition. With alpha = 2,
/// total^p = localization + cutoff^p / 2 * (missed + false_targets).
struct GospaResult {
    double total = 0.0;
    double localization = 0.0;  // sum of d^p over pairs closer than the cutoff
    int missed = 0;
    int false_targets = 0;
};

GospaResult gospa(const std::vector<Vec3>& truth, const std::vector<Vec3>& estimate,
                  const GospaParams& params = {});

struct UERmse {
    double pos_m = 0.0;
    double heading_rad = 0.0;
    double bias_m = 0.0;
};

/// RMSE over every (truth, estimate) pair; heading errors are wrapped.
/// Throws LengthMismatch when the series differ in length.
UERmse rmse(const std::vector<UEState>& truth, const std::vector<UEState>& estimate);

/// Per-run evaluation series.
struct MetricsSeries {
    std::vector<double> gospa_va;  // per step
    std::vector<double> gospa_sp;  // per step
    UERmse rmse;
    double correct_da_weight = 0.0;  // mean over steps
};

}  // namespace radioslam
