#pragma once

#include "radioslam/metrics.hpp"
#include "radioslam/pcrb.hpp"
#include "radioslam/pmb_filter.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace radioslam {

/// Everything a Monte-Carlo experiment or a bound sweep depends on. Defaults
/// reproduce the standard circular-drive scenario.
struct RunConfig {
    Scenario scenario = Scenario::standard();
    MotionConfig motion;
    SensorConfig sensor;
    FilterConfig filter;  // filter.bs / motion / sensor are synced from the fields above
    UndetectedIntensity undetected;
    GospaParams gospa;

    UEState init{70.7285, 0.0, kPi / 2, 300.0};
    Mat4 init_cov = Vec4(0.3, 0.3, 0.0052, 0.3).asDiagonal();
    int steps = 40;
    bool truth_noise = true;

    int runs = 100;
    std::uint64_t base_seed = 1;
    int workers = 0;  // 0: hardware concurrency

    double lm_prior_var = 100.0;  // m^2, bound recursion only
    std::vector<double> sigma_d_grid{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};

    /// Filter config with the shared scenario, motion and sensor settings.
    FilterConfig filter_config() const;
    BoundsSetup bounds_setup() const;
    void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys take their defaults; malformed values raise ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace radioslam
