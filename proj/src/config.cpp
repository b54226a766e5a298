#include "radioslam/config.hpp"

#include "radioslam/errors.hpp"

#include <fstream>

namespace radioslam {

using nlohmann::json;

namespace {

json vec_json(const Eigen::Ref<const Vec>& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed_vec(const json& j, const char* key) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(N))
        throw ConfigError(std::string("'") + key + "' must be an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

template <int N>
void read_vec(const json& obj, const char* key, Eigen::Matrix<double, N, 1>& out) {
    if (obj.contains(key)) out = fixed_vec<N>(obj.at(key), key);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

const json& section(const json& j, const char* key) {
    static const json empty = json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return j.at(key);
}

}  // namespace

FilterConfig RunConfig::filter_config() const {
    FilterConfig f = filter;
    f.bs = scenario.bs;
    f.motion = motion;
    f.sensor = sensor;
    return f;
}

BoundsSetup RunConfig::bounds_setup() const {
    BoundsSetup b;
    b.scenario = scenario;
    b.motion = motion;
    b.sensor = sensor;
    b.init = init;
    b.ue_prior_cov = init_cov;
    b.lm_prior_cov = lm_prior_var * Mat3::Identity();
    b.steps = steps;
    return b;
}

void RunConfig::validate() const {
    scenario.validate();
    filter_config().validate();
    gospa.validate();
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (!(lm_prior_var > 0.0)) throw ConfigError("landmark prior variance must be positive");
    Eigen::LLT<Mat4> llt(init_cov);
    if (llt.info() != Eigen::Success) throw ConfigError("initial UE covariance must be PD");
    for (double sd : sigma_d_grid)
        if (!(sd > 0.0)) throw ConfigError("sigma_d grid values must be positive");
}

json to_json(const RunConfig& c) {
    json j;
    json lms = json::array();
    for (const auto& lm : c.scenario.landmarks)
        lms.push_back({{"kind", std::string(to_string(lm.kind))}, {"position_m", vec_json(lm.position)}});
    j["scenario"] = {{"bs_position_m", vec_json(c.scenario.bs.position)}, {"landmarks", lms},
                     {"speed_of_light_mps", c.scenario.speed_of_light}};
    j["motion"] = {{"speed_mps", c.motion.speed},
                   {"turn_rate_radps", c.motion.turn_rate},
                   {"period_s", c.motion.period},
                   {"process_noise_var", vec_json(c.motion.process_noise.diagonal())}};
    const auto& s = c.sensor;
    j["sensor"] = {{"range_var_m2", s.base_noise(0, 0)},
                   {"angle_var_rad2", s.base_noise(1, 1)},
                   {"sigma_d_mps", s.sigma_d},
                   {"detection_prob", s.detection_prob},
                   {"clutter_rate", s.clutter_rate},
                   {"clutter_lo", s.clutter_region.lo},
                   {"clutter_hi", s.clutter_region.hi},
                   {"doppler", s.with_doppler}};
    j["filter"] = {{"gamma", c.filter.gamma},
                   {"prune_r", c.filter.prune_r},
                   {"gate", c.filter.gate},
                   {"max_components", c.filter.max_components},
                   {"report_r", c.filter.report_r},
                   {"kind_confidence", c.filter.kind_confidence},
                   {"birth_region_lo_m", vec_json(c.undetected.lo)},
                   {"birth_region_hi_m", vec_json(c.undetected.hi)},
                   {"birth_expected_count", c.undetected.expected_count}};
    j["gospa"] = {{"cutoff_m", c.gospa.cutoff}, {"order", c.gospa.order}, {"alpha", c.gospa.alpha}};
    j["init"] = {{"ue_state", vec_json(c.init.vec())}, {"ue_cov_diag", vec_json(c.init_cov.diagonal())}};
    j["bounds"] = {{"lm_prior_var_m2", c.lm_prior_var}, {"sigma_d_grid_mps", c.sigma_d_grid}};
    j["steps"] = c.steps;
    j["truth_noise"] = c.truth_noise;
    j["runs"] = c.runs;
    j["base_seed"] = c.base_seed;
    j["workers"] = c.workers;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    try {
        const json& sc = section(j, "scenario");
        if (sc.contains("bs_position_m")) c.scenario.bs.position = fixed_vec<3>(sc.at("bs_position_m"), "bs_position_m");
        if (sc.contains("landmarks")) {
            c.scenario.landmarks.clear();
            for (const auto& lm : sc.at("landmarks")) {
                c.scenario.landmarks.push_back(
                    {fixed_vec<3>(lm.at("position_m"), "position_m"), kind_from_string(lm.at("kind").get<std::string>())});
            }
        }
        read(sc, "speed_of_light_mps", c.scenario.speed_of_light);

        const json& mo = section(j, "motion");
        read(mo, "speed_mps", c.motion.speed);
        read(mo, "turn_rate_radps", c.motion.turn_rate);
        read(mo, "period_s", c.motion.period);
        if (mo.contains("process_noise_var"))
            c.motion.process_noise = fixed_vec<4>(mo.at("process_noise_var"), "process_noise_var").asDiagonal();

        const json& se = section(j, "sensor");
        double range_var = c.sensor.base_noise(0, 0);
        double angle_var = c.sensor.base_noise(1, 1);
        read(se, "range_var_m2", range_var);
        read(se, "angle_var_rad2", angle_var);
        c.sensor.base_noise.setZero();
        c.sensor.base_noise(0, 0) = range_var;
        for (int i = 1; i < 5; ++i) c.sensor.base_noise(i, i) = angle_var;
        read(se, "sigma_d_mps", c.sensor.sigma_d);
        read(se, "detection_prob", c.sensor.detection_prob);
        read(se, "clutter_rate", c.sensor.clutter_rate);
        read(se, "clutter_lo", c.sensor.clutter_region.lo);
        read(se, "clutter_hi", c.sensor.clutter_region.hi);
        read(se, "doppler", c.sensor.with_doppler);

        const json& fi = section(j, "filter");
        read(fi, "gamma", c.filter.gamma);
        read(fi, "prune_r", c.filter.prune_r);
        read(fi, "gate", c.filter.gate);
        read(fi, "max_components", c.filter.max_components);
        read(fi, "report_r", c.filter.report_r);
        read(fi, "kind_confidence", c.filter.kind_confidence);
        read_vec<3>(fi, "birth_region_lo_m", c.undetected.lo);
        read_vec<3>(fi, "birth_region_hi_m", c.undetected.hi);
        read(fi, "birth_expected_count", c.undetected.expected_count);

        const json& go = section(j, "gospa");
        read(go, "cutoff_m", c.gospa.cutoff);
        read(go, "order", c.gospa.order);
        read(go, "alpha", c.gospa.alpha);

        const json& in = section(j, "init");
        if (in.contains("ue_state")) {
            const Vec4 s = fixed_vec<4>(in.at("ue_state"), "ue_state");
            c.init = {s(0), s(1), s(2), s(3)};
        }
        if (in.contains("ue_cov_diag")) c.init_cov = fixed_vec<4>(in.at("ue_cov_diag"), "ue_cov_diag").asDiagonal();

        const json& bo = section(j, "bounds");
        read(bo, "lm_prior_var_m2", c.lm_prior_var);
        read(bo, "sigma_d_grid_mps", c.sigma_d_grid);

        read(j, "steps", c.steps);
        read(j, "truth_noise", c.truth_noise);
        read(j, "runs", c.runs);
        read(j, "base_seed", c.base_seed);
        read(j, "workers", c.workers);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const InvalidKind& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return run_config_from_json(j);
}

}  // namespace radioslam
