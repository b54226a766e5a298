#include "radioslam/harness.hpp"

#include "radioslam/dynamics.hpp"
#include "radioslam/errors.hpp"
#include "radioslam/pmb_filter.hpp"
#include "radioslam/sensing.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace radioslam {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<UEState> run_truth(const RunConfig& cfg, std::uint64_t seed) {
    return simulate_trajectory(cfg.init, cfg.motion, cfg.steps, cfg.truth_noise, derive_seed(seed, 0));
}

Scan run_scan(const RunConfig& cfg, std::uint64_t seed, int step, const UEState& truth) {
    return generate_scan(cfg.scenario, truth, cfg.motion.speed, cfg.sensor,
                         derive_seed(seed, static_cast<std::uint64_t>(step) + 1));
}

namespace {

std::vector<Vec3> truth_positions(const Scenario& s, LandmarkKind kind) {
    std::vector<Vec3> out;
    for (const auto& lm : s.landmarks)
        if (lm.kind == kind) out.push_back(lm.position);
    return out;
}

std::vector<Vec3> estimate_positions(const Estimate& e, LandmarkKind kind) {
    std::vector<Vec3> out;
    for (const auto& lm : e.map)
        if (lm.kind == kind) out.push_back(lm.position);
    return out;
}

}  // namespace

RunResult run_single(const RunConfig& cfg, int index) {
    RunResult res;
    res.seed = run_seed(cfg.base_seed, index);
    res.truth = run_truth(cfg, res.seed);
    const FilterConfig fcfg = cfg.filter_config();
    const auto va_truth = truth_positions(cfg.scenario, LandmarkKind::VA);
    const auto sp_truth = truth_positions(cfg.scenario, LandmarkKind::SP);

    PMBBelief belief = initial_belief(cfg.init, cfg.init_cov, cfg.undetected);
    for (int k = 0; k < cfg.steps; ++k) {
        belief = predict(belief, cfg.motion);
        const Scan scan = run_scan(cfg, res.seed, k, res.truth[static_cast<std::size_t>(k)]);
        UpdateResult up = update(belief, scan.measurements, fcfg, scan.truth_assoc);
        res.da_weight.push_back(correct_da_weight(up, scan.truth_assoc));
        belief = std::move(up.belief);

        const Estimate est = estimate(belief, fcfg.report_r);
        res.estimate.push_back(est.ue);
        res.metrics.gospa_va.push_back(gospa(va_truth, estimate_positions(est, LandmarkKind::VA), cfg.gospa).total);
        res.metrics.gospa_sp.push_back(gospa(sp_truth, estimate_positions(est, LandmarkKind::SP), cfg.gospa).total);
    }
    res.metrics.rmse = rmse(res.truth, res.estimate);
    double w = 0.0;
    for (double d : res.da_weight) w += d;
    res.metrics.correct_da_weight = res.da_weight.empty() ? 0.0 : w / static_cast<double>(res.da_weight.size());
    return res;
}

void RunReport::aggregate() {
    const std::size_t steps = runs.empty() ? 0 : runs.front().metrics.gospa_va.size();
    mean_gospa_va.assign(steps, 0.0);
    mean_gospa_sp.assign(steps, 0.0);
    std::vector<UEState> all_truth, all_est;
    mean_da_weight = 0.0;
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < steps; ++k) {
            mean_gospa_va[k] += r.metrics.gospa_va[k];
            mean_gospa_sp[k] += r.metrics.gospa_sp[k];
        }
        all_truth.insert(all_truth.end(), r.truth.begin(), r.truth.end());
        all_est.insert(all_est.end(), r.estimate.begin(), r.estimate.end());
        mean_da_weight += r.metrics.correct_da_weight;
    }
    const double n = runs.empty() ? 1.0 : static_cast<double>(runs.size());
    for (auto& g : mean_gospa_va) g /= n;
    for (auto& g : mean_gospa_sp) g /= n;
    mean_da_weight /= n;
    rmse = radioslam::rmse(all_truth, all_est);
}

RunReport run_monte_carlo(const RunConfig& cfg) {
    cfg.validate();
    RunReport report;
    report.config = cfg;
    report.runs.resize(static_cast<std::size_t>(cfg.runs));

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int i = next++; i < cfg.runs; i = next++) {
            try {
                report.runs[static_cast<std::size_t>(i)] = run_single(cfg, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.runs;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    report.aggregate();
    return report;
}

json report_to_json(const RunReport& report) {
    json j;
    j["tool_version"] = kToolVersion;
    j["config"] = to_json(report.config);
    j["aggregate"] = {{"mean_gospa_va_m", report.mean_gospa_va},
                      {"mean_gospa_sp_m", report.mean_gospa_sp},
                      {"final_gospa_va_m", report.mean_gospa_va.empty() ? 0.0 : report.mean_gospa_va.back()},
                      {"final_gospa_sp_m", report.mean_gospa_sp.empty() ? 0.0 : report.mean_gospa_sp.back()},
                      {"pos_rmse_m", report.rmse.pos_m},
                      {"heading_rmse_rad", report.rmse.heading_rad},
                      {"heading_rmse_deg", report.rmse.heading_rad * 180.0 / kPi},
                      {"bias_rmse_m", report.rmse.bias_m},
                      {"mean_correct_da_weight", report.mean_da_weight}};
    json runs = json::array();
    for (const auto& r : report.runs) {
        runs.push_back({{"seed", r.seed},
                        {"gospa_va_m", r.metrics.gospa_va},
                        {"gospa_sp_m", r.metrics.gospa_sp},
                        {"pos_rmse_m", r.metrics.rmse.pos_m},
                        {"heading_rmse_rad", r.metrics.rmse.heading_rad},
                        {"bias_rmse_m", r.metrics.rmse.bias_m},
                        {"correct_da_weight", r.metrics.correct_da_weight},
                        {"correct_da_weight_per_step", r.da_weight}});
    }
    j["runs"] = std::move(runs);
    return j;
}

void write_series_csv(std::ostream& os, const RunReport& report) {
    os << "k,GOSPA_VA_m,GOSPA_SP_m\n" << std::setprecision(15);
    for (std::size_t k = 0; k < report.mean_gospa_va.size(); ++k)
        os << (k + 1) << ',' << report.mean_gospa_va[k] << ',' << report.mean_gospa_sp[k] << '\n';
}

void write_runs_csv(std::ostream& os, const RunReport& report) {
    os << "run,seed,pos_rmse_m,heading_rmse_rad,bias_rmse_m,correct_da_weight,final_GOSPA_VA_m,final_GOSPA_SP_m\n"
       << std::setprecision(15);
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const auto& r = report.runs[i];
        os << i << ',' << r.seed << ',' << r.metrics.rmse.pos_m << ',' << r.metrics.rmse.heading_rad << ','
           << r.metrics.rmse.bias_m << ',' << r.metrics.correct_da_weight << ','
           << (r.metrics.gospa_va.empty() ? 0.0 : r.metrics.gospa_va.back()) << ','
           << (r.metrics.gospa_sp.empty() ? 0.0 : r.metrics.gospa_sp.back()) << '\n';
    }
}

ReportSummary summarize(const json& report) {
    try {
        const json& a = report.at("aggregate");
        return {a.at("final_gospa_va_m").get<double>(), a.at("final_gospa_sp_m").get<double>(),
                a.at("pos_rmse_m").get<double>(),       a.at("heading_rmse_rad").get<double>(),
                a.at("bias_rmse_m").get<double>(),      a.at("mean_correct_da_weight").get<double>()};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("not a run report: ") + e.what());
    }
}

void write_compare_csv(std::ostream& os, const ReportSummary& a, const ReportSummary& b) {
    os << "metric,a,b,b_minus_a\n" << std::setprecision(15);
    auto row = [&](const char* name, double x, double y) { os << name << ',' << x << ',' << y << ',' << (y - x) << '\n'; };
    row("final_gospa_va_m", a.final_gospa_va, b.final_gospa_va);
    row("final_gospa_sp_m", a.final_gospa_sp, b.final_gospa_sp);
    row("pos_rmse_m", a.pos_rmse_m, b.pos_rmse_m);
    row("heading_rmse_rad", a.heading_rmse_rad, b.heading_rmse_rad);
    row("bias_rmse_m", a.bias_rmse_m, b.bias_rmse_m);
    row("mean_correct_da_weight", a.mean_da_weight, b.mean_da_weight);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path.string());
    out << content;
    if (!out) throw IOError("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + " is not valid JSON: " + e.what());
    }
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
    return p.parent_path() / (p.stem().string() + suffix);
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
    CLI::App app{"Doppler-aided bistatic radio SLAM: bounds and EK-PMB filter experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string doppler;
    std::vector<double> sigma_d;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> workers;
    std::vector<std::string> reports;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--out", out_path, "output path");
    };
    auto add_sim = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "base seed");
        cmd->add_option("--doppler", doppler, "use Doppler measurements")->check(CLI::IsMember({"on", "off"}));
    };

    CLI::App* bounds = app.add_subcommand("bounds", "posterior CRB sweep over sigma_d (CSV)");
    add_common(bounds);
    bounds->add_option("--sigma-d", sigma_d, "comma-separated sigma_d grid [m/s]")->delimiter(',');

    CLI::App* simulate = app.add_subcommand("simulate", "write one truth trajectory and its scans");
    add_common(simulate);
    add_sim(simulate);

    CLI::App* run = app.add_subcommand("run", "Monte-Carlo filter experiment (JSON + CSV)");
    add_common(run);
    add_sim(run);
    run->add_option("--sigma-d", sigma_d, "Doppler noise std [m/s]")->expected(1);
    run->add_option("--runs", runs, "number of Monte-Carlo runs");
    run->add_option("--workers", workers, "worker threads (0: all cores)");

    CLI::App* compare = app.add_subcommand("compare", "delta between two run reports");
    compare->add_option("reports", reports, "two report JSON files")->expected(2)->required();
    compare->add_option("--out", out_path, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto load = [&] {
            RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
            if (seed) cfg.base_seed = *seed;
            if (!doppler.empty()) cfg.sensor.with_doppler = doppler == "on";
            if (runs) cfg.runs = *runs;
            if (workers) cfg.workers = *workers;
            cfg.validate();
            return cfg;
        };

        if (bounds->parsed()) {
            RunConfig cfg = load();
            const std::vector<double> grid = sigma_d.empty() ? cfg.sigma_d_grid : sigma_d;
            const auto table = sweep_sigma_d(cfg.bounds_setup(), grid);
            std::ostringstream csv;
            write_bounds_csv(csv, table);
            if (out_path.empty()) std::cout << csv.str(); else write_file(out_path, csv.str());
            std::cerr << std::setprecision(6);
            for (const auto& s : table) {
                const BoundsReport f = s.aggregate(Aggregation::Final);
                std::cerr << (s.doppler_enabled ? "sigma_d=" + std::to_string(s.sigma_d) : std::string("no Doppler"))
                          << "  final: PEB " << f.peb << " m, HEB " << f.heb_deg() << " deg, CEB " << f.ceb
                          << " m, LEB " << f.leb_avg << " m\n";
            }
            return 0;
        }

        if (simulate->parsed()) {
            if (out_path.empty()) throw ConfigError("simulate needs --out <directory>");
            RunConfig cfg = load();
            const std::filesystem::path dir(out_path);
            std::filesystem::create_directories(dir);
            const std::uint64_t s = run_seed(cfg.base_seed, 0);
            const auto truth = run_truth(cfg, s);
            std::ostringstream t, z;
            t << "k,x_m,y_m,heading_rad,bias_m\n" << std::setprecision(15);
            z << "k,source,range_m,aoa_az_rad,aoa_el_rad,aod_az_rad,aod_el_rad,doppler_mps\n" << std::setprecision(15);
            for (int k = 0; k < cfg.steps; ++k) {
                const UEState& ue = truth[static_cast<std::size_t>(k)];
                t << (k + 1) << ',' << ue.x << ',' << ue.y << ',' << ue.heading << ',' << ue.clock_bias << '\n';
                const Scan scan = run_scan(cfg, s, k, ue);
                for (std::size_t j = 0; j < scan.measurements.size(); ++j) {
                    const auto& mz = scan.measurements[j];
                    z << (k + 1) << ',' << scan.truth_assoc[j] << ',' << mz.range << ',' << mz.aoa_az << ','
                      << mz.aoa_el << ',' << mz.aod_az << ',' << mz.aod_el << ',';
                    if (mz.doppler) z << *mz.doppler;
                    z << '\n';
                }
            }
            write_file(dir / "truth.csv", t.str());
            write_file(dir / "scans.csv", z.str());
            write_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
            return 0;
        }

        if (run->parsed()) {
            if (out_path.empty()) throw ConfigError("run needs --out <report.json>");
            RunConfig cfg = load();
            if (!sigma_d.empty()) cfg.sensor.sigma_d = sigma_d.front();
            cfg.validate();
            const RunReport report = run_monte_carlo(cfg);
            const std::filesystem::path out(out_path);
            if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
            write_file(out, report_to_json(report).dump(2) + "\n");
            std::ostringstream series, per_run;
            write_series_csv(series, report);
            write_runs_csv(per_run, report);
            write_file(sibling(out, "_series.csv"), series.str());
            write_file(sibling(out, "_runs.csv"), per_run.str());
            std::cerr << std::setprecision(6) << "final GOSPA VA " << report.mean_gospa_va.back() << " m, SP "
                      << report.mean_gospa_sp.back() << " m; RMSE pos " << report.rmse.pos_m << " m, heading "
                      << report.rmse.heading_rad << " rad, bias " << report.rmse.bias_m
                      << " m; correct-DA weight " << report.mean_da_weight << '\n';
            return 0;
        }

        if (compare->parsed()) {
            const ReportSummary a = summarize(read_json_file(reports[0]));
            const ReportSummary b = summarize(read_json_file(reports[1]));
            std::ostringstream csv;
            write_compare_csv(csv, a, b);
            if (out_path.empty()) std::cout << csv.str(); else write_file(out_path, csv.str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace radioslam
