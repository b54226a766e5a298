#pragma once

#include "radioslam/config.hpp"
#include "radioslam/metrics.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace radioslam {

inline constexpr const char* kToolVersion = "radioslam 1.0.0";

/// Outcome of one Monte-Carlo run.
struct RunResult {
    std::uint64_t seed = 0;
    MetricsSeries metrics;
    std::vector<UEState> truth;
    std::vector<UEState> estimate;
    std::vector<double> da_weight;  // correct-association weight per step
};

struct RunReport {
    RunConfig config;
    std::vector<RunResult> runs;

    // Aggregates over runs.
    std::vector<double> mean_gospa_va;  // per step
    std::vector<double> mean_gospa_sp;  // per step
    UERmse rmse;                        // pooled over runs and steps
    double mean_da_weight = 0.0;

    /// Recomputes the aggregates from `runs`.
    void aggregate();
};

/// Seed of run `index`; Doppler on/off variants share it.
inline std::uint64_t run_seed(std::uint64_t base_seed, int index) {
    return base_seed + static_cast<std::uint64_t>(index);
}

/// Independent sub-stream seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Truth trajectory s_1..s_K of one run.
std::vector<UEState> run_truth(const RunConfig& cfg, std::uint64_t seed);

/// Scan observed at step k (0-based) of one run.
Scan run_scan(const RunConfig& cfg, std::uint64_t seed, int step, const UEState& truth);

RunResult run_single(const RunConfig& cfg, int index);

/// Runs every Monte-Carlo repetition (concurrently, up to cfg.workers) and
/// aggregates. Deterministic in (cfg, cfg.base_seed).
RunReport run_monte_carlo(const RunConfig& cfg);

nlohmann::json report_to_json(const RunReport& report);
/// Per-step aggregate CSV: k, GOSPA_VA_m, GOSPA_SP_m.
void write_series_csv(std::ostream& os, const RunReport& report);
/// Per-run CSV: run, seed, pos_rmse_m, heading_rmse_rad, bias_rmse_m,
/// correct_da_weight, final GOSPA for VA and SP.
void write_runs_csv(std::ostream& os, const RunReport& report);

/// Aggregate scalars of a report JSON used by `compare`.
struct ReportSummary {
    double final_gospa_va = 0.0;
    double final_gospa_sp = 0.0;
    double pos_rmse_m = 0.0;
    double heading_rmse_rad = 0.0;
    double bias_rmse_m = 0.0;
    double mean_da_weight = 0.0;
};

ReportSummary summarize(const nlohmann::json& report);
/// CSV rows metric, a, b, b_minus_a.
void write_compare_csv(std::ostream& os, const ReportSummary& a, const ReportSummary& b);

/// Command-line entry point. Returns 0 on success, 2 on usage or config
/// errors, 1 on runtime failures.
int cli_dispatch(int argc, char** argv);

}  // namespace radioslam
