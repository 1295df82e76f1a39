#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocsim/analysis.hpp"
#include "ocsim/channel.hpp"
#include "ocsim/detector.hpp"
#include "ocsim/estimator.hpp"
#include "ocsim/types.hpp"
#include "ocsim/waveform.hpp"

namespace ocsim {

enum class Scenario { InterferenceFree, InterferencePresent };
std::string scenario_name(Scenario s);

/// Full experiment description. Defaults follow the reference operating
/// point: two antennas, root-raised-cosine 0.25 shaping on both links,
/// doubled interferer bandwidth, unit-SNR-normalized interference power,
/// 51 pilots, QPSK.
struct ExperimentConfig {
    Scenario scenario = Scenario::InterferencePresent;
    int n_r = 2;
    std::vector<double> alpha = {0.99};
    std::vector<double> snr_db = {10, 20, 30, 40, 50, 60};
    int n_p = 51;
    std::vector<int> n_d = {3};
    int bandwidth_ratio = 2;     // M
    int interferer_span = 4;     // L, multiple of M
    double freq_offset_norm = 1.0;  // freq_offset * T_d
    double roll_off = 0.25;
    double inr_db = 0.0;         // interference-to-signal power ratio
    std::vector<DetectorKind> detectors = {DetectorKind::SMap, DetectorKind::IMap,
                                           DetectorKind::Odd, DetectorKind::Iterative};
    int trials = 10000;
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
    int max_iters = 10;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
    std::string to_json(bool pretty = false) const;
    static ExperimentConfig from_json(const std::string& json_text);
    std::string hash() const;

    /// desk: quick profile (10^3 trials, 21 pilots); paper: full-scale
    /// profile (10^4 trials, 51 pilots).
    void apply_profile(const std::string& name);
};

/// One grid point of a sweep.
struct ConfigPoint {
    Scenario scenario;
    double alpha;
    double snr_db;
    int n_d;

    double sigma2() const { return std::pow(10.0, -snr_db / 10.0); }
};

/// Per-trial raw metrics; aggregated deterministically after all trials.
struct TrialMetrics {
    double sq_channel_error = 0.0;   // sum over pilots and antennas
    int pilot_antenna_count = 0;
    double residual_power = 0.0;     // per antenna per pilot
    std::map<std::string, int> symbol_errors;   // per detector
    std::map<std::string, int> symbols_counted;
    std::vector<int> iter_symbol_errors;  // iterative detector, per iteration
    std::vector<double> iter_sq_channel_error;  // per iteration, per pilot-antenna
    int iterations_used = 0;
    bool converged = true;
    bool failed = false;
    std::string failure_kind;
};

struct MetricRow {
    std::string scenario;
    std::string detector;
    double alpha = 0.0;
    int n_d = 0;
    double snr_db = 0.0;
    double cmse = 0.0;
    double ser = 0.0;
    double ser_ci_halfwidth = 0.0;
    double sinr_after_db = 0.0;
    double residual_power = 0.0;
    double tp = 0.0;
    double iterations_mean = 0.0;
    long trials = 0;
    long failed_trials = 0;
    std::uint64_t seed = 0;
    double cmse_ci_halfwidth = 0.0;
    std::vector<double> ser_by_iteration;   // iterative rows only
    std::vector<double> cmse_by_iteration;  // iterative rows only
};

struct MetricTable {
    std::vector<MetricRow> rows;
    std::string config_hash;
    std::uint64_t master_seed = 0;

    std::string to_csv() const;
    static const std::vector<std::string>& csv_columns();
};

/// Precomputed per-run state shared by all trials (coupling vector, pulse
/// shapes, interference scaling).
struct RunContext {
    EicVector eic;
    double power_scale = 1.0;
    int bandwidth_ratio = 2;
    int n_r = 2;

    static RunContext build(const ExperimentConfig& cfg);
};

/// Execute one frame end to end: synthesize, estimate, cancel, detect.
TrialMetrics run_trial(const ExperimentConfig& cfg, const RunContext& ctx,
                       const ConfigPoint& point, long trial_index);

/// Cartesian sweep over scenario grid points with trial-level parallelism
/// and a deterministic reduction. Identical seeds produce identical tables
/// regardless of the worker count.
MetricTable run_sweep(const ExperimentConfig& cfg);

/// Write the table as CSV + JSON plus per-figure views and a manifest.
/// Returns the written file paths.
std::vector<std::string> emit_outputs(const MetricTable& table,
                                      const ExperimentConfig& cfg,
                                      const std::string& out_dir);

/// Re-execute the sweep point behind one table row from its recorded seed
/// and config; returns the freshly computed row for comparison.
MetricRow replay_row(const ExperimentConfig& cfg, const MetricRow& row);

}  // namespace ocsim
