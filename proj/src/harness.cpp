#include "ocsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ocsim {

using nlohmann::json;

std::string scenario_name(Scenario s) {
    return s == Scenario::InterferenceFree ? "interference-free"
                                           : "interference-present";
}

namespace {

Scenario scenario_from_name(const std::string& name) {
    if (name == "interference-free") return Scenario::InterferenceFree;
    if (name == "interference-present") return Scenario::InterferencePresent;
    throw ConfigError("unknown scenario: " + name);
}

DetectorKind detector_from_name(const std::string& name) {
    if (name == "smap") return DetectorKind::SMap;
    if (name == "imap") return DetectorKind::IMap;
    if (name == "odd") return DetectorKind::Odd;
    if (name == "iterative") return DetectorKind::Iterative;
    throw ConfigError("unknown detector: " + name);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n_r < 1) throw ConfigError("n_r must be at least 1");
    if (alpha.empty()) throw ConfigError("alpha list must not be empty");
    for (double a : alpha)
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    if (snr_db.empty()) throw ConfigError("snr_db grid must not be empty");
    if (n_p < 2) throw ConfigError("n_p must be at least 2");
    if (n_d.empty()) throw ConfigError("n_d list must not be empty");
    for (int d : n_d)
        if (d < 1) throw ConfigError("n_d must be at least 1");
    if (bandwidth_ratio < 1) throw ConfigError("bandwidth_ratio must be >= 1");
    if (interferer_span < bandwidth_ratio ||
        interferer_span % bandwidth_ratio != 0)
        throw ConfigError("interferer_span must be a positive multiple of bandwidth_ratio");
    if (!(roll_off >= 0.0 && roll_off <= 1.0))
        throw ConfigError("roll_off must lie in [0, 1]");
    if (detectors.empty()) throw ConfigError("detector set must not be empty");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
}

std::string ExperimentConfig::to_json(bool pretty) const {
    json j;
    j["scenario"] = scenario_name(scenario);
    j["n_r"] = n_r;
    j["alpha"] = alpha;
    j["snr_db"] = snr_db;
    j["n_p"] = n_p;
    j["n_d"] = n_d;
    j["bandwidth_ratio"] = bandwidth_ratio;
    j["interferer_span"] = interferer_span;
    j["freq_offset_norm"] = freq_offset_norm;
    j["roll_off"] = roll_off;
    j["inr_db"] = inr_db;
    std::vector<std::string> det;
    for (DetectorKind k : detectors) det.push_back(detector_name(k));
    j["detectors"] = det;
    j["trials"] = trials;
    j["master_seed"] = master_seed;
    j["out_dir"] = out_dir;
    j["max_iters"] = max_iters;
    j["threads"] = threads;
    return pretty ? j.dump(2) : j.dump();
}

ExperimentConfig ExperimentConfig::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("scenario"))
            cfg.scenario = scenario_from_name(j["scenario"].get<std::string>());
        cfg.n_r = j.value("n_r", cfg.n_r);
        if (j.contains("alpha")) cfg.alpha = j["alpha"].get<std::vector<double>>();
        if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();
        cfg.n_p = j.value("n_p", cfg.n_p);
        if (j.contains("n_d")) cfg.n_d = j["n_d"].get<std::vector<int>>();
        cfg.bandwidth_ratio = j.value("bandwidth_ratio", cfg.bandwidth_ratio);
        cfg.interferer_span = j.value("interferer_span", cfg.interferer_span);
        cfg.freq_offset_norm = j.value("freq_offset_norm", cfg.freq_offset_norm);
        cfg.roll_off = j.value("roll_off", cfg.roll_off);
        cfg.inr_db = j.value("inr_db", cfg.inr_db);
        if (j.contains("detectors")) {
            cfg.detectors.clear();
            for (const auto& name : j["detectors"])
                cfg.detectors.push_back(detector_from_name(name.get<std::string>()));
        }
        cfg.trials = j.value("trials", cfg.trials);
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.max_iters = j.value("max_iters", cfg.max_iters);
        cfg.threads = j.value("threads", cfg.threads);
        if (j.contains("profile")) cfg.apply_profile(j["profile"].get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field failure: ") + e.what());
    }
    return cfg;
}

std::string ExperimentConfig::hash() const {
    std::ostringstream os;
    os << std::hex << fnv1a(to_json());
    return os.str();
}

void ExperimentConfig::apply_profile(const std::string& name) {
    if (name == "paper") {
        trials = 10000;
        n_p = 51;
    } else if (name == "desk") {
        trials = 1000;
        n_p = 21;
    } else {
        throw ConfigError("unknown profile: " + name);
    }
}

RunContext RunContext::build(const ExperimentConfig& cfg) {
    cfg.validate();
    RunContext ctx;
    ctx.bandwidth_ratio = cfg.bandwidth_ratio;
    ctx.n_r = cfg.n_r;
    if (cfg.scenario == Scenario::InterferencePresent) {
        PulseShape p_d;
        p_d.roll_off = cfg.roll_off;
        PulseShape p_i = p_d;
        AlignmentConfig align;
        align.bandwidth_ratio = cfg.bandwidth_ratio;
        align.interferer_span = cfg.interferer_span;
        align.freq_offset = cfg.freq_offset_norm / p_d.symbol_period;
        align.time_offset = -p_d.symbol_period;  // center the coupled symbols
        p_i.symbol_period = p_d.symbol_period / cfg.bandwidth_ratio;
        ctx.eic = compute_eic(p_d, p_i, align);
        const double inr = std::pow(10.0, cfg.inr_db / 10.0);
        ctx.power_scale = std::sqrt(inr / ctx.eic.c.squaredNorm());
    }
    return ctx;
}

namespace {

std::string point_key(const ConfigPoint& p) {
    std::ostringstream os;
    os.precision(17);
    os << scenario_name(p.scenario) << '|' << p.alpha << '|' << p.n_d << '|'
       << p.snr_db;
    return os.str();
}

std::uint64_t point_seed(const ExperimentConfig& cfg, const ConfigPoint& p) {
    return derive_seed(cfg.master_seed, fnv1a(point_key(p)));
}

int count_symbol_errors(const std::vector<cxd>& detected,
                        const std::vector<cxd>& truth) {
    int errors = 0;
    for (std::size_t i = 0; i < detected.size(); ++i)
        if (std::abs(detected[i] - truth[i]) > 1e-9) ++errors;
    return errors;
}

double pilot_sq_error(const MatrixXcd& h_est_pilots, const FrameObservation& obs) {
    double acc = 0.0;
    for (int n = 0; n < obs.layout.n_p; ++n) {
        acc += (h_est_pilots.row(n) - obs.trace.h.row(obs.layout.pilot_position(n)))
                   .squaredNorm();
    }
    return acc;
}

/// Pilot-position squared error when the estimate covers the whole frame.
double pilot_sq_error_frame(const MatrixXcd& h_est_frame, const FrameObservation& obs) {
    double acc = 0.0;
    for (int n = 0; n < obs.layout.n_p; ++n) {
        const int k = obs.layout.pilot_position(n);
        acc += (h_est_frame.row(k) - obs.trace.h.row(k)).squaredNorm();
    }
    return acc;
}

TrialMetrics run_trial_impl(const ExperimentConfig& cfg, const RunContext& ctx,
                            const ConfigPoint& point, long trial_index,
                            const OddDetector* odd) {
    TrialMetrics m;
    try {
        Rng rng(derive_seed(point_seed(cfg, point), static_cast<std::uint64_t>(trial_index)));

        FrameLayout layout;
        layout.n_p = cfg.n_p;
        layout.n_d = point.n_d;
        const int K = layout.frame_length();
        const double sigma2 = point.sigma2();
        const bool with_b = point.scenario == Scenario::InterferencePresent;

        FadingParams fading;
        fading.alpha = point.alpha;
        fading.n_r = cfg.n_r;
        fading.sigma2 = sigma2;

        std::vector<MatrixXcd> B;
        VectorXcd c;
        if (with_b) {
            InterferenceSource src;
            src.h_i.resize(cfg.n_r);
            for (int r = 0; r < cfg.n_r; ++r)
                src.h_i(r) = std::exp(cxd(0.0, 2.0 * M_PI * rng.uniform()));
            src.power_scale = ctx.power_scale;
            const int L = ctx.eic.size();
            src.symbols.resize(static_cast<std::size_t>(ctx.bandwidth_ratio) * (K - 1) + L);
            for (auto& b : src.symbols) b = rng.qpsk();
            B.resize(K);
            for (int k = 0; k < K; ++k)
                B[k] = build_interference_matrix(src, k, L, ctx.bandwidth_ratio);
            c = ctx.eic.c;
        }

        const ChannelTrace trace = evolve_channel(fading, K, rng);
        const std::vector<cxd> symbols = generate_frame(layout, rng);
        FrameObservation obs =
            synthesize_observations(symbols, trace, B, c, sigma2, rng);
        obs.layout = layout;

        const PilotBlock block = pilot_block(obs, point.alpha);
        const EstimationResult est = estimate_frame(block);

        m.sq_channel_error = pilot_sq_error(est.channels.h_tilde, obs);
        m.pilot_antenna_count = layout.n_p * cfg.n_r;
        if (with_b) {
            const VectorXcd err = c - est.eic.c_tilde;
            double acc = 0.0;
            for (int n = 0; n < layout.n_p; ++n)
                acc += (block.B[n] * err).squaredNorm();
            m.residual_power = acc / (static_cast<double>(layout.n_p) * cfg.n_r);
        }

        std::vector<cxd> data_truth;
        data_truth.reserve(static_cast<std::size_t>(layout.n_p - 1) * layout.n_d);
        for (int k = 0; k < K; ++k)
            if (!layout.is_pilot(k)) data_truth.push_back(symbols[k]);

        const auto intervals =
            make_intervals(obs, est.channels.h_tilde, est.eic.c_tilde, point.alpha);

        for (DetectorKind kind : cfg.detectors) {
            const std::string name = detector_name(kind);
            std::vector<cxd> detected;
            switch (kind) {
                case DetectorKind::SMap:
                case DetectorKind::IMap: {
                    detected.reserve(data_truth.size());
                    for (const auto& iv : intervals) {
                        const DetectedFrame slice = kind == DetectorKind::SMap
                                                        ? smap_detect(iv)
                                                        : imap_detect(iv);
                        detected.insert(detected.end(), slice.x_hat.begin(),
                                        slice.x_hat.end());
                    }
                    break;
                }
                case DetectorKind::Odd: {
                    MatrixXcd y_clean = obs.y;
                    if (with_b) {
                        for (int k = 0; k < K; ++k)
                            y_clean.row(k) -=
                                (obs.B[k] * est.eic.c_tilde).transpose();
                    }
                    if (odd) {
                        detected = odd->detect(y_clean, layout).x_hat;
                    } else {
                        detected = OddDetector(layout, point.alpha, sigma2)
                                       .detect(y_clean, layout)
                                       .x_hat;
                    }
                    break;
                }
                case DetectorKind::Iterative: {
                    IterativeOptions iopts;
                    iopts.max_iters = cfg.max_iters;
                    const IterativeResult res =
                        iterative_detect(obs, point.alpha, iopts);
                    detected = res.frame.x_hat;
                    m.iterations_used = res.frame.iterations_used;
                    m.converged = res.frame.converged;
                    for (const auto& pass : res.per_iteration)
                        m.iter_symbol_errors.push_back(
                            count_symbol_errors(pass, data_truth));
                    for (std::size_t p = 0; p < res.estimates.size(); ++p) {
                        const MatrixXcd& h = res.estimates[p].channels.h_tilde;
                        const double sq = (p == 0) ? pilot_sq_error(h, obs)
                                                   : pilot_sq_error_frame(h, obs);
                        m.iter_sq_channel_error.push_back(
                            sq / (static_cast<double>(layout.n_p) * cfg.n_r));
                    }
                    break;
                }
            }
            m.symbol_errors[name] = count_symbol_errors(detected, data_truth);
            m.symbols_counted[name] = static_cast<int>(data_truth.size());
        }
    } catch (const Error& e) {
        m.failed = true;
        m.failure_kind = e.kind();
    }
    return m;
}

}  // namespace

TrialMetrics run_trial(const ExperimentConfig& cfg, const RunContext& ctx,
                       const ConfigPoint& point, long trial_index) {
    return run_trial_impl(cfg, ctx, point, trial_index, nullptr);
}

namespace {

MetricRow aggregate_point(const ExperimentConfig& cfg, const ConfigPoint& point,
                          const std::vector<TrialMetrics>& trials,
                          DetectorKind kind) {
    MetricRow row;
    row.scenario = scenario_name(point.scenario);
    row.detector = detector_name(kind);
    row.alpha = point.alpha;
    row.n_d = point.n_d;
    row.snr_db = point.snr_db;
    row.seed = point_seed(cfg, point);

    double sq_sum = 0.0, sq_sumsq = 0.0;
    long pa_count = 0;
    double residual_sum = 0.0;
    long completed = 0, failed = 0;
    long errors = 0, symbols = 0;
    double iters_sum = 0.0;
    std::vector<long> iter_errors;
    std::vector<double> iter_cmse;
    std::vector<long> iter_counts;

    for (const TrialMetrics& t : trials) {
        if (t.failed) {
            ++failed;
            continue;
        }
        ++completed;
        sq_sum += t.sq_channel_error;
        const double per = t.sq_channel_error / t.pilot_antenna_count;
        sq_sumsq += per * per;
        pa_count += t.pilot_antenna_count;
        residual_sum += t.residual_power;
        const auto it = t.symbol_errors.find(row.detector);
        if (it != t.symbol_errors.end()) {
            errors += it->second;
            symbols += t.symbols_counted.at(row.detector);
        }
        if (kind == DetectorKind::Iterative) {
            iters_sum += t.iterations_used;
            for (std::size_t k = 0;
                 k < t.iter_symbol_errors.size() || k < iter_errors.size(); ++k) {
                if (k >= iter_errors.size()) {
                    iter_errors.push_back(0);
                    iter_cmse.push_back(0.0);
                    iter_counts.push_back(0);
                }
                // a converged trial keeps contributing its final iterate
                const std::size_t kk = std::min(k, t.iter_symbol_errors.size() - 1);
                iter_errors[k] += t.iter_symbol_errors[kk];
                iter_cmse[k] += t.iter_sq_channel_error[std::min(
                    kk, t.iter_sq_channel_error.size() - 1)];
                iter_counts[k] += t.symbols_counted.at(row.detector);
            }
        }
    }

    row.trials = completed;
    row.failed_trials = failed;
    if (completed > 0 && pa_count > 0) {
        row.cmse = sq_sum / pa_count;
        const double mean_per = row.cmse;
        const double var =
            std::max(0.0, sq_sumsq / completed - mean_per * mean_per);
        row.cmse_ci_halfwidth = 1.96 * std::sqrt(var / completed);
        row.residual_power = residual_sum / completed;
        const double sigma2 = point.sigma2();
        row.sinr_after_db = 10.0 * std::log10(1.0 / (sigma2 + row.residual_power));
    }
    if (symbols > 0) {
        row.ser = static_cast<double>(errors) / symbols;
        row.ser_ci_halfwidth =
            1.96 * std::sqrt(row.ser * (1.0 - row.ser) / symbols);
        row.tp = throughput(row.ser, point.n_d, cfg.n_p);
    }
    if (kind == DetectorKind::Iterative && completed > 0) {
        row.iterations_mean = iters_sum / completed;
        for (std::size_t k = 0; k < iter_errors.size(); ++k) {
            row.ser_by_iteration.push_back(
                iter_counts[k] > 0
                    ? static_cast<double>(iter_errors[k]) / iter_counts[k]
                    : 0.0);
            row.cmse_by_iteration.push_back(iter_cmse[k] / completed);
        }
    }
    return row;
}

}  // namespace

MetricTable run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const RunContext ctx = RunContext::build(cfg);

    MetricTable table;
    table.config_hash = cfg.hash();
    table.master_seed = cfg.master_seed;

    int n_threads = cfg.threads > 0
                        ? cfg.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    for (double alpha : cfg.alpha) {
        for (int n_d : cfg.n_d) {
            for (double snr : cfg.snr_db) {
                const ConfigPoint point{cfg.scenario, alpha, snr, n_d};

                FrameLayout layout;
                layout.n_p = cfg.n_p;
                layout.n_d = n_d;
                std::optional<OddDetector> odd;
                if (std::find(cfg.detectors.begin(), cfg.detectors.end(),
                              DetectorKind::Odd) != cfg.detectors.end())
                    odd.emplace(layout, alpha, point.sigma2());

                std::vector<TrialMetrics> metrics(cfg.trials);
                auto worker = [&](long lo, long hi) {
                    for (long t = lo; t < hi; ++t)
                        metrics[t] = run_trial_impl(cfg, ctx, point, t,
                                                    odd ? &*odd : nullptr);
                };
                if (n_threads == 1 || cfg.trials < 2 * n_threads) {
                    worker(0, cfg.trials);
                } else {
                    std::vector<std::thread> pool;
                    const long chunk = (cfg.trials + n_threads - 1) / n_threads;
                    for (int w = 0; w < n_threads; ++w) {
                        const long lo = w * chunk;
                        const long hi = std::min<long>(cfg.trials, lo + chunk);
                        if (lo < hi) pool.emplace_back(worker, lo, hi);
                    }
                    for (auto& th : pool) th.join();
                }

                for (DetectorKind kind : cfg.detectors)
                    table.rows.push_back(aggregate_point(cfg, point, metrics, kind));
            }
        }
    }
    return table;
}

const std::vector<std::string>& MetricTable::csv_columns() {
    static const std::vector<std::string> cols = {
        "scenario", "detector", "alpha", "n_d", "snr_db",
        "cmse", "ser", "ser_ci_halfwidth", "sinr_after_db", "residual_power",
        "tp", "iterations_mean", "trials", "failed_trials", "seed",
        "cmse_ci_halfwidth"};
    return cols;
}

std::string MetricTable::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << cols[i] << (i + 1 < cols.size() ? ',' : '\n');
    for (const MetricRow& r : rows) {
        os << r.scenario << ',' << r.detector << ',' << r.alpha << ',' << r.n_d
           << ',' << r.snr_db << ',' << r.cmse << ',' << r.ser << ','
           << r.ser_ci_halfwidth << ',' << r.sinr_after_db << ','
           << r.residual_power << ',' << r.tp << ',' << r.iterations_mean << ','
           << r.trials << ',' << r.failed_trials << ',' << r.seed << ','
           << r.cmse_ci_halfwidth << '\n';
    }
    return os.str();
}

namespace {

json row_to_json(const MetricRow& r) {
    json j;
    j["scenario"] = r.scenario;
    j["detector"] = r.detector;
    j["alpha"] = r.alpha;
    j["n_d"] = r.n_d;
    j["snr_db"] = r.snr_db;
    j["cmse"] = r.cmse;
    j["ser"] = r.ser;
    j["ser_ci_halfwidth"] = r.ser_ci_halfwidth;
    j["sinr_after_db"] = r.sinr_after_db;
    j["residual_power"] = r.residual_power;
    j["tp"] = r.tp;
    j["iterations_mean"] = r.iterations_mean;
    j["trials"] = r.trials;
    j["failed_trials"] = r.failed_trials;
    j["seed"] = r.seed;
    j["cmse_ci_halfwidth"] = r.cmse_ci_halfwidth;
    if (!r.ser_by_iteration.empty()) {
        j["ser_by_iteration"] = r.ser_by_iteration;
        j["cmse_by_iteration"] = r.cmse_by_iteration;
    }
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path);
    out << content;
    if (!out) throw IoFailure("write failed for " + path);
}

}  // namespace

std::vector<std::string> emit_outputs(const MetricTable& table,
                                      const ExperimentConfig& cfg,
                                      const std::string& out_dir) {
    if (table.rows.empty()) throw ConfigError("refusing to emit an empty table");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoFailure("cannot create " + out_dir);

    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        write_file(path, content);
        written.push_back(path);
    };

    emit("metrics.csv", table.to_csv());

    json rows_json = json::array();
    for (const auto& r : table.rows) rows_json.push_back(row_to_json(r));
    emit("metrics.json", rows_json.dump(2) + "\n");

    std::ostringstream cmse, sinr, ser, ser_iter, tp;
    cmse.precision(12); sinr.precision(12); ser.precision(12);
    ser_iter.precision(12); tp.precision(12);
    cmse << "scenario,alpha,n_d,snr_db,cmse,cmse_ci_halfwidth\n";
    sinr << "scenario,alpha,n_d,snr_db,sinr_after_db,residual_power\n";
    ser << "scenario,detector,alpha,n_d,snr_db,ser,ser_ci_halfwidth\n";
    ser_iter << "scenario,alpha,n_d,snr_db,iteration,ser,cmse\n";
    tp << "scenario,detector,alpha,snr_db,n_d,pilot_density,tp\n";

    std::string last_channel_key;
    for (const auto& r : table.rows) {
        const std::string key = r.scenario + '|' + std::to_string(r.alpha) + '|' +
                                std::to_string(r.n_d) + '|' + std::to_string(r.snr_db);
        if (key != last_channel_key) {
            cmse << r.scenario << ',' << r.alpha << ',' << r.n_d << ',' << r.snr_db
                 << ',' << r.cmse << ',' << r.cmse_ci_halfwidth << '\n';
            sinr << r.scenario << ',' << r.alpha << ',' << r.n_d << ',' << r.snr_db
                 << ',' << r.sinr_after_db << ',' << r.residual_power << '\n';
            last_channel_key = key;
        }
        ser << r.scenario << ',' << r.detector << ',' << r.alpha << ',' << r.n_d
            << ',' << r.snr_db << ',' << r.ser << ',' << r.ser_ci_halfwidth << '\n';
        for (std::size_t k = 0; k < r.ser_by_iteration.size(); ++k) {
            ser_iter << r.scenario << ',' << r.alpha << ',' << r.n_d << ','
                     << r.snr_db << ',' << k << ',' << r.ser_by_iteration[k] << ','
                     << r.cmse_by_iteration[k] << '\n';
        }
        tp << r.scenario << ',' << r.detector << ',' << r.alpha << ',' << r.snr_db
           << ',' << r.n_d << ',' << 1.0 / (r.n_d + 1) << ',' << r.tp << '\n';
    }
    emit("cmse_vs_snr.csv", cmse.str());
    emit("sinr_vs_snr.csv", sinr.str());
    emit("ser_vs_snr.csv", ser.str());
    emit("ser_vs_iteration.csv", ser_iter.str());
    emit("tp_vs_pilot_density.csv", tp.str());

    json manifest;
    manifest["config"] = json::parse(cfg.to_json());
    manifest["config_hash"] = table.config_hash;
    manifest["master_seed"] = table.master_seed;
    manifest["sinr_averaging"] = "linear-then-db";
    json seeds = json::object();
    for (const auto& r : table.rows)
        seeds[r.scenario + "|" + r.detector + "|a=" + std::to_string(r.alpha) +
              "|nd=" + std::to_string(r.n_d) + "|snr=" + std::to_string(r.snr_db)] =
            r.seed;
    manifest["row_seeds"] = seeds;
    emit("manifest.json", manifest.dump(2) + "\n");
    return written;
}

MetricRow replay_row(const ExperimentConfig& cfg, const MetricRow& row) {
    ExperimentConfig single = cfg;
    single.scenario = scenario_from_name(row.scenario);
    single.alpha = {row.alpha};
    single.n_d = {row.n_d};
    single.snr_db = {row.snr_db};
    single.detectors = {detector_from_name(row.detector)};
    single.validate();

    const ConfigPoint point{single.scenario, row.alpha, row.snr_db, row.n_d};
    if (row.seed != 0 && point_seed(single, point) != row.seed)
        throw ConfigError("row seed does not match the supplied config/master seed");

    MetricTable t = run_sweep(single);
    return t.rows.at(0);
}

}  // namespace ocsim
