#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ocsim/analysis.hpp"
#include "ocsim/harness.hpp"

namespace {

using namespace ocsim;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Shared experiment flags; every subcommand that runs the simulator takes
/// the same set, and a JSON/TOML config file may supply any of them.
struct CliConfig {
    ExperimentConfig cfg;
    std::string profile;
    std::string config_path;
    std::string scenario = "interference-present";
    std::vector<std::string> detectors;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path,
                        "JSON or TOML config file (flags override it)");
        app->add_option("--profile", profile, "preset: paper or desk")
            ->check(CLI::IsMember({"paper", "desk"}));
        app->add_option("--scenario", scenario, "interference-free or interference-present");
        app->add_option("--nr", cfg.n_r, "receive antennas");
        app->add_option("--alpha", cfg.alpha, "channel correlation coefficients");
        app->add_option("--snr-db", cfg.snr_db, "SNR grid in dB");
        app->add_option("--np", cfg.n_p, "pilots per frame");
        app->add_option("--nd", cfg.n_d, "data symbols between pilots");
        app->add_option("--bandwidth-ratio", cfg.bandwidth_ratio, "interferer/desired bandwidth ratio");
        app->add_option("--interferer-span", cfg.interferer_span, "coupled interfering symbols per sample");
        app->add_option("--freq-offset-norm", cfg.freq_offset_norm, "carrier offset times T_d");
        app->add_option("--roll-off", cfg.roll_off, "root-raised-cosine roll-off");
        app->add_option("--inr-db", cfg.inr_db, "interference-to-signal power ratio in dB");
        app->add_option("--detectors", detectors, "subset of smap imap odd iterative");
        app->add_option("--trials", cfg.trials, "Monte Carlo trials per grid point");
        app->add_option("--seed", cfg.master_seed, "master seed");
        app->add_option("--out", cfg.out_dir, "output directory");
        app->add_option("--max-iters", cfg.max_iters, "iterative-detector cap");
        app->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
    }

    ExperimentConfig resolve(const CLI::App* app) {
        ExperimentConfig base;
        if (!config_path.empty()) {
            const std::string text = read_file(config_path);
            const auto nonspace = text.find_first_not_of(" \t\r\n");
            if (nonspace != std::string::npos && text[nonspace] == '{') {
                base = ExperimentConfig::from_json(text);
            } else {
                base = from_toml(text);
            }
        }
        // apply explicit flags on top of the file
        auto used = [&](const std::string& name) {
            return app->count(name) > 0;
        };
        if (!profile.empty()) base.apply_profile(profile);
        if (used("--scenario") || config_path.empty())
            base.scenario = scenario == "interference-free"
                                ? Scenario::InterferenceFree
                                : Scenario::InterferencePresent;
        if (used("--nr")) base.n_r = cfg.n_r;
        if (used("--alpha")) base.alpha = cfg.alpha;
        if (used("--snr-db")) base.snr_db = cfg.snr_db;
        if (used("--np")) base.n_p = cfg.n_p;
        if (used("--nd")) base.n_d = cfg.n_d;
        if (used("--bandwidth-ratio")) base.bandwidth_ratio = cfg.bandwidth_ratio;
        if (used("--interferer-span")) base.interferer_span = cfg.interferer_span;
        if (used("--freq-offset-norm")) base.freq_offset_norm = cfg.freq_offset_norm;
        if (used("--roll-off")) base.roll_off = cfg.roll_off;
        if (used("--inr-db")) base.inr_db = cfg.inr_db;
        if (!detectors.empty()) {
            base.detectors.clear();
            for (const auto& d : detectors) {
                if (d == "smap") base.detectors.push_back(DetectorKind::SMap);
                else if (d == "imap") base.detectors.push_back(DetectorKind::IMap);
                else if (d == "odd") base.detectors.push_back(DetectorKind::Odd);
                else if (d == "iterative") base.detectors.push_back(DetectorKind::Iterative);
                else throw ConfigError("unknown detector: " + d);
            }
        }
        if (used("--trials")) base.trials = cfg.trials;
        if (used("--seed")) base.master_seed = cfg.master_seed;
        if (used("--out")) base.out_dir = cfg.out_dir;
        if (used("--max-iters")) base.max_iters = cfg.max_iters;
        if (used("--threads")) base.threads = cfg.threads;
        base.validate();
        return base;
    }

    /// Minimal TOML reader covering the flat key = value layout used by the
    /// config files (numbers, strings, booleans, arrays of numbers/strings).
    static ExperimentConfig from_toml(const std::string& text) {
        json j = json::object();
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) continue;
            try {
                if (value.front() == '[') {
                    j[key] = json::parse(value);  // TOML arrays parse as JSON here
                } else if (value.front() == '"') {
                    j[key] = json::parse(value);
                } else if (value == "true" || value == "false") {
                    j[key] = value == "true";
                } else {
                    j[key] = json::parse(value);  // number
                }
            } catch (const json::exception&) {
                throw ConfigError("cannot parse config value for " + key);
            }
        }
        return ExperimentConfig::from_json(j.dump());
    }
};

int fail_with_json(const std::exception& e) {
    json err;
    err["error"]["type"] = "Error";
    if (const auto* oc = dynamic_cast<const Error*>(&e)) err["error"]["type"] = oc->kind();
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << std::endl;
    return 1;
}

void print_rows(const MetricTable& table) { std::cout << table.to_csv(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link-level simulator for interference cancellation and symbol "
                 "detection between overlapping channels of different bandwidths"};
    app.require_subcommand(1);

    CliConfig sim_cfg, sweep_cfg, replay_cfg;
    CLI::App* simulate = app.add_subcommand("simulate", "run one config point");
    sim_cfg.attach(simulate);
    CLI::App* sweep = app.add_subcommand("sweep", "run the full config grid");
    sweep_cfg.attach(sweep);

    CLI::App* predict = app.add_subcommand(
        "predict", "closed-form floors and the semi-analytic SER/throughput model");
    double pr_alpha = 0.99;
    int pr_nd = 3, pr_np = 51, pr_draws = 100000, pr_measure_trials = 400;
    std::vector<double> pr_snr = {10, 20, 30, 40, 50, 60};
    std::string pr_out, pr_source = "measured";
    std::uint64_t pr_seed = 1;
    predict->add_option("--alpha", pr_alpha, "channel correlation coefficient");
    predict->add_option("--nd", pr_nd, "data symbols between pilots");
    predict->add_option("--np", pr_np, "pilots per frame");
    predict->add_option("--snr-db", pr_snr, "SNR grid in dB");
    predict->add_option("--sigma-i2-source", pr_source, "floor or measured")
        ->check(CLI::IsMember({"floor", "measured"}));
    predict->add_option("--model-draws", pr_draws, "Monte Carlo draws per point");
    predict->add_option("--measure-trials", pr_measure_trials,
                        "frames for the measured residual power");
    predict->add_option("--seed", pr_seed, "model seed");
    predict->add_option("--out", pr_out, "write CSV here instead of stdout");

    CLI::App* optimize = app.add_subcommand("optimize-pilot",
                                            "throughput-maximizing pilot density");
    double op_alpha = 0.99, op_snr = 20.0;
    int op_np = 51, op_draws = 100000;
    std::vector<int> op_nd = {1, 3, 7, 9, 15};
    std::string op_source = "measured";
    std::uint64_t op_seed = 1;
    optimize->add_option("--alpha", op_alpha, "channel correlation coefficient");
    optimize->add_option("--snr-db", op_snr, "operating SNR in dB");
    optimize->add_option("--np", op_np, "pilots per frame");
    optimize->add_option("--nd", op_nd, "candidate data-symbol counts");
    optimize->add_option("--sigma-i2-source", op_source, "floor or measured")
        ->check(CLI::IsMember({"floor", "measured"}));
    optimize->add_option("--model-draws", op_draws, "Monte Carlo draws per point");
    optimize->add_option("--seed", op_seed, "model seed");

    CLI::App* replay = app.add_subcommand("replay", "re-run one table row");
    std::string rp_metrics;
    int rp_index = 0;
    replay_cfg.attach(replay);
    replay->add_option("--metrics", rp_metrics, "metrics.json emitted by sweep")
        ->required();
    replay->add_option("--row", rp_index, "row index to replay");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed() || sweep->parsed()) {
            CliConfig& cc = simulate->parsed() ? sim_cfg : sweep_cfg;
            CLI::App* sub = simulate->parsed() ? simulate : sweep;
            ExperimentConfig cfg = cc.resolve(sub);
            if (simulate->parsed()) {
                // one config point: first entry of every grid dimension
                cfg.alpha = {cfg.alpha.front()};
                cfg.n_d = {cfg.n_d.front()};
                cfg.snr_db = {cfg.snr_db.front()};
            }
            const MetricTable table = run_sweep(cfg);
            const auto files = emit_outputs(table, cfg, cfg.out_dir);
            print_rows(table);
            std::cerr << "wrote " << files.size() << " files under " << cfg.out_dir
                      << std::endl;
        } else if (predict->parsed()) {
            SerModelOptions opts;
            opts.sigma_i2_source = pr_source == "floor" ? ResidualSource::Floor
                                                        : ResidualSource::Measured;
            opts.n_draws = pr_draws;
            opts.measure_trials = pr_measure_trials;
            opts.seed = pr_seed;
            const SerModel model = ser_curve(pr_alpha, pr_nd, pr_np, pr_snr, opts);
            const FloorPrediction fl = predict_floors(pr_alpha, pr_nd, pr_np);
            std::ostringstream os;
            os.precision(12);
            os << "alpha,n_d,n_p,snr_db,sigma2_i_floor,sinr_limit_db,p_e_model,"
                  "tp_model,n_d_opt\n";
            for (std::size_t s = 0; s < pr_snr.size(); ++s) {
                SerModelOptions oopts = opts;
                const ThroughputModel t = optimize_pilot_density(
                    pr_alpha, pr_snr[s], pr_np, {1, 3, 7, 9, 15}, oopts);
                os << pr_alpha << ',' << pr_nd << ',' << pr_np << ',' << pr_snr[s]
                   << ',' << fl.sigma2_i_floor << ',' << fl.sinr_limit_db << ','
                   << model.p_e[s] << ',' << throughput(model.p_e[s], pr_nd, pr_np)
                   << ',' << t.n_d_opt << '\n';
            }
            if (pr_out.empty()) {
                std::cout << os.str();
            } else {
                std::ofstream out(pr_out, std::ios::binary);
                if (!out) throw IoFailure("cannot open " + pr_out);
                out << os.str();
            }
        } else if (optimize->parsed()) {
            SerModelOptions opts;
            opts.sigma_i2_source = op_source == "floor" ? ResidualSource::Floor
                                                        : ResidualSource::Measured;
            opts.n_draws = op_draws;
            opts.seed = op_seed;
            const ThroughputModel t =
                optimize_pilot_density(op_alpha, op_snr, op_np, op_nd, opts);
            json j;
            j["alpha"] = op_alpha;
            j["snr_db"] = op_snr;
            j["n_p"] = op_np;
            j["n_d_grid"] = t.n_d_grid;
            j["tp"] = t.tp;
            j["p_e"] = t.p_e;
            j["n_d_opt"] = t.n_d_opt;
            j["tp_opt"] = t.tp_opt;
            j["pilot_density_opt"] = t.pilot_density_opt;
            j["unimodal"] = t.unimodal;
            std::cout << j.dump(2) << std::endl;
        } else if (replay->parsed()) {
            ExperimentConfig cfg = replay_cfg.resolve(replay);
            const json rows = json::parse(read_file(rp_metrics));
            if (rp_index < 0 || rp_index >= static_cast<int>(rows.size()))
                throw ConfigError("row index out of range");
            const json& r = rows.at(rp_index);
            MetricRow row;
            row.scenario = r.at("scenario").get<std::string>();
            row.detector = r.at("detector").get<std::string>();
            row.alpha = r.at("alpha").get<double>();
            row.n_d = r.at("n_d").get<int>();
            row.snr_db = r.at("snr_db").get<double>();
            row.seed = r.at("seed").get<std::uint64_t>();
            const MetricRow fresh = replay_row(cfg, row);
            json jj;
            jj["replayed"] = {{"cmse", fresh.cmse}, {"ser", fresh.ser},
                              {"residual_power", fresh.residual_power},
                              {"trials", fresh.trials}};
            jj["recorded"] = {{"cmse", r.value("cmse", 0.0)},
                              {"ser", r.value("ser", 0.0)},
                              {"residual_power", r.value("residual_power", 0.0)},
                              {"trials", r.value("trials", 0)}};
            jj["match"] = std::abs(fresh.cmse - r.value("cmse", 0.0)) <= 1e-12 &&
                          std::abs(fresh.ser - r.value("ser", 0.0)) <= 1e-12;
            std::cout << jj.dump(2) << std::endl;
            if (!jj["match"].get<bool>()) return 2;
        }
    } catch (const std::exception& e) {
        return fail_with_json(e);
    }
    return 0;
}
