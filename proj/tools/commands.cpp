#include "commands.hpp"

#include "hybridloc/decimal.hpp"
#include "hybridloc/errors.hpp"
#include "hybridloc/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

namespace hybridloc::cli {

namespace fs = std::filesystem;

namespace {

struct SimOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string mode = "hybrid";
};

struct SweepOptions {
    std::string config;
    std::vector<double> rates;
    long long runs = 1;
    unsigned jobs = 1;
    std::string out;
};

struct ReplayOptions {
    std::string log;
    std::string anchors;
    std::string out;
    std::string mode = "hybrid";
    std::string truth;
};

struct EvalOptions {
    std::string track;
    std::string truth;
    std::string out;
};

// Errors a user fixes by changing inputs map to exit 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError(dir, "cannot create output directory");
    }
    return fs::path(dir);
}

void write_evaluation(const fs::path& dir, std::span<const Belief> track, std::span<const Vec2> polyline) {
    const ErrorSeries series = trajectory_error_series(track, polyline);
    const std::vector<double> errors = error_values(series);
    write_text_file(dir / "errors.csv", write_errors(series));
    write_text_file(dir / "cdf.csv", write_cdf(empirical_cdf(errors)));
    write_text_file(dir / "summary.csv", write_summary(summarize(errors)));
}

ScenarioConfig load_scenario_file(const std::string& path) {
    return load_scenario_config(read_text_file(path));
}

void report_warnings(const ScenarioConfig& cfg, std::ostream& err) {
    for (const std::string& w : cfg.validate()) {
        err << "warning: " << w << '\n';
    }
}

int cmd_sim(const SimOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg = load_scenario_file(opt.config);
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    const FilterMode mode = filter_mode_from_string(opt.mode);
    report_warnings(cfg, err);
    const fs::path dir = prepare_out_dir(opt.out);

    const ScenarioResult result = run_scenario(cfg, mode);
    write_text_file(dir / "truth.csv", write_truth(result.truth));
    write_text_file(dir / "measurements.csv", write_measurement_log(result.feed));
    write_text_file(dir / "track.csv", write_track(result.track));
    write_evaluation(dir, result.track, result.truth.polyline);

    const ErrorSummary s = summarize(error_values(trajectory_error_series(result.track, result.truth.polyline)));
    out << "mode=" << to_string(mode) << " seed=" << cfg.seed << " estimates=" << s.count
        << " median_m=" << format_decimal(s.median) << " p90_m=" << format_decimal(s.p90) << '\n';
    return kExitOk;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.runs < 1) {
        throw ConfigError("--runs must be >= 1");
    }
    if (opt.rates.empty()) {
        throw ConfigError("--tdoa-rates needs at least one rate");
    }
    for (double r : opt.rates) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw ConfigError("TDOA rates must be positive, got " + format_decimal(r));
        }
    }
    SweepSpec spec;
    spec.base = load_scenario_file(opt.config);
    spec.tdoa_rates = opt.rates;
    spec.runs = static_cast<std::size_t>(opt.runs);
    spec.jobs = std::max(1u, opt.jobs);
    report_warnings(spec.base, err);
    const fs::path dir = prepare_out_dir(opt.out);

    const SweepResult result = run_sweep(spec);
    for (const SweepRow& row : result.rates) {
        write_text_file(dir / sweep_cdf_name(row.rate_hz), write_cdf(empirical_cdf(row.pooled_errors)));
    }
    const std::string summary = write_sweep_summary(result);
    write_text_file(dir / "sweep_summary.csv", summary);
    out << summary;
    return kExitOk;
}

int cmd_replay(const ReplayOptions& opt, std::ostream& out, std::ostream&) {
    const ScenarioConfig cfg = load_deployment_config(read_text_file(opt.anchors));
    const Feed feed = read_measurement_log(read_text_file(opt.log));
    const FilterMode mode = filter_mode_from_string(opt.mode);
    std::vector<Vec2> polyline;
    if (!opt.truth.empty()) {
        polyline = read_polyline(read_text_file(opt.truth));
    }

    const Deployment deployment(cfg.anchors);
    for (const MeasurementBatch& batch : feed) {
        for (const RssReading& r : batch.rss) {
            deployment.at(r.anchor_id);
        }
        for (const TdoaReading& r : batch.tdoa) {
            deployment.at(r.anchor_id);
            deployment.at(r.ref_anchor_id);
        }
    }

    const fs::path dir = prepare_out_dir(opt.out);
    const Track track = filter_feed(cfg, feed, mode);
    write_text_file(dir / "track.csv", write_track(track));
    if (!polyline.empty()) {
        write_evaluation(dir, track, polyline);
    }
    out << "mode=" << to_string(mode) << " batches=" << feed.size() << " estimates=" << track.size() << '\n';
    return kExitOk;
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream&) {
    const Track track = read_track(read_text_file(opt.track));
    if (track.empty()) {
        throw ConfigError(opt.track + ": track has no rows");
    }
    const std::vector<Vec2> polyline = read_polyline(read_text_file(opt.truth));
    const fs::path dir = prepare_out_dir(opt.out);
    write_evaluation(dir, track, polyline);

    const ErrorSummary s = summarize(error_values(trajectory_error_series(track, polyline)));
    out << "estimates=" << s.count << " median_m=" << format_decimal(s.median) << " p90_m=" << format_decimal(s.p90)
        << '\n';
    return kExitOk;
}

int cmd_default_config(const std::string& out_path, std::ostream& out) {
    const std::string text = write_scenario_config(default_scenario());
    if (out_path.empty()) {
        out << text;
    } else {
        write_text_file(out_path, text);
    }
    return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const OrderingError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const LookupError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.runs == 0) {
        throw InvalidArgument("a sweep needs at least one run");
    }
    spec.base.validate();
    const std::size_t n_rates = spec.tdoa_rates.size();

    struct RunOutput {
        std::vector<double> baseline;
        std::vector<std::vector<double>> per_rate;
    };
    std::vector<RunOutput> outputs(spec.runs);

    const auto do_run = [&](std::size_t r) {
        ScenarioConfig cfg = spec.base;
        cfg.seed = spec.base.seed + r;
        const GroundTruth truth = scenario_truth(cfg);
        RunOutput& o = outputs[r];
        o.per_rate.resize(n_rates);
        for (std::size_t k = 0; k < n_rates; ++k) {
            cfg.tdoa_rate_hz = spec.tdoa_rates[k];
            const Feed feed = simulate_feed(cfg, truth);
            const Track track = filter_feed(cfg, feed, FilterMode::kHybrid);
            o.per_rate[k] = error_values(trajectory_error_series(track, truth.polyline));
            if (k == 0) {
                // RSS noise comes from its own stream, so any rate's feed projects to the same RSS feed.
                const Track rss_track = filter_feed(cfg, feed, FilterMode::kRssOnly);
                o.baseline = error_values(trajectory_error_series(rss_track, truth.polyline));
            }
        }
    };

    const unsigned workers = std::min<unsigned>(std::max(1u, spec.jobs), static_cast<unsigned>(spec.runs));
    if (workers == 1) {
        for (std::size_t r = 0; r < spec.runs; ++r) {
            do_run(r);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> failures(workers);
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t r = next++; r < spec.runs; r = next++) {
                        do_run(r);
                    }
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (const auto& f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }
    }

    const auto aggregate = [&](SweepRow& row, auto&& errors_of) {
        double median_sum = 0.0;
        double p90_sum = 0.0;
        for (std::size_t r = 0; r < spec.runs; ++r) {
            const std::vector<double>& errors = errors_of(outputs[r]);
            const ErrorSummary s = summarize(errors);
            row.run_medians.push_back(s.median);
            median_sum += s.median;
            p90_sum += s.p90;
            row.pooled_errors.insert(row.pooled_errors.end(), errors.begin(), errors.end());
        }
        row.median_m = median_sum / static_cast<double>(spec.runs);
        row.p90_m = p90_sum / static_cast<double>(spec.runs);
    };

    SweepResult result;
    result.baseline.label = "rss_only";
    aggregate(result.baseline, [](const RunOutput& o) -> const std::vector<double>& { return o.baseline; });
    for (std::size_t k = 0; k < n_rates; ++k) {
        SweepRow row;
        row.rate_hz = spec.tdoa_rates[k];
        row.label = format_decimal(row.rate_hz);
        aggregate(row, [k](const RunOutput& o) -> const std::vector<double>& { return o.per_rate[k]; });
        result.rates.push_back(std::move(row));
    }
    return result;
}

std::string write_sweep_summary(const SweepResult& result) {
    std::string out = "rate_hz,median_m,p90_m\n";
    const auto row = [&](const SweepRow& r) {
        out += r.label + "," + format_decimal(r.median_m) + "," + format_decimal(r.p90_m) + "\n";
    };
    row(result.baseline);
    for (const SweepRow& r : result.rates) {
        row(r);
    }
    return out;
}

std::string sweep_cdf_name(double rate_hz) {
    return "cdf_tdoa_" + format_decimal(rate_hz) + "hz.csv";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid BLE RSS / UWB TDOA localization: simulate, replay and evaluate EKF tracks"};
    app.require_subcommand(1);

    SimOptions sim;
    auto* sim_cmd = app.add_subcommand("sim", "simulate a scenario and filter it");
    sim_cmd->add_option("--config", sim.config, "scenario config (YAML)")->required();
    sim_cmd->add_option("--seed", sim.seed, "override the config seed");
    sim_cmd->add_option("--out", sim.out, "output directory")->required();
    sim_cmd->add_option("--mode", sim.mode, "hybrid, rss or tdoa");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over TDOA rates");
    sweep_cmd->add_option("--config", sweep.config, "scenario config (YAML)")->required();
    sweep_cmd->add_option("--tdoa-rates", sweep.rates, "comma-separated rates in Hz")->required()->delimiter(',');
    sweep_cmd->add_option("--runs", sweep.runs, "runs per rate (seeds seed..seed+runs-1)");
    sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads");
    sweep_cmd->add_option("--out", sweep.out, "output directory")->required();

    ReplayOptions replay;
    auto* replay_cmd = app.add_subcommand("replay", "filter a recorded measurement log");
    replay_cmd->add_option("--log", replay.log, "measurement log CSV")->required();
    replay_cmd->add_option("--anchors", replay.anchors, "deployment config (YAML, anchors + models)")->required();
    replay_cmd->add_option("--out", replay.out, "output directory")->required();
    replay_cmd->add_option("--mode", replay.mode, "hybrid, rss or tdoa");
    replay_cmd->add_option("--truth", replay.truth, "true path CSV with x,y columns");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "trajectory error of an existing track");
    eval_cmd->add_option("--track", eval.track, "track CSV")->required();
    eval_cmd->add_option("--truth", eval.truth, "true path CSV with x,y columns")->required();
    eval_cmd->add_option("--out", eval.out, "output directory")->required();

    std::string default_out;
    auto* default_cmd = app.add_subcommand("default-config", "print the default 10 m x 10 m room scenario");
    default_cmd->add_option("--out", default_out, "write to a file instead of stdout");

    std::vector<std::string> argv_storage{"hybridloc"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (std::string& a : argv_storage) {
        argv.push_back(a.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    return guarded(
        [&] {
            if (sim_cmd->parsed()) {
                return cmd_sim(sim, out, err);
            }
            if (sweep_cmd->parsed()) {
                return cmd_sweep(sweep, out, err);
            }
            if (replay_cmd->parsed()) {
                return cmd_replay(replay, out, err);
            }
            if (eval_cmd->parsed()) {
                return cmd_eval(eval, out, err);
            }
            return cmd_default_config(default_out, out);
        },
        err);
}

}  // namespace hybridloc::cli
