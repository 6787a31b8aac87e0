#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mdfocus/io.hpp>

using namespace mdfocus;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kInvariant = 3 };

io::RunConfig load_config(const std::string& path) {
    std::string p = path;
    if (p.empty())
        if (const char* env = std::getenv(io::kConfigEnv)) p = env;
    if (p.empty()) return io::config_from_json(io::json::object());
    return io::config_from_json(io::read_json_file(p));
}

std::istream& open_input(const std::string& path, std::ifstream& file) {
    if (path.empty() || path == "-") return std::cin;
    file.open(path);
    if (!file) throw InputError("cannot open input " + path);
    return file;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw ConfigError("cannot open output " + path);
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate changepoint detection with hull-pruned GLR statistics"};
    app.require_subcommand(1);

    std::string config_path;
    auto* detect = app.add_subcommand("detect", "Run online detection over a CSV stream");
    std::string input, plan_path, engine, record_path;
    std::optional<double> alpha, beta;
    std::optional<int> qmin;
    std::optional<std::size_t> ptilde, max_size;
    std::optional<std::uint64_t> seed;
    bool trace = false;
    detect->add_option("input", input, "CSV file, '-' for stdin");
    detect->add_option("--config", config_path, "JSON run configuration");
    detect->add_option("--engine", engine, "exact | dyadic | approx");
    detect->add_option("--alpha", alpha, "Rebuild growth factor");
    detect->add_option("--beta", beta, "Rebuild offset");
    detect->add_option("--max-size", max_size, "Initial candidate list size");
    detect->add_option("--qmin", qmin, "Smallest merged dyadic chunk exponent");
    detect->add_option("--ptilde", ptilde, "Projection subset size");
    detect->add_option("--threshold-plan", plan_path, "Threshold plan JSON");
    detect->add_option("--seed", seed, "Seed stored in the run record");
    detect->add_option("--record", record_path, "Write the resolved configuration here");
    detect->add_flag("--trace", trace, "Emit per-observation statistics");

    auto* calibrate = app.add_subcommand("calibrate", "Produce a threshold plan");
    io::CalibrateOptions copt;
    std::optional<std::int64_t> horizon;
    std::string plan_out;
    calibrate->add_option("--config", config_path, "JSON run configuration");
    calibrate->add_option("--mode", copt.mode, "analytic-arl | analytic-fa | monte-carlo")
        ->check(CLI::IsMember({"analytic-arl", "analytic-fa", "monte-carlo"}));
    calibrate->add_option("--gamma", copt.gamma, "Target average run length");
    calibrate->add_option("--alpha", copt.alpha, "Target false-alarm probability");
    calibrate->add_option("--seed", copt.mc.seed, "Monte-Carlo seed");
    calibrate->add_option("--replicates", copt.mc.replicates, "Monte-Carlo replicates");
    calibrate->add_option("--horizon", horizon, "Monte-Carlo stream length (default 2 gamma)");
    calibrate->add_option("--level", copt.mc.level, "Quantile of the running maximum");
    calibrate->add_option("--workers", copt.mc.workers, "Worker threads");
    calibrate->add_option("--out", plan_out, "Output file, default stdout");

    auto* oracle = app.add_subcommand("oracle", "Expected hull face and vertex counts");
    std::vector<int> oracle_p;
    std::vector<std::int64_t> oracle_n;
    bool exact_zero = false;
    oracle->add_option("--p", oracle_p, "Dimensions")->required();
    oracle->add_option("--n", oracle_n, "Walk lengths")->required();
    oracle->add_flag("--exact-zero", exact_zero, "Use the exact zero-order Stirling number");

    auto* experiment = app.add_subcommand("experiment", "Run a simulation experiment");
    std::string exp_kind, family = "gaussian", stat = "dense", summary_path, records_path;
    std::string prechange = "known";
    std::string exp_engine_name = "exact";
    ExperimentGrid grid;
    int reps = 10;
    unsigned workers = 1;
    experiment->add_option("kind", exp_kind, "hullcount | runtime_slope | arl | add | falsealarm")->required();
    experiment->add_option("--p", grid.ps, "Dimensions");
    experiment->add_option("--n", grid.ns, "Stream lengths");
    experiment->add_option("--reps", reps, "Replicates per scenario");
    experiment->add_option("--seed", grid.seed, "Base seed");
    experiment->add_option("--workers", workers, "Worker threads");
    experiment->add_option("--family", family, "gaussian | poisson");
    experiment->add_option("--stat", stat, "Statistic name");
    experiment->add_option("--prechange", prechange, "known | unknown")->check(CLI::IsMember({"known", "unknown"}));
    experiment->add_option("--engine", exp_engine_name, "exact | dyadic | approx");
    experiment->add_option("--gamma", grid.gamma, "Target average run length");
    experiment->add_option("--alpha", grid.alpha, "Target false-alarm probability");
    experiment->add_option("--change-at", grid.change_at, "Change location");
    experiment->add_option("--magnitude", grid.magnitude, "Squared change size");
    experiment->add_option("--sparsity", grid.sparsity, "Changed coordinates, 0 for all");
    experiment->add_option("--summary", summary_path, "Summary CSV, default stdout");
    experiment->add_option("--records", records_path, "Per-replicate CSV");

    auto* edetect = app.add_subcommand("edetect", "Hull vertices for e-detector score streams");
    std::string preset, edetect_input;
    edetect->add_option("--preset", preset, "winning-rate | plus-minus")->required();
    edetect->add_option("input", edetect_input, "CSV file, '-' for stdin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*detect) {
            auto rc = load_config(config_path);
            if (!engine.empty()) rc.engine.kind = parse_engine(engine);
            if (alpha) rc.engine.alpha = *alpha;
            if (beta) rc.engine.beta = *beta;
            if (max_size) rc.engine.max_size = *max_size;
            if (qmin) rc.engine.q_min = *qmin;
            if (ptilde) rc.engine.p_tilde = *ptilde;
            if (seed) rc.seed = *seed;
            if (!plan_path.empty()) {
                rc.thresholds = io::plan_from_json(io::read_json_file(plan_path));
                rc.thresholds_path.reset();
            }
            if (!input.empty()) rc.input = input;
            const auto plan = io::resolve_plan(rc);
            if (!record_path.empty()) {
                auto resolved = rc;
                resolved.thresholds = plan;
                resolved.thresholds_path.reset();
                std::ofstream rf(record_path);
                if (!rf) throw ConfigError("cannot open record file " + record_path);
                rf << io::config_to_json(resolved).dump(2) << '\n';
            }
            std::ifstream in_file;
            std::ofstream out_file;
            auto& in = open_input(rc.input, in_file);
            auto& out = open_output(rc.output, out_file);
            io::cmd_detect(rc, plan, in, out, trace);
        } else if (*calibrate) {
            const auto rc = load_config(config_path);
            if (horizon) {
                copt.mc.horizon = *horizon;
                copt.horizon_set = true;
            }
            const auto plan = io::cmd_calibrate(rc, copt);
            std::ofstream out_file;
            open_output(plan_out, out_file) << io::plan_to_json(plan).dump(2) << '\n';
        } else if (*oracle) {
            io::cmd_oracle(oracle_p, oracle_n, std::cout, exact_zero ? StirlingZero::exact : StirlingZero::unit);
        } else if (*experiment) {
            const auto kind = parse_experiment(exp_kind);
            grid.family = parse_family(family);
            grid.stat = StatSpec::parse(stat);
            grid.known = prechange == "known";
            grid.engine.kind = parse_engine(exp_engine_name);
            const auto res = run_experiment(kind, grid, reps, workers);
            if (!records_path.empty()) {
                std::ofstream rf(records_path);
                if (!rf) throw ConfigError("cannot open " + records_path);
                write_records_csv(rf, res.records);
            }
            std::ofstream out_file;
            write_summary_csv(open_output(summary_path, out_file), res.summary);
            if (res.partial) {
                std::cerr << "experiment finished with failed replicates\n";
                return kInvariant;
            }
        } else if (*edetect) {
            std::ifstream in_file;
            io::cmd_edetect(preset, open_input(edetect_input, in_file), std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const UnsupportedError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariant;
    } catch (const InputError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvariant;
    }
    return kOk;
}
