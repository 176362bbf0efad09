#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccpd/calibration.hpp"
#include "ccpd/detector.hpp"
#include "ccpd/errors.hpp"
#include "ccpd/ingest.hpp"
#include "ccpd/report.hpp"
#include "ccpd/simbench.hpp"

namespace ccpd::cli {

namespace {

using Clock = std::chrono::steady_clock;

// Flags that take no value; in a config file they are written key=true.
const std::set<std::string> kBooleanFlags = {"normalize", "warm-start", "table1", "narrow-uniform"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Reads `key=value` lines ('#' comments allowed).
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key=value in config file");
        values[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    return values;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// Appends settings from a --config file for every key not given as a flag,
// so explicit flags take precedence.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (!path) return args;

    for (const auto& [key, value] : read_config(*path)) {
        if (has_flag(args, key)) continue;
        if (kBooleanFlags.count(key)) {
            if (value == "true" || value == "1" || value == "yes") args.push_back("--" + key);
        } else {
            args.push_back("--" + key);
            args.push_back(value);
        }
    }
    return args;
}

struct FamilyOptions {
    std::string family = "poly:1";
    int epochs = 50;
    double learning_rate = 0.1;
    double clamp = 10.0;

    DiscriminatorSpec spec() const {
        DiscriminatorSpec s = parse_family(family);
        s.optimizer.epochs = epochs;
        s.optimizer.learning_rate = learning_rate;
        s.clamp_bound = clamp;
        s.validate();
        return s;
    }
};

void add_family_options(CLI::App& cmd, FamilyOptions& f) {
    cmd.add_option("--class", f.family, "Discriminator family: poly:<p>, fourier:<q>, linear[:d], mlp[:w1,...]")
        ->capture_default_str();
    cmd.add_option("--epochs", f.epochs, "Adam epochs per fit")->capture_default_str();
    cmd.add_option("--lr", f.learning_rate, "Adam learning rate")->capture_default_str();
    cmd.add_option("--clamp", f.clamp, "Clamp bound for discriminator outputs")->capture_default_str();
}

nlohmann::json family_json(const DiscriminatorSpec& spec) {
    return {{"class", spec.label()},
            {"epochs", spec.optimizer.epochs},
            {"lr", spec.optimizer.learning_rate},
            {"clamp", spec.clamp_bound}};
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot write '" + path + "'");
    file << j.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Online change-point detection with contrastive discriminators", "ccpd"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    FamilyOptions family;
    std::size_t warmup = 20;
    std::size_t margin = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    auto add_common = [&](CLI::App& cmd) {
        add_family_options(cmd, family);
        cmd.add_option("--warmup", warmup, "Samples collected before the statistic is computed")
            ->capture_default_str();
        cmd.add_option("--margin", margin, "Minimum distance of a split from either end")->capture_default_str();
        cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
        cmd.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
        // Handled before parsing; declared for --help.
        cmd.add_option("--config", "key=value file; flags override its entries");
    };

    // calibrate
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Bootstrap an alarm threshold from a Gaussian reference");
    double ref_mean = 0.0;
    double ref_std = 1.0;
    std::size_t cal_n = 150;
    std::size_t cal_reps = 10;
    std::size_t cal_rank = 2;
    add_common(*calibrate_cmd);
    calibrate_cmd->add_option("--mean", ref_mean, "Reference mean")->required();
    calibrate_cmd->add_option("--std", ref_std, "Reference standard deviation")->required();
    calibrate_cmd->add_option("--n", cal_n, "Length of each null stream")->capture_default_str();
    calibrate_cmd->add_option("--reps", cal_reps, "Number of null streams")->capture_default_str();
    calibrate_cmd->add_option("--rank", cal_rank, "Order statistic from the top")->capture_default_str();

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Run the detector over a recorded signal");
    IngestSpec ingest_spec;
    double threshold = 0.0;
    std::optional<std::size_t> window;
    std::string report_path;
    std::string trace_path;
    bool warm_start = false;
    add_common(*detect_cmd);
    detect_cmd->add_option("--input", ingest_spec.path, "Input file, one sample per line ('-' for stdin)")
        ->required();
    detect_cmd->add_option("--threshold", threshold, "Alarm threshold")->required();
    detect_cmd->add_option("--stride", ingest_spec.stride, "Keep every stride-th record")->capture_default_str();
    detect_cmd->add_flag("--normalize", ingest_spec.normalize, "z-score with the calibration prefix statistics");
    detect_cmd->add_option("--prefix", ingest_spec.prefix_len, "Calibration prefix length (kept samples)");
    detect_cmd->add_option("--columns", ingest_spec.columns, "Column indices forming a vector sample")
        ->delimiter(',');
    detect_cmd->add_option("--window", window, "Sliding window horizon");
    detect_cmd->add_flag("--warm-start", warm_start, "Reuse the previous fit at the same split");
    detect_cmd->add_option("--out", report_path, "Write the JSON report here instead of stdout");
    detect_cmd->add_option("--trace", trace_path, "Write the t,S_t,tau_hat trace as CSV");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Calibrate and run one synthetic example end to end");
    int example = 1;
    std::size_t sim_reps = 10;
    std::optional<double> mu;
    bool narrow_uniform = false;
    std::string sim_out;
    add_common(*simulate_cmd);
    simulate_cmd->add_option("--example", example, "Synthetic example")->required()->check(CLI::Range(1, 3));
    simulate_cmd->add_option("--reps", sim_reps, "Replications")->capture_default_str();
    simulate_cmd->add_option("--mu", mu, "Post-change mean for example 1");
    simulate_cmd->add_flag("--narrow-uniform", narrow_uniform, "Example 3 uniform on [-s/sqrt(3), s/sqrt(3)]");
    simulate_cmd->add_option("--out", sim_out, "Write the JSON report here instead of stdout");

    // benchmark
    auto* benchmark_cmd = app.add_subcommand("benchmark", "Detection-delay benchmark over the synthetic examples");
    bool table1 = false;
    std::size_t bench_reps = 10;
    std::string bench_out;
    benchmark_cmd->add_flag("--table1", table1, "Run the nine example/family cells")->required();
    benchmark_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    benchmark_cmd->add_option("--reps", bench_reps, "Replications per cell")->capture_default_str();
    benchmark_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    benchmark_cmd->add_option("--warmup", warmup, "Warm-up samples")->capture_default_str();
    benchmark_cmd->add_option("--margin", margin, "Split margin")->capture_default_str();
    benchmark_cmd->add_option("--out", bench_out, "CSV output path (stdout when omitted)");
    benchmark_cmd->add_option("--config", "key=value file; flags override its entries");

    try {
        auto args = merge_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (calibrate_cmd->parsed()) {
            CalibrationConfig cal;
            cal.reference_mean = ref_mean;
            cal.reference_std = ref_std;
            cal.n = cal_n;
            cal.reps = cal_reps;
            cal.rank = cal_rank;
            cal.spec = family.spec();
            cal.warmup = warmup;
            cal.margin = margin;
            cal.seed = seed;
            cal.threads = threads;
            out << format_number(calibrate(cal)) << '\n';
            return kExitOk;
        }

        if (detect_cmd->parsed()) {
            const auto start = Clock::now();
            const auto data = ingest(ingest_spec);
            DetectorConfig config;
            config.threshold = threshold;
            config.spec = family.spec();
            if (auto* lin = std::get_if<Linear>(&config.spec.family);
                lin && family.family == "linear" && data.samples.dim() > 1) {
                lin->input_dim = static_cast<int>(data.samples.dim());
            }
            config.warmup = warmup;
            config.margin = margin;
            config.window_cap = window;
            config.seed = seed;
            config.warm_start = warm_start;
            config.threads = threads;
            const auto result = run(data.samples, config);
            const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();

            nlohmann::json echo = family_json(config.spec);
            echo["command"] = "detect";
            echo["input"] = ingest_spec.path;
            echo["warmup"] = warmup;
            echo["margin"] = margin;
            echo["seed"] = seed;
            echo["stride"] = ingest_spec.stride;
            echo["normalize"] = ingest_spec.normalize;
            echo["prefix"] = ingest_spec.prefix_len;
            echo["window"] = window ? nlohmann::json(*window) : nlohmann::json(nullptr);
            echo["warm_start"] = warm_start;
            echo["samples"] = data.samples.size();
            auto report = make_report(result, threshold, echo, elapsed);
            report.prefix_mean = data.mean;
            report.prefix_std = data.std;
            write_json(report, report_path, out);
            if (!trace_path.empty()) {
                std::ofstream trace(trace_path);
                if (!trace) throw std::runtime_error("cannot write '" + trace_path + "'");
                write_trace_csv(trace, result.trace);
            }
            if (!report_path.empty()) {
                out << (result.stopping_time ? "alarm at t=" + std::to_string(*result.stopping_time)
                                             : std::string("no alarm"))
                    << '\n';
            }
            return result.stopping_time ? kExitAlarm : kExitOk;
        }

        if (simulate_cmd->parsed()) {
            const auto start = Clock::now();
            ScenarioSpec scenario = example_scenario(example, seed);
            if (example == 1 && mu) scenario = example1(seed, *mu);
            if (example == 3 && narrow_uniform) scenario = example3(seed, UniformSupport::Narrow);
            BenchmarkOptions options;
            options.reps = sim_reps;
            options.seed = seed;
            options.threads = threads;
            options.warmup = warmup;
            options.margin = margin;
            const BenchmarkCell cell{scenario, family.spec()};
            const auto row = run_benchmark_cell(cell, options);

            nlohmann::json j = row;
            j["schema_version"] = kSchemaVersion;
            j["command"] = "simulate";
            j["example"] = example;
            j["seed"] = seed;
            j["reps"] = sim_reps;
            j["change_time"] = scenario.change_time;
            j["length"] = scenario.length;
            j["config"] = family_json(cell.spec);
            j["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
            write_json(j, sim_out, out);
            return kExitOk;
        }

        if (benchmark_cmd->parsed()) {
            BenchmarkOptions options;
            options.reps = bench_reps;
            options.seed = seed;
            options.threads = threads;
            options.warmup = warmup;
            options.margin = margin;
            const auto rows = run_benchmark(table1_cells(seed), options);
            if (bench_out.empty()) {
                write_benchmark_csv(out, rows);
            } else {
                std::ofstream file(bench_out);
                if (!file) throw std::runtime_error("cannot write '" + bench_out + "'");
                write_benchmark_csv(file, rows);
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace ccpd::cli
