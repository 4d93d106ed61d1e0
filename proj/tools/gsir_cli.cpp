// gsir: command-line front end for the experiment harness and estimator.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "gsir.hpp"

namespace {

using namespace gsir;
using namespace gsir::harness;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string model;
    std::string data;
    Index n = 0;
    int rep = 0;
};

ExperimentConfig load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.base_seed = *o.seed;
    return c;
}

void emit(const Options& o, const ExperimentConfig& c, const std::string& content) {
    const std::string path = !o.out.empty() ? o.out : c.output_path;
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_text_file(path, content);
}

void expect_mode(const ExperimentConfig& c, Mode m) {
    if (c.mode != m) throw ConfigError("config mode is '" + to_string(c.mode) + "', expected '" + to_string(m) + "'");
}

int cmd_theory(const Options& o) {
    const ExperimentConfig c = load(o);
    expect_mode(c, Mode::theory_table);
    emit(o, c, theory_csv(run_theory_table(c)));
    return kExitOk;
}

int cmd_sim_rate(const Options& o) {
    const ExperimentConfig c = load(o);
    expect_mode(c, Mode::sim_rate);
    const RateReport report = run_sim_rate(c, o.threads);
    emit(o, c, sim_rate_csv(report));
    std::cerr << sim_rate_summary(report);
    return kExitOk;
}

int cmd_kernel_recovery(const Options& o) {
    const ExperimentConfig c = load(o);
    expect_mode(c, Mode::kernel_recovery);
    const RecoveryReport report = run_kernel_recovery(c, o.threads);
    emit(o, c, kernel_recovery_csv(report));
    std::cerr << kernel_recovery_summary(report);
    return kExitOk;
}

struct TrainingData {
    MatrixXd X, Y;
};

TrainingData training_data(const Options& o, const ExperimentConfig& c) {
    if (!o.data.empty()) {
        const CsvTable t = read_csv_file(o.data);
        TrainingData d{t.numbered_columns("x_"), MatrixXd()};
        const Index y = t.column("y");
        d.Y = y >= 0 ? MatrixXd(t.values.col(y)) : t.numbered_columns("y_");
        if (d.X.cols() == 0 || d.Y.cols() == 0) throw InputError(o.data + ": need columns x_1.. and y (or y_1..)");
        return d;
    }
    const Index n = o.n > 0 ? o.n : c.n_grid.front();
    const auto data =
        datagen::generate(c.model, n, derive_seed(c.base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(o.rep)));
    return {data.X, data.Y};
}

int cmd_fit(const Options& o) {
    const ExperimentConfig c = load(o);
    expect_mode(c, Mode::kernel_recovery);
    const TrainingData d = training_data(o, c);
    const GsirProblem problem(d.X, d.Y, c.kernel_x.resolve(d.X), c.kernel_y.resolve(d.Y));
    const GsirFit fit = problem.solve(c.variants.front(), kernel_epsilon(c, d.X.rows()), c.d);
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";
    emit(o, c, model_to_json(fit));
    return kExitOk;
}

int cmd_predict(const Options& o) {
    if (o.model.empty() || o.data.empty()) throw ConfigError("predict needs --model and --data");
    const GsirFit fit = model_from_json(read_json_file(o.model));
    const CsvTable t = read_csv_file(o.data);
    const MatrixXd x = t.numbered_columns("x_");
    if (x.cols() == 0) throw InputError(o.data + ": need columns x_1..x_p");
    const std::string csv = predictions_csv(evaluate_predictors(fit, x));
    if (o.out.empty() || o.out == "-")
        std::cout << csv;
    else
        write_text_file(o.out, csv);
    return kExitOk;
}

int cmd_generate(const Options& o) {
    const ExperimentConfig c = load(o);
    expect_mode(c, Mode::kernel_recovery);
    const Index n = o.n > 0 ? o.n : c.n_grid.front();
    const auto data =
        datagen::generate(c.model, n, derive_seed(c.base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(o.rep)));
    emit(o, c, dataset_csv(data));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized sliced inverse regression: estimator, simulations and rate theory"};
    app.require_subcommand(1);
    Options o;
    o.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", o.config, "experiment config (JSON)");
        if (config_required) opt->required();
        sub->add_option("--out", o.out, "output path ('-' for stdout; default: config output_path or stdout)");
        sub->add_option("--seed", o.seed, "override base_seed");
    };

    auto* theory = app.add_subcommand("theory", "tabulate optimal rates and bound terms");
    common(theory, true);
    auto* sim_rate = app.add_subcommand("sim-rate", "spectral simulation of estimation rates");
    common(sim_rate, true);
    sim_rate->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* recovery = app.add_subcommand("kernel-recovery", "end-to-end recovery on synthetic models");
    common(recovery, true);
    recovery->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    auto* fit = app.add_subcommand("fit", "fit one GSIR model and write it as JSON");
    common(fit, true);
    fit->add_option("--data", o.data, "training CSV with columns x_1..x_p, y (default: generate from config)");
    fit->add_option("--n", o.n, "sample size when generating (default: first n_grid entry)");
    fit->add_option("--rep", o.rep, "replication index when generating")->check(CLI::NonNegativeNumber);
    auto* predict = app.add_subcommand("predict", "evaluate a fitted model at new points");
    predict->add_option("--model", o.model, "model JSON written by 'fit'")->required();
    predict->add_option("--data", o.data, "CSV with columns x_1..x_p")->required();
    predict->add_option("--out", o.out, "output CSV path (default stdout)");
    auto* generate = app.add_subcommand("generate", "write a synthetic dataset as CSV");
    common(generate, true);
    generate->add_option("--n", o.n, "sample size (default: first n_grid entry)");
    generate->add_option("--rep", o.rep, "replication index")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*theory) return cmd_theory(o);
        if (*sim_rate) return cmd_sim_rate(o);
        if (*recovery) return cmd_kernel_recovery(o);
        if (*fit) return cmd_fit(o);
        if (*predict) return cmd_predict(o);
        if (*generate) return cmd_generate(o);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
