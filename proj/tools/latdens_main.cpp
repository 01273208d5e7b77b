#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "latdens/commands.hpp"

namespace {

constexpr double kUnsetBound = std::numeric_limits<double>::quiet_NaN();

// Fills `target` from the config for flags not given on the command line;
// command-line values always win.
template <typename T>
void maybe_set(const CLI::App* cmd, const nlohmann::json& config,
               const std::string& flag, T& target) {
    const CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
    if (opt != nullptr && opt->count() > 0) return;
    auto it = config.find(flag);
    if (it == config.end()) return;
    try {
        target = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw CLI::ValidationError("config", "config key '" + flag +
                                                 "' has the wrong type");
    }
}

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("config", "cannot open config file '" + path + "'");
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& err) {
        throw CLI::ValidationError("config", std::string("config is not valid JSON: ") + err.what());
    }
    if (!parsed.is_object())
        throw CLI::ValidationError("config", "config must be a JSON object");
    return parsed;
}

void require_interval(double lower, double upper) {
    if (std::isnan(lower) || std::isnan(upper))
        throw CLI::RequiredError("--lower and --upper (flags or config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "latdens: functional principal component analysis for densities "
        "observed only through samples"};
    app.require_subcommand(1);

    latdens::cli::FitOptions fit_opt;
    fit_opt.lower = kUnsetBound;
    fit_opt.upper = kUnsetBound;
    std::string fit_config;
    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "Fit the latent density model to grouped observations");
    fit_cmd->add_option("input", fit_opt.input, "CSV with header group_id,value")
        ->required();
    fit_cmd->add_option("--output-dir", fit_opt.output_dir, "Output directory");
    fit_cmd->add_option("--lower", fit_opt.lower, "Interval lower bound");
    fit_cmd->add_option("--upper", fit_opt.upper, "Interval upper bound");
    fit_cmd->add_option("--cells", fit_opt.cells, "Number of grid cells");
    fit_cmd->add_option("--bandwidth", fit_opt.bandwidth,
                        "Gaussian KDE bandwidth for the starting values");
    fit_cmd->add_option("--lambda", fit_opt.lambda, "Proposal variance scale");
    fit_cmd->add_option("--r0", fit_opt.r0,
                        "Draws per group and iteration: r = r0 * h");
    fit_cmd->add_option("--var-explained", fit_opt.var_explained,
                        "Variance fraction retained per iteration");
    fit_cmd->add_option("--epsilon", fit_opt.epsilon, "Convergence threshold");
    fit_cmd->add_option("--max-iter", fit_opt.max_iter, "Iteration cap");
    fit_cmd->add_option("--seed", fit_opt.seed, "RNG seed");
    fit_cmd->add_option("--config", fit_config,
                        "JSON object with defaults for any flag");

    latdens::cli::TwoStepOptions twostep_opt;
    twostep_opt.lower = kUnsetBound;
    twostep_opt.upper = kUnsetBound;
    std::string twostep_config;
    CLI::App* twostep_cmd = app.add_subcommand(
        "twostep", "Two-step baseline: KDE, clr transform, then PCA");
    twostep_cmd->add_option("input", twostep_opt.input, "CSV with header group_id,value")
        ->required();
    twostep_cmd->add_option("--output-dir", twostep_opt.output_dir, "Output directory");
    twostep_cmd->add_option("--lower", twostep_opt.lower, "Interval lower bound");
    twostep_cmd->add_option("--upper", twostep_opt.upper, "Interval upper bound");
    twostep_cmd->add_option("--cells", twostep_opt.cells, "Number of grid cells");
    twostep_cmd->add_option("--bandwidth", twostep_opt.bandwidth,
                            "Gaussian KDE bandwidth");
    twostep_cmd->add_option("--config", twostep_config,
                            "JSON object with defaults for any flag");

    latdens::cli::SimulateOptions simulate_opt;
    std::string simulate_config;
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate", "Simulation study comparing the latent model with the "
                    "two-step baseline against oracle estimates");
    simulate_cmd->add_option("--output-dir", simulate_opt.output_dir,
                             "Output directory");
    simulate_cmd->add_option("--replicates", simulate_opt.replicates,
                             "Replicates per group size");
    simulate_cmd->add_option("--m-list", simulate_opt.m_list,
                             "Observations per group (list)");
    simulate_cmd->add_option("--bandwidths", simulate_opt.bandwidths,
                             "KDE bandwidths aligned with --m-list");
    simulate_cmd->add_option("--groups", simulate_opt.groups, "Number of groups");
    simulate_cmd->add_option("--cells", simulate_opt.cells, "Number of grid cells");
    simulate_cmd->add_option("--lambda", simulate_opt.lambda,
                             "Proposal variance scale");
    simulate_cmd->add_option("--r0", simulate_opt.r0,
                             "Draws per group and iteration: r = r0 * h");
    simulate_cmd->add_option("--var-explained", simulate_opt.var_explained,
                             "Variance fraction retained per iteration");
    simulate_cmd->add_option("--epsilon", simulate_opt.epsilon,
                             "Convergence threshold");
    simulate_cmd->add_option("--max-iter", simulate_opt.max_iter, "Iteration cap");
    simulate_cmd->add_option("--seed", simulate_opt.seed, "Master RNG seed");
    simulate_cmd->add_option("--config", simulate_config,
                             "JSON object with defaults for any flag");

    latdens::cli::CompositionalOptions comp_opt;
    std::string comp_config;
    CLI::App* comp_cmd = app.add_subcommand(
        "compositional", "Fit the latent model to count compositions");
    comp_cmd->add_option("input", comp_opt.input,
                         "CSV with header group_id,category,count")
        ->required();
    comp_cmd->add_option("--output-dir", comp_opt.output_dir, "Output directory");
    comp_cmd->add_option("--lambda", comp_opt.lambda, "Proposal variance scale");
    comp_cmd->add_option("--r0", comp_opt.r0,
                         "Draws per group and iteration: r = r0 * h");
    comp_cmd->add_option("--var-explained", comp_opt.var_explained,
                         "Variance fraction retained per iteration");
    comp_cmd->add_option("--epsilon", comp_opt.epsilon, "Convergence threshold");
    comp_cmd->add_option("--max-iter", comp_opt.max_iter, "Iteration cap");
    comp_cmd->add_option("--seed", comp_opt.seed, "RNG seed");
    comp_cmd->add_option("--config", comp_config,
                         "JSON object with defaults for any flag");

    try {
        app.parse(argc, argv);

        if (fit_cmd->parsed()) {
            nlohmann::json config = load_config(fit_config);
            maybe_set(fit_cmd, config, "output-dir", fit_opt.output_dir);
            maybe_set(fit_cmd, config, "lower", fit_opt.lower);
            maybe_set(fit_cmd, config, "upper", fit_opt.upper);
            maybe_set(fit_cmd, config, "cells", fit_opt.cells);
            maybe_set(fit_cmd, config, "bandwidth", fit_opt.bandwidth);
            maybe_set(fit_cmd, config, "lambda", fit_opt.lambda);
            maybe_set(fit_cmd, config, "r0", fit_opt.r0);
            maybe_set(fit_cmd, config, "var-explained", fit_opt.var_explained);
            maybe_set(fit_cmd, config, "epsilon", fit_opt.epsilon);
            maybe_set(fit_cmd, config, "max-iter", fit_opt.max_iter);
            maybe_set(fit_cmd, config, "seed", fit_opt.seed);
            require_interval(fit_opt.lower, fit_opt.upper);
            return latdens::cli::run_fit(fit_opt);
        }
        if (twostep_cmd->parsed()) {
            nlohmann::json config = load_config(twostep_config);
            maybe_set(twostep_cmd, config, "output-dir", twostep_opt.output_dir);
            maybe_set(twostep_cmd, config, "lower", twostep_opt.lower);
            maybe_set(twostep_cmd, config, "upper", twostep_opt.upper);
            maybe_set(twostep_cmd, config, "cells", twostep_opt.cells);
            maybe_set(twostep_cmd, config, "bandwidth", twostep_opt.bandwidth);
            require_interval(twostep_opt.lower, twostep_opt.upper);
            return latdens::cli::run_twostep(twostep_opt);
        }
        if (simulate_cmd->parsed()) {
            nlohmann::json config = load_config(simulate_config);
            maybe_set(simulate_cmd, config, "output-dir", simulate_opt.output_dir);
            maybe_set(simulate_cmd, config, "replicates", simulate_opt.replicates);
            maybe_set(simulate_cmd, config, "m-list", simulate_opt.m_list);
            maybe_set(simulate_cmd, config, "bandwidths", simulate_opt.bandwidths);
            maybe_set(simulate_cmd, config, "groups", simulate_opt.groups);
            maybe_set(simulate_cmd, config, "cells", simulate_opt.cells);
            maybe_set(simulate_cmd, config, "lambda", simulate_opt.lambda);
            maybe_set(simulate_cmd, config, "r0", simulate_opt.r0);
            maybe_set(simulate_cmd, config, "var-explained",
                      simulate_opt.var_explained);
            maybe_set(simulate_cmd, config, "epsilon", simulate_opt.epsilon);
            maybe_set(simulate_cmd, config, "max-iter", simulate_opt.max_iter);
            maybe_set(simulate_cmd, config, "seed", simulate_opt.seed);
            return latdens::cli::run_simulate(simulate_opt);
        }
        if (comp_cmd->parsed()) {
            nlohmann::json config = load_config(comp_config);
            maybe_set(comp_cmd, config, "output-dir", comp_opt.output_dir);
            maybe_set(comp_cmd, config, "lambda", comp_opt.lambda);
            maybe_set(comp_cmd, config, "r0", comp_opt.r0);
            maybe_set(comp_cmd, config, "var-explained", comp_opt.var_explained);
            maybe_set(comp_cmd, config, "epsilon", comp_opt.epsilon);
            maybe_set(comp_cmd, config, "max-iter", comp_opt.max_iter);
            maybe_set(comp_cmd, config, "seed", comp_opt.seed);
            return latdens::cli::run_compositional(comp_opt);
        }
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? latdens::cli::exit_ok : latdens::cli::exit_usage;
    }
    return latdens::cli::exit_usage;
}
