#include "latdens/commands.hpp"

#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include "latdens/evaluation.hpp"
#include "latdens/io.hpp"
#include "latdens/mcem.hpp"
#include "latdens/simulation.hpp"

namespace latdens::cli {

namespace {

namespace fs = std::filesystem;

SampleSet load_samples(const std::string& path, const Grid& grid,
                       std::vector<std::string>& group_ids) {
    io::SampleTable table = io::read_sample_csv(path);
    group_ids = table.group_ids;
    std::vector<Eigen::VectorXd> groups;
    groups.reserve(table.values.size());
    for (std::size_t i = 0; i < table.values.size(); ++i) {
        const auto& v = table.values[i];
        for (double x : v) {
            if (!(x >= grid.lower() && x <= grid.upper()))
                throw std::invalid_argument(
                    "group '" + table.group_ids[i] + "': value " +
                    io::format_double(x) + " outside [" +
                    io::format_double(grid.lower()) + ", " +
                    io::format_double(grid.upper()) + "]");
        }
        groups.push_back(Eigen::Map<const Eigen::VectorXd>(
            v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return SampleSet(grid, std::move(groups));
}

int report_usage_error(const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_usage;
}

int report_numerical_error(const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_numerical;
}

}  // namespace

int run_fit(const FitOptions& opt) {
    try {
        Grid grid(opt.lower, opt.upper, opt.cells);
        std::vector<std::string> group_ids;
        SampleSet data = load_samples(opt.input, grid, group_ids);
        Basis basis = make_basis(grid);
        KdeConfig kde_cfg{opt.bandwidth, 1e-10};
        McemConfig mcem_cfg;
        mcem_cfg.epsilon = opt.epsilon;
        mcem_cfg.lambda = opt.lambda;
        mcem_cfg.mc_growth = opt.r0;
        mcem_cfg.var_explained = opt.var_explained;
        mcem_cfg.max_iterations = opt.max_iter;
        mcem_cfg.seed = opt.seed;
        mcem_cfg.validate();

        InitialValues init = init_from_kde(data, kde_cfg, basis);
        FitResult result = fit(data, basis, init, mcem_cfg);

        nlohmann::json metadata{
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"final_nu_change", result.final_nu_change},
            {"final_sigma_change", result.final_sigma_change},
            {"seed", opt.seed},
            {"bandwidth", opt.bandwidth},
        };
        io::write_model_json((fs::path(opt.output_dir) / "model.json").string(),
                             result.model, metadata);
        io::write_pca_exports(opt.output_dir, result.pca, group_ids);
        io::write_trace_csv((fs::path(opt.output_dir) / "trace.csv").string(),
                            result.trace);

        std::vector<Density> predicted;
        predicted.reserve(data.n_groups());
        const int k = static_cast<int>(result.pca.scores.cols());
        for (int i = 0; i < data.n_groups(); ++i)
            predicted.push_back(reconstruct_density(
                result.pca, result.pca.scores.row(i).transpose(), k));
        io::write_densities_csv(
            (fs::path(opt.output_dir) / "densities.csv").string(), group_ids,
            predicted);

        if (!result.converged) {
            std::cerr << "warning: not converged after " << result.iterations
                      << " iterations (nu change "
                      << io::format_double(result.final_nu_change)
                      << ", sigma change "
                      << io::format_double(result.final_sigma_change) << ")\n";
            return exit_numerical;
        }
        return exit_ok;
    } catch (const std::invalid_argument& err) {
        return report_usage_error(err);
    } catch (const std::domain_error& err) {
        return report_usage_error(err);
    } catch (const std::exception& err) {
        return report_numerical_error(err);
    }
}

int run_twostep(const TwoStepOptions& opt) {
    try {
        Grid grid(opt.lower, opt.upper, opt.cells);
        std::vector<std::string> group_ids;
        SampleSet data = load_samples(opt.input, grid, group_ids);
        KdeConfig kde_cfg{opt.bandwidth, 1e-10};

        PCARepresentation pca = two_step_pca(data, kde_cfg);
        io::write_pca_exports(opt.output_dir, pca, group_ids);

        std::vector<Density> estimates;
        estimates.reserve(data.n_groups());
        for (int i = 0; i < data.n_groups(); ++i)
            estimates.push_back(kde(data.group(i), kde_cfg, grid));
        io::write_densities_csv(
            (fs::path(opt.output_dir) / "densities.csv").string(), group_ids,
            estimates);
        return exit_ok;
    } catch (const std::invalid_argument& err) {
        return report_usage_error(err);
    } catch (const std::domain_error& err) {
        return report_usage_error(err);
    } catch (const std::exception& err) {
        return report_numerical_error(err);
    }
}

int run_simulate(const SimulateOptions& opt) {
    try {
        StudyConfig cfg;
        cfg.n_groups = opt.groups;
        cfg.m_per_group = opt.m_list;
        cfg.n_replicates = opt.replicates;
        cfg.grid = Grid(0.0, 1.0, opt.cells);
        cfg.master_seed = opt.seed;
        cfg.mcem.lambda = opt.lambda;
        cfg.mcem.mc_growth = opt.r0;
        cfg.mcem.var_explained = opt.var_explained;
        cfg.mcem.epsilon = opt.epsilon;
        cfg.mcem.max_iterations = opt.max_iter;

        if (!opt.bandwidths.empty()) {
            cfg.bandwidths = opt.bandwidths;
        } else {
            // Paper bandwidths for the four standard group sizes.
            cfg.bandwidths.clear();
            for (int m : cfg.m_per_group) {
                double bw = 0.0;
                if (m == 20) bw = 0.12;
                else if (m == 40) bw = 0.09;
                else if (m == 80) bw = 0.08;
                else if (m == 160) bw = 0.07;
                else
                    throw std::invalid_argument(
                        "no default bandwidth for m=" + std::to_string(m) +
                        "; pass --bandwidths");
                cfg.bandwidths.push_back(bw);
            }
        }
        cfg.validate();

        std::vector<StudyRow> rows = run_study(cfg);
        io::write_study_csv((fs::path(opt.output_dir) / "study.csv").string(),
                            rows);
        io::write_study_summary_json(
            (fs::path(opt.output_dir) / "summary.json").string(),
            summarize_study(rows));

        for (const auto& row : rows)
            if (row.flag.rfind("failed", 0) == 0) {
                std::cerr << "warning: replicate " << row.replicate << " (m="
                          << row.m_per_group << ") " << row.flag << "\n";
                return exit_numerical;
            }
        return exit_ok;
    } catch (const std::invalid_argument& err) {
        return report_usage_error(err);
    } catch (const std::exception& err) {
        return report_numerical_error(err);
    }
}

int run_compositional(const CompositionalOptions& opt) {
    try {
        io::CountTable table = io::read_count_csv(opt.input);
        CountData data(table.counts, static_cast<int>(table.categories.size()));

        McemConfig cfg;
        cfg.lambda = opt.lambda;
        cfg.mc_growth = opt.r0;
        cfg.var_explained = opt.var_explained;
        cfg.epsilon = opt.epsilon;
        cfg.max_iterations = opt.max_iter;
        cfg.seed = opt.seed;
        cfg.validate();

        CompositionalFit result = fit_compositional(data, cfg);

        nlohmann::json metadata{
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"seed", opt.seed},
            {"categories", table.categories},
        };
        io::write_model_json((fs::path(opt.output_dir) / "model.json").string(),
                             result.model, metadata);
        io::write_compositional_exports(opt.output_dir, result, table.group_ids,
                                        table.categories);
        io::write_trace_csv((fs::path(opt.output_dir) / "trace.csv").string(),
                            result.trace);

        if (!result.converged) {
            std::cerr << "warning: not converged after " << result.iterations
                      << " iterations\n";
            return exit_numerical;
        }
        return exit_ok;
    } catch (const std::invalid_argument& err) {
        return report_usage_error(err);
    } catch (const std::domain_error& err) {
        return report_usage_error(err);
    } catch (const std::exception& err) {
        return report_numerical_error(err);
    }
}

}  // namespace latdens::cli
