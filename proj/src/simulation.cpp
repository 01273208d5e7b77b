#include "latdens/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latdens {

TrueProcess true_process(const Grid& grid) {
    Eigen::VectorXd mids = grid.midpoints();
    Eigen::ArrayXd x = mids.array() - 0.5;
    Eigen::VectorXd mean = -20.0 * x.square() + 5.0 / 3.0;
    Eigen::VectorXd g1 = 0.2 * (10.0 * x).sin();
    Eigen::VectorXd g2 = 0.1 * (2.0 * M_PI * x).cos();
    return TrueProcess{GridFunction(grid, std::move(mean)),
                       GridFunction(grid, std::move(g1)),
                       GridFunction(grid, std::move(g2)), 0.5, 0.2};
}

DrawnDensities draw_densities(int n, const Grid& grid, rng::Stream& stream) {
    if (n < 1) throw std::invalid_argument("draw_densities: need n >= 1");
    TrueProcess truth = true_process(grid);
    double sd1 = std::sqrt(truth.var1);
    double sd2 = std::sqrt(truth.var2);

    DrawnDensities out;
    out.scores.resize(n, 2);
    out.densities.reserve(n);
    for (int i = 0; i < n; ++i) {
        double z1 = sd1 * stream.normal();
        double z2 = sd2 * stream.normal();
        out.scores(i, 0) = z1;
        out.scores(i, 1) = z2;
        out.densities.push_back(
            clr_inverse(truth.mean + z1 * truth.g1 + z2 * truth.g2));
    }
    return out;
}

Eigen::VectorXd sample_from_density(const Density& f, int m, rng::Stream& stream) {
    if (m < 1) throw std::invalid_argument("sample_from_density: need m >= 1");
    const Grid& grid = f.grid();
    const int cells = grid.n_cells();
    const double width = grid.cell_width();

    // Cell CDF.
    Eigen::VectorXd cdf(cells);
    double cum = 0.0;
    for (int k = 0; k < cells; ++k) {
        cum += f.values()[k] * width;
        cdf[k] = cum;
    }
    cdf[cells - 1] = 1.0;

    Eigen::VectorXd draws(m);
    for (int j = 0; j < m; ++j) {
        double u = stream.uniform();
        const double* begin = cdf.data();
        const double* pos = std::upper_bound(begin, begin + cells, u);
        int k = static_cast<int>(pos - begin);
        if (k >= cells) k = cells - 1;
        // Exact inversion of the piecewise-linear CDF: the scaled
        // remainder is uniform within the selected cell.
        double cell_mass = f.values()[k] * width;
        double prev = k > 0 ? cdf[k - 1] : 0.0;
        double frac = cell_mass > 0.0 ? (u - prev) / cell_mass : 0.5;
        frac = std::clamp(frac, 0.0, 1.0);
        double x = grid.lower() + (k + frac) * width;
        draws[j] = std::clamp(x, grid.lower(), grid.upper());
    }
    return draws;
}

void StudyConfig::validate() const {
    if (n_groups < 2) throw std::invalid_argument("StudyConfig: need at least 2 groups");
    if (n_replicates < 1) throw std::invalid_argument("StudyConfig: need at least 1 replicate");
    if (m_per_group.empty()) throw std::invalid_argument("StudyConfig: m list is empty");
    for (int m : m_per_group)
        if (m < 1) throw std::invalid_argument("StudyConfig: every m must be positive");
    if (bandwidths.size() != m_per_group.size())
        throw std::invalid_argument("StudyConfig: need one bandwidth per m");
    for (double bw : bandwidths)
        if (!(bw > 0.0)) throw std::invalid_argument("StudyConfig: bandwidths must be positive");
    mcem.validate();
}

std::vector<StudyRow> run_study(const StudyConfig& cfg) {
    cfg.validate();
    std::vector<StudyRow> rows;
    Basis basis = make_basis(cfg.grid);

    for (std::size_t mi = 0; mi < cfg.m_per_group.size(); ++mi) {
        const int m = cfg.m_per_group[mi];
        const KdeConfig kde_cfg{cfg.bandwidths[mi], 1e-10};

        for (int rep = 0; rep < cfg.n_replicates; ++rep) {
            StudyRow latent_row{rep, m, "latent", 0.0, 0.0, "ok"};
            StudyRow twostep_row{rep, m, "two_step_kde", 0.0, 0.0, "ok"};
            try {
                rng::Stream stream(rng::derive_key(
                    cfg.master_seed, static_cast<std::uint64_t>(m),
                    static_cast<std::uint64_t>(rep)));
                DrawnDensities truth =
                    draw_densities(cfg.n_groups, cfg.grid, stream);
                std::vector<Eigen::VectorXd> groups;
                groups.reserve(cfg.n_groups);
                for (int i = 0; i < cfg.n_groups; ++i)
                    groups.push_back(
                        sample_from_density(truth.densities[i], m, stream));
                SampleSet data(cfg.grid, std::move(groups));

                OracleEstimates oracle = oracle_estimates(truth.densities);

                // The KDE coefficient moments are both the two-step
                // estimate and the starting values of the latent fit.
                InitialValues moments = two_step_moments(data, kde_cfg, basis);
                LatentDensityModel twostep_model(basis, moments.nu, moments.sigma);
                twostep_row.mean_distance =
                    mean_distance(twostep_model.mean_function(), oracle.mean);
                twostep_row.cov_distance = cov_distance(
                    kernel_matrix(twostep_model), oracle.covariance, cfg.grid);

                McemConfig mcem_cfg = cfg.mcem;
                mcem_cfg.seed = rng::derive_key(
                    cfg.master_seed, static_cast<std::uint64_t>(m),
                    static_cast<std::uint64_t>(rep), 0x9e3779b9ULL);
                FitResult fitted = fit(data, basis, moments, mcem_cfg);
                if (!fitted.converged) latent_row.flag = "non_converged";
                latent_row.mean_distance =
                    mean_distance(fitted.model.mean_function(), oracle.mean);
                latent_row.cov_distance = cov_distance(
                    kernel_matrix(fitted.model), oracle.covariance, cfg.grid);
            } catch (const std::exception& err) {
                latent_row.flag = std::string("failed: ") + err.what();
                latent_row.mean_distance = std::nan("");
                latent_row.cov_distance = std::nan("");
                twostep_row.flag = latent_row.flag;
                twostep_row.mean_distance = std::nan("");
                twostep_row.cov_distance = std::nan("");
            }
            rows.push_back(std::move(latent_row));
            rows.push_back(std::move(twostep_row));
        }
    }
    return rows;
}

std::vector<StudySummaryRow> summarize_study(const std::vector<StudyRow>& rows) {
    std::vector<StudySummaryRow> summary;
    auto find = [&](int m, const std::string& method) -> StudySummaryRow& {
        for (auto& row : summary)
            if (row.m_per_group == m && row.method == method) return row;
        summary.push_back(StudySummaryRow{m, method, 0, 0, 0, 0, 0, 0});
        return summary.back();
    };

    // First pass: means.
    for (const auto& row : rows) {
        StudySummaryRow& s = find(row.m_per_group, row.method);
        if (row.flag.rfind("failed", 0) == 0) {
            ++s.n_flagged;
            continue;
        }
        if (row.flag != "ok") ++s.n_flagged;
        ++s.n_ok;
        s.mean_distance_mean += row.mean_distance;
        s.cov_distance_mean += row.cov_distance;
    }
    for (auto& s : summary) {
        if (s.n_ok > 0) {
            s.mean_distance_mean /= s.n_ok;
            s.cov_distance_mean /= s.n_ok;
        }
    }
    // Second pass: standard deviations.
    for (const auto& row : rows) {
        if (row.flag.rfind("failed", 0) == 0) continue;
        StudySummaryRow& s = find(row.m_per_group, row.method);
        double dm = row.mean_distance - s.mean_distance_mean;
        double dc = row.cov_distance - s.cov_distance_mean;
        s.mean_distance_sd += dm * dm;
        s.cov_distance_sd += dc * dc;
    }
    for (auto& s : summary) {
        if (s.n_ok > 1) {
            s.mean_distance_sd = std::sqrt(s.mean_distance_sd / (s.n_ok - 1));
            s.cov_distance_sd = std::sqrt(s.cov_distance_sd / (s.n_ok - 1));
        } else {
            s.mean_distance_sd = 0.0;
            s.cov_distance_sd = 0.0;
        }
    }
    return summary;
}

}  // namespace latdens
