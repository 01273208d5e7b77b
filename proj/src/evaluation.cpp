#include "latdens/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace latdens {

OracleEstimates oracle_estimates(const std::vector<Density>& true_densities) {
    const int n = static_cast<int>(true_densities.size());
    if (n < 2)
        throw std::invalid_argument("oracle_estimates: need at least 2 densities");
    const Grid& grid = true_densities.front().grid();
    const int cells = grid.n_cells();

    Eigen::MatrixXd clrs(cells, n);
    for (int i = 0; i < n; ++i) {
        detail::require_same_grid(grid, true_densities[i].grid(), "oracle_estimates");
        clrs.col(i) = clr(true_densities[i]).values();
    }

    Eigen::VectorXd mean = clrs.rowwise().mean();
    Eigen::MatrixXd centered = clrs.colwise() - mean;
    Eigen::MatrixXd covariance =
        (centered * centered.transpose()) / static_cast<double>(n);
    return OracleEstimates{GridFunction(grid, std::move(mean)),
                           std::move(covariance), true_densities};
}

InitialValues two_step_moments(const SampleSet& data, const KdeConfig& cfg,
                               const Basis& basis) {
    return init_from_kde(data, cfg, basis);
}

PCARepresentation two_step_pca(const SampleSet& data, const KdeConfig& cfg) {
    Basis basis = make_basis(data.grid());
    InitialValues moments = two_step_moments(data, cfg, basis);
    LatentDensityModel model(basis, moments.nu, moments.sigma);
    PCARepresentation pca = eigen_decompose(model);

    // Scores: L2 projections of the centered clr estimates onto the
    // eigenfunctions, for every component with numerically nonzero
    // variance.
    const int n = data.n_groups();
    double top = pca.eigenvalues.size() > 0 ? pca.eigenvalues[0] : 0.0;
    int k_keep = 0;
    while (k_keep < pca.eigenvalues.size() &&
           pca.eigenvalues[k_keep] > 1e-12 * std::max(1.0, top))
        ++k_keep;

    pca.scores = Eigen::MatrixXd::Zero(n, k_keep);
    for (int i = 0; i < n; ++i) {
        GridFunction centered =
            clr(kde(data.group(i), cfg, data.grid())).function() -
            pca.mean.function();
        for (int k = 0; k < k_keep; ++k)
            pca.scores(i, k) =
                inner_product(centered, pca.eigenfunctions[k].function());
    }
    return pca;
}

double mean_distance(const GridFunction& a, const GridFunction& b) {
    detail::require_same_grid(a.grid(), b.grid(), "mean_distance");
    return l2_norm(a - b);
}

double cov_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const Grid& grid) {
    if (a.rows() != grid.n_cells() || a.cols() != grid.n_cells() ||
        b.rows() != grid.n_cells() || b.cols() != grid.n_cells())
        throw std::invalid_argument("cov_distance: surfaces must be n_cells x n_cells");
    double width = grid.cell_width();
    return width * (a - b).norm();
}

}  // namespace latdens
