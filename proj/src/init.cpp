#include "latdens/init.hpp"

#include <cmath>
#include <stdexcept>

namespace latdens {

namespace {

// Standard normal CDF.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

Density kde(const Eigen::VectorXd& observations, const KdeConfig& cfg,
            const Grid& grid) {
    if (observations.size() < 1)
        throw std::invalid_argument("kde: need at least one observation");
    if (!(cfg.bandwidth > 0.0))
        throw std::invalid_argument("kde: bandwidth must be positive");
    if (!(cfg.floor > 0.0))
        throw std::invalid_argument("kde: floor must be positive");

    const double h = cfg.bandwidth;
    const double inv_norm = 1.0 / (h * std::sqrt(2.0 * M_PI));
    Eigen::VectorXd mids = grid.midpoints();
    Eigen::VectorXd estimate = Eigen::VectorXd::Zero(grid.n_cells());

    for (Eigen::Index j = 0; j < observations.size(); ++j) {
        Eigen::ArrayXd u = (mids.array() - observations[j]) / h;
        estimate += ((-0.5 * u.square()).exp() * inv_norm).matrix();
    }
    estimate /= static_cast<double>(observations.size());

    // Truncation to the interval: divide by the kernel mass the interval
    // holds at each evaluation point, which removes the downward boundary
    // bias of the plain estimate (exact for the uniform density).
    for (int k = 0; k < grid.n_cells(); ++k) {
        double mass = normal_cdf((grid.upper() - mids[k]) / h) -
                      normal_cdf((grid.lower() - mids[k]) / h);
        if (mass > 0.0) estimate[k] /= mass;
    }

    estimate = estimate.cwiseMax(cfg.floor);
    return Density::normalized(GridFunction(grid, std::move(estimate)));
}

InitialValues init_from_kde(const SampleSet& data, const KdeConfig& cfg,
                            const Basis& basis) {
    detail::require_same_grid(data.grid(), basis.grid(), "init_from_kde");
    const int n = data.n_groups();
    if (n < 2)
        throw std::invalid_argument(
            "init_from_kde: need at least 2 groups for an empirical "
            "covariance; use init_identity instead");

    const int dim = basis.size();
    Eigen::MatrixXd coeffs(dim, n);
    for (int i = 0; i < n; ++i) {
        Density estimate = kde(data.group(i), cfg, data.grid());
        coeffs.col(i) = project(clr(estimate).function(), basis);
    }

    InitialValues init;
    init.nu = coeffs.rowwise().mean();
    Eigen::MatrixXd centered = coeffs.colwise() - init.nu;
    init.sigma = (centered * centered.transpose()) / static_cast<double>(n);
    if (basis.sum_zero_coefficients()) {
        init.nu = project_sum_zero(init.nu);
        init.sigma = project_sum_zero(init.sigma);
    }
    init.sigma = 0.5 * (init.sigma + init.sigma.transpose());
    return init;
}

InitialValues init_identity(const Basis& basis) {
    const int dim = basis.size();
    InitialValues init;
    init.nu = Eigen::VectorXd::Zero(dim);
    init.sigma = Eigen::MatrixXd::Identity(dim, dim);
    if (basis.sum_zero_coefficients())
        init.sigma = project_sum_zero(init.sigma);
    return init;
}

}  // namespace latdens
