#include "latdens/compositional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latdens {

Composition::Composition(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2)
        throw std::invalid_argument("Composition: need at least 2 categories");
    for (Eigen::Index k = 0; k < probs_.size(); ++k)
        if (!(probs_[k] > 0.0))
            throw std::invalid_argument("Composition: non-positive probability in category " +
                                        std::to_string(k));
    double total = probs_.sum();
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("Composition: probabilities sum to " +
                                    std::to_string(total) + ", not 1");
}

Eigen::VectorXd clr_discrete(const Composition& pi) {
    Eigen::VectorXd logs = pi.probs().array().log();
    return logs.array() - logs.mean();
}

Composition clr_discrete_inverse(const Eigen::VectorXd& rho) {
    if (!rho.allFinite())
        throw std::invalid_argument("clr_discrete_inverse: values must be finite");
    Eigen::ArrayXd shifted = rho.array() - rho.maxCoeff();
    Eigen::VectorXd probs = shifted.exp();
    probs /= probs.sum();
    return Composition(std::move(probs));
}

Eigen::MatrixXd egozcue_basis(int n_categories) {
    if (n_categories < 2)
        throw std::invalid_argument("egozcue_basis: need at least 2 categories");
    const int d = n_categories;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, d - 1);
    for (int k = 1; k <= d - 1; ++k) {
        double scale = std::sqrt(static_cast<double>(k) / (k + 1.0));
        for (int j = 0; j < k; ++j) basis(j, k - 1) = scale / k;
        basis(k, k - 1) = -scale;
    }
    return basis;
}

CountData::CountData(std::vector<Eigen::VectorXi> groups, int n_categories)
    : groups_(std::move(groups)), n_categories_(n_categories) {
    if (n_categories_ < 2)
        throw std::invalid_argument("CountData: need at least 2 categories");
    if (groups_.empty())
        throw std::invalid_argument("CountData: need at least one group");
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.size() != n_categories_)
            throw std::invalid_argument("CountData: group " + std::to_string(i) +
                                        " has " + std::to_string(g.size()) +
                                        " categories, expected " +
                                        std::to_string(n_categories_));
        if ((g.array() < 0).any())
            throw std::invalid_argument("CountData: negative count in group " +
                                        std::to_string(i));
        if (g.sum() < 1)
            throw std::invalid_argument("CountData: group " + std::to_string(i) +
                                        " has no observations");
    }
}

Grid category_grid(int n_categories) {
    // Unit cell width: quadrature sums coincide with category sums and the
    // Euclidean geometry of the simplex coordinates.
    return Grid(0.0, static_cast<double>(n_categories), n_categories);
}

CompositionalFit fit_compositional(const CountData& data, const McemConfig& cfg) {
    const int d = data.n_categories();
    Grid grid = category_grid(d);
    Basis basis = Basis::explicit_orthonormal(grid, egozcue_basis(d));

    std::vector<Eigen::VectorXd> counts;
    counts.reserve(data.n_groups());
    for (int i = 0; i < data.n_groups(); ++i)
        counts.push_back(data.group(i).cast<double>());

    FitResult result = fit_counts(counts, basis, init_identity(basis), cfg);

    CompositionalFit out{std::move(result.model),
                         std::move(result.pca),
                         std::move(result.trace),
                         result.converged,
                         result.iterations,
                         clr_discrete_inverse(Eigen::VectorXd::Zero(d)),
                         {},
                         {}};
    out.mean = clr_discrete_inverse(out.model.mean_function().values());

    const int k_scores = static_cast<int>(out.pca.scores.cols());
    out.directions.reserve(k_scores);
    for (int k = 0; k < k_scores; ++k)
        out.directions.push_back(clr_discrete_inverse(
            out.pca.eigenfunctions[k].function().values()));

    out.predicted.reserve(data.n_groups());
    for (int i = 0; i < data.n_groups(); ++i) {
        Density predicted = reconstruct_density(
            out.pca, out.pca.scores.row(i).transpose(), k_scores);
        // Unit cell width makes density values probabilities directly.
        out.predicted.push_back(Composition(predicted.values()));
    }
    return out;
}

}  // namespace latdens
