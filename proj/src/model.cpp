#include "latdens/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace latdens {

namespace {

constexpr double kSymmetryTol = 1e-6;
constexpr double kEigenClipTol = 1e-10;

// Flip columns so the largest-magnitude entry of each is positive; keeps
// eigenvector signs well defined for exports and reproducibility.
void fix_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

}  // namespace

LatentDensityModel::LatentDensityModel(Basis basis, Eigen::VectorXd nu,
                                       Eigen::MatrixXd sigma)
    : basis_(std::move(basis)), nu_(std::move(nu)), sigma_(std::move(sigma)) {
    const int n = basis_.size();
    if (nu_.size() != n)
        throw std::invalid_argument("LatentDensityModel: nu has length " +
                                    std::to_string(nu_.size()) + ", basis has " +
                                    std::to_string(n) + " functions");
    if (sigma_.rows() != n || sigma_.cols() != n)
        throw std::invalid_argument("LatentDensityModel: sigma must be " +
                                    std::to_string(n) + "x" + std::to_string(n));
    double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol)
        throw std::invalid_argument(
            "LatentDensityModel: sigma asymmetric beyond tolerance (defect " +
            std::to_string(asym) + ")");
    sigma_ = 0.5 * (sigma_ + sigma_.transpose());
    if (basis_.sum_zero_coefficients()) {
        nu_ = project_sum_zero(nu_);
        sigma_ = project_sum_zero(sigma_);
        sigma_ = 0.5 * (sigma_ + sigma_.transpose());
    }
}

GridFunction LatentDensityModel::mean_function() const {
    return expand(nu_, basis_);
}

Eigen::MatrixXd kernel_matrix(const LatentDensityModel& model) {
    const Eigen::MatrixXd& e = model.basis().functions();  // n_cells x N
    Eigen::MatrixXd k = e * model.sigma() * e.transpose();
    return 0.5 * (k + k.transpose());
}

PCARepresentation eigen_decompose(const LatentDensityModel& model) {
    const Eigen::MatrixXd& gram = model.basis().gram();
    double gram_defect =
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (gram_defect > 1e-8)
        throw std::invalid_argument(
            "eigen_decompose: basis must be orthonormal (Gram defect " +
            std::to_string(gram_defect) + ")");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.sigma());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen_decompose: eigensolver failed");

    const int n = model.dimension();
    // Ascending from Eigen; flip to nonincreasing.
    Eigen::VectorXd values = solver.eigenvalues().reverse();
    Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    fix_signs(vectors);

    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    for (int k = 0; k < n; ++k) {
        if (values[k] < -kEigenClipTol * scale)
            throw std::runtime_error("eigen_decompose: eigenvalue " +
                                     std::to_string(values[k]) +
                                     " below PSD tolerance");
        // Rank-deficiency noise: eigenvalues at rounding level (either
        // sign) count as zero, their directions as null space.
        if (values[k] < 1e-12 * scale) values[k] = 0.0;
    }

    PCARepresentation pca{ClrFunction(model.mean_function()), {}, values,
                          Eigen::VectorXd::Zero(n), Eigen::MatrixXd()};
    // Eigenvectors of the null space are arbitrary within it (for
    // sum-zero-coefficient bases it contains the constant vector), so only
    // positive-variance directions define eigenfunctions.
    pca.eigenfunctions.reserve(n);
    for (int k = 0; k < n && values[k] > 0.0; ++k)
        pca.eigenfunctions.emplace_back(expand(vectors.col(k), model.basis()));

    double total = values.sum();
    double cum = 0.0;
    for (int k = 0; k < n; ++k) {
        cum += values[k];
        pca.variance_explained[k] = total > 0.0 ? cum / total : 0.0;
    }
    return pca;
}

Density reconstruct_density(const PCARepresentation& pca,
                            const Eigen::VectorXd& scores, int k_components) {
    if (k_components < 0 ||
        k_components > static_cast<int>(pca.eigenfunctions.size()))
        throw std::invalid_argument("reconstruct_density: k_components out of range");
    if (scores.size() < k_components)
        throw std::invalid_argument("reconstruct_density: got " +
                                    std::to_string(scores.size()) +
                                    " scores for " + std::to_string(k_components) +
                                    " components");
    GridFunction g = pca.mean.function();
    for (int k = 0; k < k_components; ++k)
        g += scores[k] * pca.eigenfunctions[k].function();
    return clr_inverse(g);
}

BayesPcaView bayes_pca_view(const PCARepresentation& pca) {
    BayesPcaView view{clr_inverse(pca.mean), {}};
    view.components.reserve(pca.eigenfunctions.size());
    for (std::size_t k = 0; k < pca.eigenfunctions.size(); ++k) {
        double sd = std::sqrt(std::max(0.0, pca.eigenvalues[static_cast<int>(k)]));
        const GridFunction& phi = pca.eigenfunctions[k].function();
        view.components.push_back(BayesPcaView::Component{
            clr_inverse(phi),
            clr_inverse(pca.mean.function() + sd * phi),
            clr_inverse(pca.mean.function() - sd * phi),
        });
    }
    return view;
}

}  // namespace latdens
