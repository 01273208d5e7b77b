#pragma once

#include <vector>

#include "latdens/basis.hpp"
#include "latdens/bayes.hpp"

namespace latdens {

/**
 * Finite-dimensional latent Gaussian process in coefficient space: a basis
 * together with the mean vector nu and covariance matrix sigma of the
 * coefficients. Realizations are G = sum_k theta_k e_k with
 * theta ~ N(nu, sigma); densities arise as clr_inverse(G).
 *
 * Construction symmetrizes sigma and, for sum-zero-coefficient bases,
 * projects nu and sigma onto the complement of the constant vector so
 * every expansion lies in L2_0 exactly. A symmetry defect beyond 1e-6 is
 * rejected.
 */
class LatentDensityModel {
public:
    LatentDensityModel(Basis basis, Eigen::VectorXd nu, Eigen::MatrixXd sigma);

    const Basis& basis() const { return basis_; }
    const Eigen::VectorXd& nu() const { return nu_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    int dimension() const { return static_cast<int>(nu_.size()); }

    // The mean function sum_k nu_k e_k on the grid.
    GridFunction mean_function() const;

private:
    Basis basis_;
    Eigen::VectorXd nu_;
    Eigen::MatrixXd sigma_;
};

// Covariance kernel K(x, x') = sum_kl e_k(x) e_l(x') sigma_kl evaluated at
// all pairs of cell midpoints (n_cells x n_cells, symmetric).
Eigen::MatrixXd kernel_matrix(const LatentDensityModel& model);

/**
 * Functional PCA of a latent density model: mean function, orthonormal
 * eigenfunctions of the covariance operator with nonincreasing eigenvalues,
 * cumulative variance fractions, and (once predicted) per-group scores.
 *
 * eigenvalues and variance_explained cover all N components; there is one
 * eigenfunction per positive eigenvalue (null-space directions are
 * arbitrary within the null space and define no eigenfunction). scores,
 * when present, has one row per group and one column per retained
 * component, aligned with the leading eigenfunctions.
 */
struct PCARepresentation {
    ClrFunction mean;
    std::vector<ClrFunction> eigenfunctions;
    Eigen::VectorXd eigenvalues;
    Eigen::VectorXd variance_explained;
    Eigen::MatrixXd scores;  // n x K, empty until predicted
};

// Eigendecomposition of sigma mapped through the basis (requires identity
// Gram): eigenvector v_l becomes the eigenfunction sum_k v_lk e_k with the
// same eigenvalue. Eigenvalues are sorted nonincreasing; values in
// [-1e-10 * scale, 0) are clipped to zero; more negative values are
// rejected. Signs are fixed so each eigenvector's largest-magnitude
// coefficient is positive. Scores are left empty.
PCARepresentation eigen_decompose(const LatentDensityModel& model);

// clr_inverse(mean + sum_{k<K} scores_k eigenfunction_k).
Density reconstruct_density(const PCARepresentation& pca,
                            const Eigen::VectorXd& scores, int k_components);

/// Density-level view of the decomposition: the back-transformed mean and,
/// per component, the back-transformed eigenfunction together with the
/// densities clr_inverse(mean +/- sd_k * eigenfunction_k).
struct BayesPcaView {
    struct Component {
        Density direction;
        Density plus;
        Density minus;
    };
    Density mean;
    std::vector<Component> components;
};

BayesPcaView bayes_pca_view(const PCARepresentation& pca);

}  // namespace latdens
