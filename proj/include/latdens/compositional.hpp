#pragma once

#include <vector>

#include "latdens/mcem.hpp"

namespace latdens {

/// A point of the open simplex: strictly positive probabilities summing
/// to one (within 1e-12).
class Composition {
public:
    explicit Composition(Eigen::VectorXd probs);

    const Eigen::VectorXd& probs() const { return probs_; }
    int n_categories() const { return static_cast<int>(probs_.size()); }

private:
    Eigen::VectorXd probs_;
};

// Discrete clr: log(pi_k) - mean(log pi); the result sums to zero.
Eigen::VectorXd clr_discrete(const Composition& pi);

// Inverse: renormalized exp(rho), max-shifted against overflow.
Composition clr_discrete_inverse(const Eigen::VectorXd& rho);

// Orthonormal basis of the sum-zero hyperplane of R^D:
//   e_k = sqrt(k/(k+1)) (1/k, ..., 1/k, -1, 0, ..., 0), k leading 1/k.
// Returned as a D x (D-1) matrix, one basis vector per column. D >= 2.
Eigen::MatrixXd egozcue_basis(int n_categories);

/// Grouped category counts: n groups of D nonnegative counts, each group
/// with total count >= 1. Zero counts in individual categories are fine.
class CountData {
public:
    CountData(std::vector<Eigen::VectorXi> groups, int n_categories);

    int n_groups() const { return static_cast<int>(groups_.size()); }
    int n_categories() const { return n_categories_; }
    const Eigen::VectorXi& group(int i) const { return groups_.at(i); }

private:
    std::vector<Eigen::VectorXi> groups_;
    int n_categories_;
};

struct CompositionalFit {
    LatentDensityModel model;
    PCARepresentation pca;
    McemTrace trace;
    bool converged = false;
    int iterations = 0;
    Composition mean;                          // clr_inverse of the mean
    std::vector<Composition> directions;       // clr_inverse per component
    std::vector<Composition> predicted;        // per group
};

// MCEM on count compositions: the D categories become a D-cell unit-width
// grid carrying the Egozcue basis, integrals become sums, and the engine
// runs with nu0 = 0 and sigma0 = I. No imputation: categories without
// observations simply contribute nothing to the linear term.
CompositionalFit fit_compositional(const CountData& data, const McemConfig& cfg);

// The unit-width grid identifying categories 1..D with cells.
Grid category_grid(int n_categories);

}  // namespace latdens
