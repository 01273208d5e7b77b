#pragma once

#include <vector>

#include "latdens/basis.hpp"

namespace latdens {

/**
 * Shared per-iteration state of the E-step in retained coordinates: the
 * coefficient mean, the retained eigenvectors of the coefficient
 * covariance with their (positive) variances, and their evaluations on the
 * grid. Immutable; shared by all groups of one iteration.
 */
struct PosteriorState {
    Eigen::VectorXd nu;            // coefficient mean, length N
    Eigen::MatrixXd eigenvectors;  // N x K, columns = retained eigenvectors
    Eigen::VectorXd variances;     // length K, retained eigenvalues
    Eigen::VectorXd mean_grid;     // mean function on cells
    Eigen::MatrixXd component_grid;  // n_cells x K eigenfunction values
    double cell_width = 1.0;

    static PosteriorState make(const Eigen::VectorXd& nu,
                               const Eigen::MatrixXd& eigenvectors,
                               const Eigen::VectorXd& variances,
                               const Basis& basis);

    int n_components() const { return static_cast<int>(variances.size()); }
};

/**
 * Unnormalized log posterior of the scores z of one group given its
 * observations and the current state:
 *
 *   sum_j g_z(x_ij) - m_i log int exp(g_z) - sum_l z_l^2 / (2 var_l)
 *
 * with g_z = mean + sum_l z_l eigenfunction_l, up to an additive constant.
 * Observations enter only through their cell counts. Infinite variances
 * are accepted for evaluation (the prior term vanishes) but such an
 * improper prior need not have a mode, so mode finding refuses to run.
 */
class ScorePosterior {
public:
    ScorePosterior(const PosteriorState& state, Eigen::VectorXd cell_counts);

    int dim() const { return state_->n_components(); }
    double n_observations() const { return m_; }
    const PosteriorState& state() const { return *state_; }

    // All prior variances finite (Lemma-2 style condition for a proper
    // posterior with an attained mode).
    bool proper_prior() const;

    double log_density(const Eigen::VectorXd& z) const;

    // Data terms only (no Gaussian prior); exp of this is the flat-prior
    // posterior shape.
    double log_likelihood_part(const Eigen::VectorXd& z) const;

    Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;

    // Diagonal of the negative Hessian, m * Var_{f_z}(phi_l) + 1 / var_l
    // (exact); used to precondition the mode search, whose raw
    // conditioning is poor when retained variances differ by orders of
    // magnitude.
    Eigen::VectorXd neg_hessian_diagonal(const Eigen::VectorXd& z) const;

private:
    Eigen::VectorXd grid_function(const Eigen::VectorXd& z) const;

    const PosteriorState* state_;
    Eigen::VectorXd counts_;
    double m_;
    double mean_dot_counts_;
    Eigen::VectorXd component_dot_counts_;
};

struct ModeResult {
    Eigen::VectorXd mode;
    bool converged = false;
    int steps = 0;
    double gradient_norm = 0.0;
};

// Posterior mode by gradient ascent with backtracking (Armijo) line search
// from z = 0. Terminates when the gradient norm drops below tol or after
// max_steps, returning the best iterate (with converged = false in the
// latter case). Requires a proper prior; throws std::domain_error for
// infinite variances and std::runtime_error (naming the step) if the
// objective turns non-finite.
ModeResult find_mode(const ScorePosterior& posterior, double tol = 1e-6,
                     int max_steps = 500);

}  // namespace latdens
