#include "latdens/posterior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace latdens {

PosteriorState PosteriorState::make(const Eigen::VectorXd& nu,
                                    const Eigen::MatrixXd& eigenvectors,
                                    const Eigen::VectorXd& variances,
                                    const Basis& basis) {
    if (nu.size() != basis.size() || eigenvectors.rows() != basis.size())
        throw std::invalid_argument("PosteriorState: dimension mismatch with basis");
    if (eigenvectors.cols() != variances.size())
        throw std::invalid_argument("PosteriorState: one variance per eigenvector required");
    PosteriorState state;
    state.nu = nu;
    state.eigenvectors = eigenvectors;
    state.variances = variances;
    state.mean_grid = basis.functions() * nu;
    state.component_grid = basis.functions() * eigenvectors;
    state.cell_width = basis.grid().cell_width();
    return state;
}

ScorePosterior::ScorePosterior(const PosteriorState& state,
                               Eigen::VectorXd cell_counts)
    : state_(&state), counts_(std::move(cell_counts)) {
    if (counts_.size() != state.mean_grid.size())
        throw std::invalid_argument("ScorePosterior: counts must have one entry per cell");
    if ((counts_.array() < 0.0).any())
        throw std::invalid_argument("ScorePosterior: counts must be nonnegative");
    m_ = counts_.sum();
    mean_dot_counts_ = state.mean_grid.dot(counts_);
    component_dot_counts_ = state.component_grid.transpose() * counts_;
}

bool ScorePosterior::proper_prior() const {
    return state_->variances.allFinite();
}

Eigen::VectorXd ScorePosterior::grid_function(const Eigen::VectorXd& z) const {
    if (z.size() != dim())
        throw std::invalid_argument("ScorePosterior: score vector has length " +
                                    std::to_string(z.size()) + ", expected " +
                                    std::to_string(dim()));
    return state_->mean_grid + state_->component_grid * z;
}

double ScorePosterior::log_likelihood_part(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = grid_function(z);
    double shift = g.maxCoeff();
    double log_normalizer =
        shift + std::log(state_->cell_width * (g.array() - shift).exp().sum());
    return mean_dot_counts_ + component_dot_counts_.dot(z) - m_ * log_normalizer;
}

double ScorePosterior::log_density(const Eigen::VectorXd& z) const {
    double log_prior = 0.0;
    for (int l = 0; l < dim(); ++l) {
        if (std::isinf(state_->variances[l])) continue;  // flat direction
        log_prior -= 0.5 * z[l] * z[l] / state_->variances[l];
    }
    return log_likelihood_part(z) + log_prior;
}

Eigen::VectorXd ScorePosterior::gradient(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = grid_function(z);
    Eigen::ArrayXd w = (g.array() - g.maxCoeff()).exp();
    // Current predicted density f_z on the cells.
    Eigen::VectorXd f_z = w.matrix() / (state_->cell_width * w.sum());

    Eigen::VectorXd grad =
        component_dot_counts_ -
        m_ * state_->cell_width * (state_->component_grid.transpose() * f_z);
    for (int l = 0; l < dim(); ++l) {
        if (std::isinf(state_->variances[l])) continue;
        if (!(state_->variances[l] > 0.0))
            throw std::domain_error("ScorePosterior::gradient: retained variance " +
                                    std::to_string(l) + " is zero");
        grad[l] -= z[l] / state_->variances[l];
    }
    return grad;
}

Eigen::VectorXd ScorePosterior::neg_hessian_diagonal(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = grid_function(z);
    Eigen::ArrayXd w = (g.array() - g.maxCoeff()).exp();
    Eigen::VectorXd f_z = w.matrix() / (state_->cell_width * w.sum());

    Eigen::VectorXd diagonal(dim());
    for (int l = 0; l < dim(); ++l) {
        Eigen::ArrayXd phi = state_->component_grid.col(l).array();
        double mean = state_->cell_width * (phi * f_z.array()).sum();
        double second = state_->cell_width * (phi.square() * f_z.array()).sum();
        diagonal[l] = m_ * (second - mean * mean);
        if (!std::isinf(state_->variances[l]))
            diagonal[l] += 1.0 / state_->variances[l];
    }
    return diagonal;
}

ModeResult find_mode(const ScorePosterior& posterior, double tol, int max_steps) {
    if (!posterior.proper_prior())
        throw std::domain_error(
            "find_mode: improper prior (infinite variance); the posterior "
            "mode need not exist");
    for (int l = 0; l < posterior.dim(); ++l) {
        if (!(posterior.state().variances[l] > 0.0))
            throw std::domain_error("find_mode: retained variance " +
                                    std::to_string(l) + " must be positive");
    }

    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-16;

    ModeResult result;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(posterior.dim());
    double value = posterior.log_density(z);
    if (!std::isfinite(value))
        throw std::runtime_error("find_mode: non-finite objective at step 0");

    for (int it = 0; it < max_steps; ++it) {
        Eigen::VectorXd grad = posterior.gradient(z);
        double grad_norm = grad.norm();
        if (!std::isfinite(grad_norm))
            throw std::runtime_error("find_mode: non-finite gradient at step " +
                                     std::to_string(it));
        result.steps = it;
        result.gradient_norm = grad_norm;
        if (grad_norm < tol) {
            result.converged = true;
            break;
        }

        // Ascent along the diagonally preconditioned gradient; the scales
        // span orders of magnitude when retained variances do, and the
        // preconditioner keeps the effective condition number small.
        Eigen::VectorXd direction =
            grad.cwiseQuotient(posterior.neg_hessian_diagonal(z));
        double slope = grad.dot(direction);
        if (!(slope > 0.0)) break;

        // Backtracking until the Armijo condition holds.
        double s = 1.0;
        double candidate_value = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd candidate;
        while (s >= kMinStep) {
            candidate = z + s * direction;
            candidate_value = posterior.log_density(candidate);
            if (std::isfinite(candidate_value) &&
                candidate_value >= value + kArmijo * s * slope)
                break;
            s *= 0.5;
        }
        if (s < kMinStep) break;  // no ascent possible at this scale

        z = candidate;
        value = candidate_value;
    }

    result.mode = z;
    return result;
}

}  // namespace latdens
