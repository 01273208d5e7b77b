#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "latdens/init.hpp"
#include "latdens/model.hpp"
#include "latdens/posterior.hpp"
#include "latdens/sample_set.hpp"

namespace latdens {

struct McemConfig {
    // Convergence threshold on both the Euclidean change of nu and the
    // Frobenius change of sigma between iterations.
    double epsilon = 1e-3;
    // Proposal variance scale for importance sampling.
    double lambda = 1.0;
    // Draws per group in iteration h: r = mc_growth * h.
    int mc_growth = 10;
    // Components retained per iteration: smallest count explaining at
    // least this fraction of the variance.
    double var_explained = 0.99999;
    int max_iterations = 200;
    // Mode search: gradient-norm tolerance and step cap.
    double mode_tol = 1e-6;
    int mode_max_steps = 500;
    std::uint64_t seed = 1u;

    void validate() const;  // throws std::invalid_argument
};

/// Leading eigenpairs of a coefficient covariance matrix.
struct TruncatedEigen {
    Eigen::MatrixXd vectors;  // N x n_prime, columns sorted by eigenvalue
    Eigen::VectorXd values;   // n_prime, nonincreasing, nonnegative
    int n_prime = 0;
    // Set when the matrix was (numerically) zero: a single component with
    // zero variance is returned and estimation is degenerate.
    bool degenerate = false;
};

// Smallest leading set of eigenpairs of sigma whose eigenvalues explain at
// least var_explained of the total variance; always at least one.
// Eigenvalues in [-1e-10 * scale, 0) are clipped to zero; a more negative
// eigenvalue throws.
TruncatedEigen truncate(const Eigen::MatrixXd& sigma, double var_explained);

/// Importance-sampling draws for one group: score draws (columns), their
/// normalized weights, the posterior mode they are centered at, and the
/// effective sample size 1 / sum(w^2).
struct GroupDraws {
    Eigen::MatrixXd scores;   // K x r
    Eigen::VectorXd weights;  // r, nonnegative, sums to 1
    Eigen::VectorXd mode;     // K
    double ess = 0.0;
    bool mode_converged = true;
};

/**
 * One E-step's draws for all groups. Coefficient-space draws are
 * theta_i^(t) = nu + components * scores_i.col(t); the lift is stored once
 * since it is shared by every group of the iteration.
 */
struct EStepDraws {
    Eigen::VectorXd nu;         // N
    Eigen::MatrixXd components; // N x K retained eigenvectors
    std::vector<GroupDraws> groups;

    Eigen::VectorXd theta(int group, int draw) const {
        return nu + components * groups.at(group).scores.col(draw);
    }
};

// Draws r samples z_t ~ N(mode, lambda * diag(variances)) for one group,
// weights them by target density over proposal density in the log domain,
// and normalizes with log-sum-exp. Streams are keyed by
// (seed, iteration, group, draw) so results never depend on scheduling.
GroupDraws importance_sample(const ScorePosterior& posterior,
                             const Eigen::VectorXd& mode, double lambda,
                             int r, std::uint64_t seed,
                             std::uint64_t iteration, std::uint64_t group);

// Weighted mean and covariance of the coefficient draws with per-group
// normalized weights averaged over groups (equivalently the double-sum
// formulas, whose global denominator is the number of groups when each
// group's weights sum to one). The result is symmetrized; when
// sum_zero_project is set it is also projected onto zero coefficient sums.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> m_step(const EStepDraws& draws,
                                                   bool sum_zero_project);

struct McemTraceRow {
    int iteration = 0;
    double nu_change = 0.0;
    double sigma_change = 0.0;  // Frobenius
    int n_prime = 0;
    long draws = 0;
    double mean_ess = 0.0;
};
using McemTrace = std::vector<McemTraceRow>;

struct FitResult {
    LatentDensityModel model;
    PCARepresentation pca;  // scores: n x K for the retained components
    McemTrace trace;
    bool converged = false;
    int iterations = 0;
    double final_nu_change = 0.0;
    double final_sigma_change = 0.0;
};

/**
 * Monte Carlo EM: iterates truncation of the current covariance, per-group
 * posterior mode search and importance sampling (r = mc_growth * h draws),
 * and the weighted-moment M-step, until both parameter changes fall below
 * epsilon or max_iterations is reached (in which case the result carries
 * converged = false). Afterwards the fitted model is eigendecomposed and
 * scores are predicted for every group by a fresh mode search under the
 * final estimates. Deterministic for a fixed seed, independent of thread
 * count.
 */
FitResult fit(const SampleSet& data, const Basis& basis,
              const InitialValues& init, const McemConfig& cfg);

// Same engine on precomputed per-group cell counts (the continuous fit
// reduces its observations to counts; count compositions supply them
// directly).
FitResult fit_counts(const std::vector<Eigen::VectorXd>& counts,
                     const Basis& basis, const InitialValues& init,
                     const McemConfig& cfg);

struct ScorePrediction {
    Eigen::VectorXd scores;
    Density density;
    bool mode_converged = true;
};

// Scores for one group under a fitted model: the posterior mode given the
// final estimates, over the components retained at cfg.var_explained, and
// the corresponding predicted density. Groups without observations get
// zero scores and the back-transformed mean.
ScorePrediction predict_scores(const LatentDensityModel& model,
                               const Eigen::VectorXd& observations,
                               const McemConfig& cfg);

}  // namespace latdens
