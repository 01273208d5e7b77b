#include "latdens/mcem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

#include "latdens/rng.hpp"

namespace latdens {

namespace {

constexpr double kEigenClipTol = 1e-10;

void fix_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

// Log-sum-exp normalization of log weights, in place; returns the ESS.
double normalize_log_weights(Eigen::VectorXd& log_weights) {
    double shift = log_weights.maxCoeff();
    Eigen::ArrayXd w = (log_weights.array() - shift).exp();
    double total = w.sum();
    log_weights = (w / total).matrix();
    return 1.0 / log_weights.squaredNorm();
}

}  // namespace

void McemConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("McemConfig: epsilon must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("McemConfig: lambda must be positive");
    if (mc_growth < 1) throw std::invalid_argument("McemConfig: mc_growth must be at least 1");
    if (!(var_explained > 0.0 && var_explained <= 1.0))
        throw std::invalid_argument("McemConfig: var_explained must be in (0, 1]");
    if (max_iterations < 1)
        throw std::invalid_argument("McemConfig: max_iterations must be at least 1");
    if (!(mode_tol > 0.0)) throw std::invalid_argument("McemConfig: mode_tol must be positive");
    if (mode_max_steps < 1)
        throw std::invalid_argument("McemConfig: mode_max_steps must be at least 1");
}

TruncatedEigen truncate(const Eigen::MatrixXd& sigma, double var_explained) {
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("truncate: sigma must be square");
    if (!(var_explained > 0.0 && var_explained <= 1.0))
        throw std::invalid_argument("truncate: var_explained must be in (0, 1]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (sigma + sigma.transpose()));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("truncate: eigensolver failed");

    Eigen::VectorXd values = solver.eigenvalues().reverse();
    Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
    fix_signs(vectors);

    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (values[k] < -kEigenClipTol * scale)
            throw std::runtime_error("truncate: eigenvalue " +
                                     std::to_string(values[k]) +
                                     " below PSD tolerance");
        // Rounding-level eigenvalues count as zero rank.
        if (values[k] < 1e-12 * scale) values[k] = 0.0;
    }

    TruncatedEigen out;
    const double total = values.sum();
    if (total <= 0.0) {
        // Numerically zero covariance: keep one direction, flag it.
        out.n_prime = 1;
        out.vectors = vectors.leftCols(1);
        out.values = values.head(1);
        out.degenerate = true;
        return out;
    }

    int n_prime = 0;
    double cum = 0.0;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        cum += values[k];
        ++n_prime;
        if (cum >= var_explained * total) break;
    }
    // Never keep zero-variance directions: they carry no draws.
    while (n_prime > 1 && values[n_prime - 1] <= 0.0) --n_prime;

    out.n_prime = n_prime;
    out.vectors = vectors.leftCols(n_prime);
    out.values = values.head(n_prime);
    return out;
}

GroupDraws importance_sample(const ScorePosterior& posterior,
                             const Eigen::VectorXd& mode, double lambda,
                             int r, std::uint64_t seed,
                             std::uint64_t iteration, std::uint64_t group) {
    if (r < 1) throw std::invalid_argument("importance_sample: need r >= 1 draws");
    if (!(lambda > 0.0))
        throw std::invalid_argument("importance_sample: lambda must be positive");
    const int dim = posterior.dim();
    if (mode.size() != dim)
        throw std::invalid_argument("importance_sample: mode has wrong dimension");

    const Eigen::VectorXd& variances = posterior.state().variances;
    Eigen::ArrayXd proposal_sd = (lambda * variances.array()).sqrt();

    GroupDraws out;
    out.mode = mode;
    out.scores.resize(dim, r);
    Eigen::VectorXd log_weights(r);

    for (int t = 0; t < r; ++t) {
        rng::Stream stream(rng::derive_key(seed, iteration, group,
                                           static_cast<std::uint64_t>(t)));
        Eigen::VectorXd z(dim);
        double log_proposal = 0.0;  // up to the constant, which cancels
        for (int l = 0; l < dim; ++l) {
            double u = stream.normal();
            z[l] = mode[l] + proposal_sd[l] * u;
            log_proposal -= 0.5 * u * u;
        }
        out.scores.col(t) = z;
        log_weights[t] = posterior.log_density(z) - log_proposal;
    }

    out.ess = normalize_log_weights(log_weights);
    out.weights = std::move(log_weights);
    return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> m_step(const EStepDraws& draws,
                                                   bool sum_zero_project) {
    const int n = static_cast<int>(draws.groups.size());
    if (n < 1) throw std::invalid_argument("m_step: no groups");
    const int dim = static_cast<int>(draws.components.cols());

    // Weighted first and second moments of the scores, averaged over
    // groups (each group's weights sum to one).
    Eigen::VectorXd z_mean = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd z_second = Eigen::MatrixXd::Zero(dim, dim);
    for (const GroupDraws& g : draws.groups) {
        if (g.scores.rows() != dim)
            throw std::invalid_argument("m_step: inconsistent draw dimensions");
        z_mean += g.scores * g.weights;
        z_second += g.scores * g.weights.asDiagonal() * g.scores.transpose();
    }
    z_mean /= n;
    z_second /= n;

    // Lift to coefficient space: theta = nu + V z.
    Eigen::VectorXd lifted = draws.components * z_mean;
    Eigen::VectorXd nu_new = draws.nu + lifted;
    Eigen::MatrixXd theta_second =
        draws.nu * draws.nu.transpose() + lifted * draws.nu.transpose() +
        draws.nu * lifted.transpose() +
        draws.components * z_second * draws.components.transpose();
    Eigen::MatrixXd sigma_new = theta_second - nu_new * nu_new.transpose();

    sigma_new = 0.5 * (sigma_new + sigma_new.transpose());
    if (sum_zero_project) {
        nu_new = project_sum_zero(nu_new);
        sigma_new = project_sum_zero(sigma_new);
        sigma_new = 0.5 * (sigma_new + sigma_new.transpose());
    }
    return {std::move(nu_new), std::move(sigma_new)};
}

namespace {

struct PredictOutput {
    Eigen::VectorXd scores;
    bool converged = true;
};

PredictOutput predict_in_state(const PosteriorState& state,
                               const Eigen::VectorXd& counts,
                               const McemConfig& cfg) {
    if (counts.sum() <= 0.0)
        return {Eigen::VectorXd::Zero(state.n_components()), true};
    ScorePosterior posterior(state, counts);
    ModeResult mode = find_mode(posterior, cfg.mode_tol, cfg.mode_max_steps);
    return {mode.mode, mode.converged};
}

}  // namespace

FitResult fit_counts(const std::vector<Eigen::VectorXd>& counts,
                     const Basis& basis, const InitialValues& init,
                     const McemConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(counts.size());
    if (n < 1) throw std::invalid_argument("fit: no groups");

    // The model constructor symmetrizes and applies the coefficient
    // constraints of the basis.
    LatentDensityModel start(basis, init.nu, init.sigma);
    Eigen::VectorXd nu = start.nu();
    Eigen::MatrixXd sigma = start.sigma();

    McemTrace trace;
    bool converged = false;
    int iterations = 0;
    double nu_change = 0.0;
    double sigma_change = 0.0;

    for (int h = 1; h <= cfg.max_iterations; ++h) {
        iterations = h;
        TruncatedEigen retained = truncate(sigma, cfg.var_explained);

        Eigen::VectorXd nu_new;
        Eigen::MatrixXd sigma_new;
        double mean_ess = 0.0;
        long total_draws = 0;

        if (retained.degenerate) {
            // Zero covariance: the coefficient posterior is a point mass
            // at nu, so the parameters cannot move.
            nu_new = nu;
            sigma_new = Eigen::MatrixXd::Zero(sigma.rows(), sigma.cols());
        } else {
            PosteriorState state =
                PosteriorState::make(nu, retained.vectors, retained.values, basis);
            const int r = cfg.mc_growth * h;
            total_draws = static_cast<long>(r) * n;

            EStepDraws draws;
            draws.nu = nu;
            draws.components = retained.vectors;
            draws.groups.resize(n);

            // Groups are independent given the state; each one only reads
            // shared data and writes its own slot, and its random stream
            // is keyed by (seed, h, i, t), so scheduling cannot change
            // the result.
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < n; ++i) {
                ScorePosterior posterior(state, counts[i]);
                ModeResult mode =
                    find_mode(posterior, cfg.mode_tol, cfg.mode_max_steps);
                draws.groups[i] = importance_sample(
                    posterior, mode.mode, cfg.lambda, r, cfg.seed,
                    static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(i));
                draws.groups[i].mode_converged = mode.converged;
            }

            for (const GroupDraws& g : draws.groups) mean_ess += g.ess;
            mean_ess /= n;

            std::tie(nu_new, sigma_new) =
                m_step(draws, basis.sum_zero_coefficients());
        }

        nu_change = (nu_new - nu).norm();
        sigma_change = (sigma_new - sigma).norm();
        trace.push_back(McemTraceRow{h, nu_change, sigma_change,
                                     retained.n_prime, total_draws, mean_ess});
        nu = std::move(nu_new);
        sigma = std::move(sigma_new);

        if (nu_change < cfg.epsilon && sigma_change < cfg.epsilon) {
            converged = true;
            break;
        }
    }

    LatentDensityModel model(basis, nu, sigma);
    PCARepresentation pca = eigen_decompose(model);

    // Score prediction: fresh posterior-mode search per group under the
    // final estimates, over the components retained at var_explained.
    TruncatedEigen final_retained = truncate(model.sigma(), cfg.var_explained);
    pca.scores = Eigen::MatrixXd::Zero(
        n, final_retained.degenerate ? 0 : final_retained.n_prime);
    if (!final_retained.degenerate) {
        PosteriorState state = PosteriorState::make(
            model.nu(), final_retained.vectors, final_retained.values, basis);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            PredictOutput out = predict_in_state(state, counts[i], cfg);
            pca.scores.row(i) = out.scores.transpose();
        }
    }

    return FitResult{std::move(model), std::move(pca), std::move(trace),
                     converged,        iterations,     nu_change,
                     sigma_change};
}

FitResult fit(const SampleSet& data, const Basis& basis,
              const InitialValues& init, const McemConfig& cfg) {
    detail::require_same_grid(data.grid(), basis.grid(), "fit");
    std::vector<Eigen::VectorXd> counts;
    counts.reserve(data.n_groups());
    for (int i = 0; i < data.n_groups(); ++i) counts.push_back(data.cell_counts(i));
    return fit_counts(counts, basis, init, cfg);
}

ScorePrediction predict_scores(const LatentDensityModel& model,
                               const Eigen::VectorXd& observations,
                               const McemConfig& cfg) {
    TruncatedEigen retained = truncate(model.sigma(), cfg.var_explained);
    Eigen::VectorXd counts = observations.size() > 0
        ? cell_counts(observations, model.basis().grid())
        : Eigen::VectorXd::Zero(model.basis().grid().n_cells());

    PosteriorState state = PosteriorState::make(model.nu(), retained.vectors,
                                                retained.values, model.basis());
    if (retained.degenerate || counts.sum() <= 0.0) {
        Eigen::VectorXd zeros = Eigen::VectorXd::Zero(retained.n_prime);
        return ScorePrediction{zeros, clr_inverse(GridFunction(
                                          model.basis().grid(), state.mean_grid)),
                               true};
    }

    PredictOutput out = predict_in_state(state, counts, cfg);
    GridFunction g(model.basis().grid(),
                   state.mean_grid + state.component_grid * out.scores);
    return ScorePrediction{out.scores, clr_inverse(g), out.converged};
}

}  // namespace latdens
