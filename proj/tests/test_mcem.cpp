#include <doctest.h>

#include <cmath>
#include <limits>

#include "latdens/mcem.hpp"
#include "latdens/rng.hpp"
#include "latdens/simulation.hpp"
#include "test_helpers.hpp"

using namespace latdens;
using test_helpers::unit_grid;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The one-basis-function setup of the improper-prior counterexample:
// e_1 = +1 on [0, 0.5], -1 on (0.5, 1], one observation at x = 0.2.
struct CounterexampleSetup {
    Grid grid{0.0, 1.0, 200};
    Basis basis;
    PosteriorState state;
    Eigen::VectorXd counts;

    explicit CounterexampleSetup(double variance) : basis(make_square_basis(grid)) {
        state = PosteriorState::make(
            Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1),
            Eigen::VectorXd::Constant(1, variance), basis);
        counts = Eigen::VectorXd::Zero(grid.n_cells());
        counts[grid.cell_index(0.2)] = 1.0;
    }

    static Basis make_square_basis(const Grid& grid) {
        Eigen::MatrixXd funcs(grid.n_cells(), 1);
        for (int k = 0; k < grid.n_cells(); ++k)
            funcs(k, 0) = grid.midpoint(k) <= 0.5 ? 1.0 : -1.0;
        return Basis::explicit_orthonormal(grid, funcs);
    }
};

Eigen::MatrixXd random_psd(int n, latdens::rng::Stream& rng, double scale = 1.0) {
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = rng.normal();
    return scale * (a * a.transpose()) / n;
}

// A generic random proper posterior on a small indicator-basis model.
struct RandomPosteriorSetup {
    Grid grid;
    Basis basis;
    TruncatedEigen retained;
    PosteriorState state;
    Eigen::VectorXd counts;

    RandomPosteriorSetup(latdens::rng::Stream& rng, int cells = 40,
                         int n_obs = 25, double var_explained = 0.999)
        : grid(0.0, 1.0, cells), basis(make_basis(grid)) {
        Eigen::VectorXd nu(cells);
        for (int k = 0; k < cells; ++k) nu[k] = 0.3 * rng.normal();
        nu = project_sum_zero(nu);
        Eigen::MatrixXd sigma = project_sum_zero(random_psd(cells, rng, 0.5));
        retained = truncate(sigma, var_explained);
        state = PosteriorState::make(nu, retained.vectors, retained.values, basis);
        counts = Eigen::VectorXd::Zero(cells);
        for (int j = 0; j < n_obs; ++j)
            counts[grid.cell_index(rng.uniform())] += 1.0;
    }
};

}  // namespace

TEST_CASE("posterior matches the closed form of the counterexample setup") {
    CounterexampleSetup setup(kInf);

    SUBCASE("flat-prior likelihood equals 2 / (1 + exp(-2z))") {
        for (double z : {-2.0, 0.0, 3.0}) {
            Eigen::VectorXd zv = Eigen::VectorXd::Constant(1, z);
            ScorePosterior posterior(setup.state, setup.counts);
            double value = std::exp(posterior.log_likelihood_part(zv));
            CHECK(std::abs(value - 2.0 / (1.0 + std::exp(-2.0 * z))) < 1e-10);
            // With an improper prior the density IS the likelihood part.
            CHECK(posterior.log_density(zv) == posterior.log_likelihood_part(zv));
        }
    }

    SUBCASE("flat-prior gradient equals 2 / (1 + exp(2z))") {
        ScorePosterior posterior(setup.state, setup.counts);
        for (double z : {-1.5, 0.0, 0.7, 2.5}) {
            Eigen::VectorXd zv = Eigen::VectorXd::Constant(1, z);
            double expected = 2.0 / (1.0 + std::exp(2.0 * z));
            CHECK(std::abs(posterior.gradient(zv)[0] - expected) < 1e-8);
        }
    }

    SUBCASE("the improper prior refuses mode finding") {
        ScorePosterior posterior(setup.state, setup.counts);
        CHECK_FALSE(posterior.proper_prior());
        CHECK_THROWS_AS(find_mode(posterior), std::domain_error);
    }
}

TEST_CASE("posterior with no observations reduces to the prior") {
    latdens::rng::Stream rng(43);
    RandomPosteriorSetup setup(rng);
    ScorePosterior posterior(setup.state,
                             Eigen::VectorXd::Zero(setup.grid.n_cells()));
    Eigen::VectorXd z(setup.state.n_components());
    for (int l = 0; l < z.size(); ++l) z[l] = rng.normal();
    double expected = 0.0;
    for (int l = 0; l < z.size(); ++l)
        expected -= 0.5 * z[l] * z[l] / setup.state.variances[l];
    // The likelihood part is constant (zero) without observations.
    CHECK(std::abs(posterior.log_density(z) - expected) < 1e-12);
    CHECK(std::abs(posterior.log_likelihood_part(z)) < 1e-12);
}

TEST_CASE("posterior matches an independent evaluation of the density form") {
    latdens::rng::Stream rng(47);
    RandomPosteriorSetup setup(rng);
    ScorePosterior posterior(setup.state, setup.counts);
    const int dim = setup.state.n_components();

    // Direct form: sum_j log f_z(x_ij) + sum_l log N(z_l | 0, var_l), with
    // f_z the normalized density; equal to the library value up to one
    // z-independent constant, so differences must match.
    auto direct = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd g = setup.state.mean_grid + setup.state.component_grid * z;
        double mass = 0.0;
        for (int k = 0; k < setup.grid.n_cells(); ++k)
            mass += std::exp(g[k]) * setup.grid.cell_width();
        double value = 0.0;
        for (int k = 0; k < setup.grid.n_cells(); ++k)
            if (setup.counts[k] > 0.0)
                value += setup.counts[k] * std::log(std::exp(g[k]) / mass);
        for (int l = 0; l < dim; ++l)
            value += -0.5 * std::log(2.0 * M_PI * setup.state.variances[l]) -
                     0.5 * z[l] * z[l] / setup.state.variances[l];
        return value;
    };

    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(dim);
    double offset = posterior.log_density(z0) - direct(z0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd z(dim);
        for (int l = 0; l < dim; ++l) z[l] = 2.0 * rng.normal();
        CHECK(std::abs(posterior.log_density(z) - direct(z) - offset) < 1e-9);
    }
}

TEST_CASE("gradient vanishes at zero for a mirror-symmetric setup") {
    Grid grid(0.0, 1.0, 40);
    Basis basis = make_basis(grid);
    // One antisymmetric component: v[k] = -v[n-1-k].
    Eigen::VectorXd v(40);
    for (int k = 0; k < 40; ++k) v[k] = grid.midpoint(k) - 0.5;
    v /= v.norm();
    PosteriorState state = PosteriorState::make(
        Eigen::VectorXd::Zero(40), v, Eigen::VectorXd::Constant(1, 1.0), basis);
    // Counts in cells that mirror each other about the interval center.
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(40);
    counts[8] += 1.0;
    counts[31] += 1.0;
    ScorePosterior posterior(state, counts);
    CHECK(std::abs(posterior.gradient(Eigen::VectorXd::Zero(1))[0]) < 1e-12);
}

TEST_CASE("gradient agrees with central finite differences") {
    latdens::rng::Stream rng(53);
    const double step = 1e-5;
    for (int setup_rep = 0; setup_rep < 4; ++setup_rep) {
        RandomPosteriorSetup setup(rng);
        ScorePosterior posterior(setup.state, setup.counts);
        const int dim = setup.state.n_components();
        for (int z_rep = 0; z_rep < 5; ++z_rep) {
            Eigen::VectorXd z(dim);
            for (int l = 0; l < dim; ++l) z[l] = rng.normal();
            Eigen::VectorXd grad = posterior.gradient(z);
            Eigen::VectorXd fd(dim);
            for (int l = 0; l < dim; ++l) {
                Eigen::VectorXd hi = z, lo = z;
                hi[l] += step;
                lo[l] -= step;
                fd[l] = (posterior.log_density(hi) - posterior.log_density(lo)) /
                        (2.0 * step);
            }
            double rel = (grad - fd).norm() / std::max(grad.norm(), 1e-12);
            CHECK(rel < 1e-5);
        }
    }
}

TEST_CASE("quadratic decay of the log posterior (proper prior)") {
    latdens::rng::Stream rng(59);
    RandomPosteriorSetup setup(rng);
    ScorePosterior posterior(setup.state, setup.counts);
    const int dim = setup.state.n_components();
    Eigen::VectorXd direction(dim);
    for (int l = 0; l < dim; ++l) direction[l] = rng.normal();
    direction /= direction.norm();

    double at_zero = posterior.log_density(Eigen::VectorXd::Zero(dim));
    double previous = 0.0;
    bool first = true;
    for (double radius : {10.0, 100.0, 1000.0}) {
        double drop = posterior.log_density(radius * direction) - at_zero;
        if (!first) CHECK(drop < previous);
        CHECK(drop < 0.0);
        previous = drop;
        first = false;
    }
}

TEST_CASE("find_mode") {
    SUBCASE("no observations gives the prior mode zero") {
        latdens::rng::Stream rng(61);
        RandomPosteriorSetup setup(rng);
        ScorePosterior posterior(setup.state,
                                 Eigen::VectorXd::Zero(setup.grid.n_cells()));
        ModeResult mode = find_mode(posterior);
        CHECK(mode.converged);
        CHECK(mode.mode.cwiseAbs().maxCoeff() < 1e-7);
    }

    SUBCASE("matches a grid-search oracle on the closed-form setup") {
        CounterexampleSetup setup(1.0);
        ScorePosterior posterior(setup.state, setup.counts);
        ModeResult mode = find_mode(posterior, 1e-8, 500);
        CHECK(mode.converged);

        double best_z = 0.0;
        double best_value = -kInf;
        for (double z = -10.0; z <= 10.0; z += 1e-4) {
            double value = std::log(2.0 / (1.0 + std::exp(-2.0 * z))) - 0.5 * z * z;
            if (value > best_value) {
                best_value = value;
                best_z = z;
            }
        }
        CHECK(std::abs(mode.mode[0] - best_z) < 1e-3);
    }

    SUBCASE("never below the starting value") {
        latdens::rng::Stream rng(67);
        for (int rep = 0; rep < 5; ++rep) {
            RandomPosteriorSetup setup(rng);
            ScorePosterior posterior(setup.state, setup.counts);
            ModeResult mode = find_mode(posterior);
            CHECK(posterior.log_density(mode.mode) >=
                  posterior.log_density(Eigen::VectorXd::Zero(posterior.dim())));
        }
    }
}

TEST_CASE("importance sampling") {
    SUBCASE("no observations with lambda 1: proposal equals target") {
        latdens::rng::Stream rng(71);
        RandomPosteriorSetup setup(rng);
        ScorePosterior posterior(setup.state,
                                 Eigen::VectorXd::Zero(setup.grid.n_cells()));
        const int r = 64;
        GroupDraws draws = importance_sample(
            posterior, Eigen::VectorXd::Zero(posterior.dim()), 1.0, r, 9, 1, 0);
        CHECK((draws.weights.array() - 1.0 / r).abs().maxCoeff() < 1e-14);
        CHECK(draws.ess == doctest::Approx(r).epsilon(1e-12));
    }

    SUBCASE("weights always normalize to one") {
        latdens::rng::Stream rng(73);
        RandomPosteriorSetup setup(rng);
        ScorePosterior posterior(setup.state, setup.counts);
        ModeResult mode = find_mode(posterior);
        for (int r : {1, 7, 200}) {
            GroupDraws draws =
                importance_sample(posterior, mode.mode, 1.0, r, 9, 2, 0);
            CHECK(std::abs(draws.weights.sum() - 1.0) < 1e-12);
            CHECK(draws.weights.minCoeff() >= 0.0);
        }
    }

    SUBCASE("posterior mean matches a quadrature oracle on one component") {
        // One-component model with asymmetric data.
        CounterexampleSetup setup(1.0);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(setup.grid.n_cells());
        counts[setup.grid.cell_index(0.1)] = 3.0;
        counts[setup.grid.cell_index(0.3)] = 2.0;
        counts[setup.grid.cell_index(0.8)] = 1.0;
        ScorePosterior posterior(setup.state, counts);

        // Quadrature of Eq-8-style density over a z grid.
        double numerator = 0.0, denominator = 0.0, peak = -kInf;
        const double dz = 1e-3;
        for (double z = -8.0; z <= 8.0; z += dz)
            peak = std::max(peak,
                            posterior.log_density(Eigen::VectorXd::Constant(1, z)));
        for (double z = -8.0; z <= 8.0; z += dz) {
            double p = std::exp(
                posterior.log_density(Eigen::VectorXd::Constant(1, z)) - peak);
            numerator += z * p;
            denominator += p;
        }
        double oracle_mean = numerator / denominator;

        ModeResult mode = find_mode(posterior);
        GroupDraws draws =
            importance_sample(posterior, mode.mode, 1.0, 100000, 9, 3, 0);
        double is_mean = (draws.scores.row(0) * draws.weights).value();
        CHECK(std::abs(is_mean - oracle_mean) <
              0.02 * std::max(std::abs(oracle_mean), 1e-3));
    }

    SUBCASE("draws are keyed by (seed, iteration, group, draw), not call order") {
        latdens::rng::Stream rng(79);
        RandomPosteriorSetup setup(rng);
        ScorePosterior posterior(setup.state, setup.counts);
        Eigen::VectorXd mode = Eigen::VectorXd::Zero(posterior.dim());
        GroupDraws a_first = importance_sample(posterior, mode, 1.0, 16, 9, 4, 0);
        GroupDraws b_first = importance_sample(posterior, mode, 1.0, 16, 9, 4, 1);
        GroupDraws b_again = importance_sample(posterior, mode, 1.0, 16, 9, 4, 1);
        GroupDraws a_again = importance_sample(posterior, mode, 1.0, 16, 9, 4, 0);
        CHECK(a_first.scores == a_again.scores);
        CHECK(b_first.scores == b_again.scores);
        CHECK(a_first.scores != b_first.scores);
    }
}

TEST_CASE("m_step") {
    latdens::rng::Stream rng(83);
    const int dim_full = 6;
    const int dim_ret = 3;

    // Random orthonormal lift.
    Eigen::MatrixXd raw(dim_full, dim_ret);
    for (int r = 0; r < dim_full; ++r)
        for (int c = 0; c < dim_ret; ++c) raw(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd lift =
        qr.householderQ() * Eigen::MatrixXd::Identity(dim_full, dim_ret);
    Eigen::VectorXd nu(dim_full);
    for (int k = 0; k < dim_full; ++k) nu[k] = rng.normal();

    auto make_draws = [&](int n_groups, int r, bool unit_weights) {
        EStepDraws draws;
        draws.nu = nu;
        draws.components = lift;
        for (int i = 0; i < n_groups; ++i) {
            GroupDraws g;
            g.scores.resize(dim_ret, r);
            g.weights.resize(r);
            for (int t = 0; t < r; ++t) {
                for (int l = 0; l < dim_ret; ++l) g.scores(l, t) = rng.normal();
                g.weights[t] = unit_weights ? 1.0 : rng.uniform() + 0.05;
            }
            g.weights /= g.weights.sum();
            g.mode = Eigen::VectorXd::Zero(dim_ret);
            draws.groups.push_back(std::move(g));
        }
        return draws;
    };

    // Brute-force double-sum formulas on the explicit coefficient draws.
    auto oracle = [](const EStepDraws& draws) {
        double weight_total = 0.0;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(draws.nu.size());
        for (std::size_t i = 0; i < draws.groups.size(); ++i)
            for (int t = 0; t < draws.groups[i].scores.cols(); ++t) {
                mean += draws.groups[i].weights[t] *
                        draws.theta(static_cast<int>(i), t);
                weight_total += draws.groups[i].weights[t];
            }
        mean /= weight_total;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(draws.nu.size(), draws.nu.size());
        for (std::size_t i = 0; i < draws.groups.size(); ++i)
            for (int t = 0; t < draws.groups[i].scores.cols(); ++t) {
                Eigen::VectorXd centered =
                    draws.theta(static_cast<int>(i), t) - mean;
                cov += draws.groups[i].weights[t] * centered * centered.transpose();
            }
        cov /= weight_total;
        return std::make_pair(mean, cov);
    };

    SUBCASE("single draw per group with unit weights is the plain sample moment") {
        EStepDraws draws = make_draws(7, 1, true);
        auto [nu_new, sigma_new] = m_step(draws, false);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_full);
        for (int i = 0; i < 7; ++i) mean += draws.theta(i, 0);
        mean /= 7.0;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim_full, dim_full);
        for (int i = 0; i < 7; ++i) {
            Eigen::VectorXd c = draws.theta(i, 0) - mean;
            cov += c * c.transpose();
        }
        cov /= 7.0;  // divisor n
        CHECK((nu_new - mean).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((sigma_new - cov).cwiseAbs().maxCoeff() < 1e-13);
    }

    SUBCASE("identical draws collapse the covariance") {
        EStepDraws draws = make_draws(3, 5, false);
        for (auto& g : draws.groups)
            for (int t = 1; t < 5; ++t) g.scores.col(t) = draws.groups[0].scores.col(0);
        for (auto& g : draws.groups) g.scores.col(0) = draws.groups[0].scores.col(0);
        auto [nu_new, sigma_new] = m_step(draws, false);
        CHECK(sigma_new.cwiseAbs().maxCoeff() < 1e-13);
    }

    SUBCASE("random weighted draws match the double-sum oracle") {
        EStepDraws draws = make_draws(5, 20, false);
        auto [nu_new, sigma_new] = m_step(draws, false);
        auto [nu_oracle, sigma_oracle] = oracle(draws);
        CHECK((nu_new - nu_oracle).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sigma_new - sigma_oracle).cwiseAbs().maxCoeff() < 1e-12);

        auto [nu_proj, sigma_proj] = m_step(draws, true);
        CHECK((nu_proj - project_sum_zero(nu_oracle)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sigma_proj - project_sum_zero(sigma_oracle)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("truncate") {
    SUBCASE("worked example (4, 1, 0, 0) at 0.99") {
        Eigen::VectorXd diag(4);
        diag << 4.0, 1.0, 0.0, 0.0;
        TruncatedEigen t = truncate(diag.asDiagonal(), 0.99);
        CHECK(t.n_prime == 2);
        CHECK(t.values[0] == doctest::Approx(4.0));
        CHECK(t.values[1] == doctest::Approx(1.0));
        CHECK_FALSE(t.degenerate);
    }

    SUBCASE("threshold one keeps every positive component") {
        Eigen::VectorXd diag(4);
        diag << 4.0, 1.0, 0.5, 0.0;
        TruncatedEigen t = truncate(diag.asDiagonal(), 1.0);
        CHECK(t.n_prime == 3);
    }

    SUBCASE("zero matrix degenerates to one flagged component") {
        TruncatedEigen t = truncate(Eigen::MatrixXd::Zero(5, 5), 0.99);
        CHECK(t.n_prime == 1);
        CHECK(t.degenerate);
        CHECK(t.values[0] == 0.0);
    }
}

TEST_CASE("fit") {
    SUBCASE("a point-mass process shrinks a diffuse start") {
        // All groups share one density; the fitted between-group variance
        // must collapse far below the unit-variance starting point.
        latdens::rng::Stream rng(89);
        Grid grid(0.0, 1.0, 40);
        Basis basis = make_basis(grid);
        Density truth = test_helpers::random_smooth_density(grid, rng);
        std::vector<Eigen::VectorXd> groups;
        for (int i = 0; i < 8; ++i)
            groups.push_back(sample_from_density(truth, 400, rng));
        SampleSet data(grid, groups);
        InitialValues init = init_identity(basis);

        McemConfig cfg;
        cfg.seed = 424242;
        cfg.max_iterations = 40;
        FitResult result = fit(data, basis, init, cfg);
        CHECK(result.model.sigma().trace() < 0.05 * init.sigma.trace());
    }

    SUBCASE("same seed gives bitwise-identical estimates") {
        latdens::rng::Stream rng(97);
        Grid grid(0.0, 1.0, 30);
        Basis basis = make_basis(grid);
        DrawnDensities truth = draw_densities(5, grid, rng);
        std::vector<Eigen::VectorXd> groups;
        for (int i = 0; i < 5; ++i)
            groups.push_back(sample_from_density(truth.densities[i], 15, rng));
        SampleSet data(grid, groups);
        InitialValues init = init_from_kde(data, KdeConfig{0.1, 1e-10}, basis);

        McemConfig cfg;
        cfg.seed = 7;
        cfg.mc_growth = 5;
        cfg.max_iterations = 5;
        FitResult a = fit(data, basis, init, cfg);
        FitResult b = fit(data, basis, init, cfg);
        CHECK(a.model.nu() == b.model.nu());
        CHECK(a.model.sigma() == b.model.sigma());
        CHECK(a.pca.scores == b.pca.scores);
    }

    SUBCASE("degenerate zero start converges immediately") {
        Grid grid(0.0, 1.0, 20);
        Basis basis = make_basis(grid);
        Eigen::VectorXd obs(3);
        obs << 0.2, 0.5, 0.8;
        SampleSet data(grid, {obs, obs});
        InitialValues init{Eigen::VectorXd::Zero(20),
                           Eigen::MatrixXd::Zero(20, 20)};
        McemConfig cfg;
        FitResult result = fit(data, basis, init, cfg);
        CHECK(result.converged);
        CHECK(result.iterations == 1);
        CHECK(result.model.sigma().cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("trace rows are consistent") {
        latdens::rng::Stream rng(101);
        Grid grid(0.0, 1.0, 25);
        Basis basis = make_basis(grid);
        DrawnDensities truth = draw_densities(4, grid, rng);
        std::vector<Eigen::VectorXd> groups;
        for (int i = 0; i < 4; ++i)
            groups.push_back(sample_from_density(truth.densities[i], 10, rng));
        SampleSet data(grid, groups);
        InitialValues init = init_from_kde(data, KdeConfig{0.1, 1e-10}, basis);
        McemConfig cfg;
        cfg.mc_growth = 4;
        cfg.max_iterations = 3;
        cfg.epsilon = 1e-12;  // force all iterations
        FitResult result = fit(data, basis, init, cfg);
        REQUIRE(result.trace.size() == 3);
        for (int h = 0; h < 3; ++h) {
            CHECK(result.trace[h].iteration == h + 1);
            CHECK(result.trace[h].draws == 4L * 4 * (h + 1));
            CHECK(result.trace[h].mean_ess > 0.0);
            CHECK(result.trace[h].n_prime >= 1);
        }
        CHECK_FALSE(result.converged);
    }
}

TEST_CASE("predict_scores") {
    latdens::rng::Stream rng(103);
    CounterexampleSetup setup(1.0);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(1, 1, 1.0);
    LatentDensityModel model(setup.basis, Eigen::VectorXd::Zero(1), sigma);
    McemConfig cfg;

    SUBCASE("no observations gives zero scores and the mean density") {
        ScorePrediction prediction =
            predict_scores(model, Eigen::VectorXd(), cfg);
        CHECK(prediction.scores.cwiseAbs().maxCoeff() == 0.0);
        CHECK((prediction.density.values().array() - 1.0).abs().maxCoeff() < 1e-12);
    }

    SUBCASE("matches the grid-search oracle on one component") {
        Eigen::VectorXd obs(1);
        obs << 0.2;
        ScorePrediction prediction = predict_scores(model, obs, cfg);
        double best_z = 0.0, best_value = -kInf;
        for (double z = -10.0; z <= 10.0; z += 1e-4) {
            double value = std::log(2.0 / (1.0 + std::exp(-2.0 * z))) - 0.5 * z * z;
            if (value > best_value) {
                best_value = value;
                best_z = z;
            }
        }
        CHECK(std::abs(prediction.scores[0] - best_z) < 1e-3);
        CHECK(std::abs(integrate(prediction.density.function()) - 1.0) < 1e-10);
    }

    SUBCASE("predicted densities integrate to one") {
        Grid grid(0.0, 1.0, 30);
        Basis basis = make_basis(grid);
        Eigen::VectorXd nu(30);
        for (int k = 0; k < 30; ++k) nu[k] = 0.2 * rng.normal();
        Eigen::MatrixXd sigma30 = project_sum_zero(random_psd(30, rng, 0.3));
        LatentDensityModel model30(basis, nu, sigma30);
        for (int rep = 0; rep < 3; ++rep) {
            Eigen::VectorXd obs(6);
            for (int j = 0; j < 6; ++j) obs[j] = rng.uniform();
            ScorePrediction prediction = predict_scores(model30, obs, cfg);
            CHECK(std::abs(integrate(prediction.density.function()) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("mcem config validation") {
    McemConfig cfg;
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = McemConfig{};
    cfg.var_explained = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = McemConfig{};
    cfg.mc_growth = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
