#pragma once

#include <string>
#include <vector>

#include "latdens/evaluation.hpp"
#include "latdens/mcem.hpp"
#include "latdens/rng.hpp"

namespace latdens {

/// The two-component truth underlying the simulation study, on clr level:
/// mean -20(x - 1/2)^2 + 5/3 and orthogonal components
/// (1/5) sin(10(x - 1/2)) with variance 0.5 and
/// (1/10) cos(2 pi (x - 1/2)) with variance 0.2.
struct TrueProcess {
    GridFunction mean;
    GridFunction g1;
    GridFunction g2;
    double var1 = 0.5;
    double var2 = 0.2;
};

TrueProcess true_process(const Grid& grid);

struct DrawnDensities {
    std::vector<Density> densities;
    Eigen::MatrixXd scores;  // n x 2 true scores
};

// n densities clr_inverse(mean + z1 g1 + z2 g2) with independent normal
// scores.
DrawnDensities draw_densities(int n, const Grid& grid, rng::Stream& stream);

// m i.i.d. draws from a grid density by inverting the piecewise-linear
// cell CDF: select the cell, then place the point uniformly inside it
// (exact for the piecewise-constant representation).
Eigen::VectorXd sample_from_density(const Density& f, int m, rng::Stream& stream);

struct StudyConfig {
    int n_groups = 30;
    std::vector<int> m_per_group{20, 40, 80, 160};
    int n_replicates = 100;
    Grid grid{0.0, 1.0, 200};
    std::vector<double> bandwidths{0.12, 0.09, 0.08, 0.07};
    McemConfig mcem;
    std::uint64_t master_seed = 1u;

    void validate() const;
};

struct StudyRow {
    int replicate = 0;
    int m_per_group = 0;
    std::string method;  // "latent" or "two_step_kde"
    double mean_distance = 0.0;
    double cov_distance = 0.0;
    std::string flag;  // "ok", "non_converged" or "failed: ..."
};

// One row per (m, replicate, method): generate truth, sample, fit the
// latent model from KDE starting values, evaluate the two-step baseline,
// and record distances to the oracle estimates. Per-replicate failures are
// flagged rows; the table order is (m, replicate, method) regardless of
// how the work is scheduled. Replayable: the same config and seed yield
// the same table.
std::vector<StudyRow> run_study(const StudyConfig& cfg);

struct StudySummaryRow {
    int m_per_group = 0;
    std::string method;
    int n_ok = 0;
    int n_flagged = 0;
    double mean_distance_mean = 0.0;
    double mean_distance_sd = 0.0;
    double cov_distance_mean = 0.0;
    double cov_distance_sd = 0.0;
};

// Per-method mean and standard deviation of both distances for each m.
// Rows flagged "failed" are excluded from the averages (non-converged fits
// still count: they produced estimates).
std::vector<StudySummaryRow> summarize_study(const std::vector<StudyRow>& rows);

}  // namespace latdens
