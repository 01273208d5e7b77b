#pragma once

#include <vector>

#include "latdens/init.hpp"
#include "latdens/model.hpp"
#include "latdens/sample_set.hpp"

namespace latdens {

/// Pointwise mean and covariance of the clr transforms of a set of fully
/// known densities (divisor n): the reference both estimators are measured
/// against.
struct OracleEstimates {
    GridFunction mean;
    Eigen::MatrixXd covariance;  // n_cells x n_cells
    std::vector<Density> source;
};

OracleEstimates oracle_estimates(const std::vector<Density>& true_densities);

// Two-step baseline: KDE per group, clr transform, empirical coefficient
// moments (divisor n), eigendecomposition, and scores by L2 projection of
// the centered clr estimates onto the eigenfunctions.
PCARepresentation two_step_pca(const SampleSet& data, const KdeConfig& cfg);

// Empirical mean and coefficient covariance of the clr KDEs; the model
// two_step_pca decomposes, also used as starting values for the MCEM fit.
InitialValues two_step_moments(const SampleSet& data, const KdeConfig& cfg,
                               const Basis& basis);

// L2 distance sqrt(int (a - b)^2 dx) between two grid functions.
double mean_distance(const GridFunction& a, const GridFunction& b);

// L2 distance sqrt(int int (A - B)^2 dx1 dx2) between two covariance
// surfaces sampled at the cell midpoints of the given grid.
double cov_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const Grid& grid);

}  // namespace latdens
