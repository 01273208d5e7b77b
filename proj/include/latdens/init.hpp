#pragma once

#include "latdens/basis.hpp"
#include "latdens/bayes.hpp"
#include "latdens/sample_set.hpp"

namespace latdens {

struct KdeConfig {
    double bandwidth = 1.0;  // standard deviation of the Gaussian kernel
    double floor = 1e-10;    // density floor applied before renormalization
};

// Gaussian kernel density estimate at the cell midpoints. Each kernel is
// truncated to the grid interval and renormalized by its own interval
// mass, then the estimate is floored at cfg.floor and renormalized to
// integrate to one.
Density kde(const Eigen::VectorXd& observations, const KdeConfig& cfg,
            const Grid& grid);

struct InitialValues {
    Eigen::VectorXd nu;
    Eigen::MatrixXd sigma;
};

// Starting values from the kernel-density route: clr-transform the KDE of
// each group, project onto the basis, and return the empirical mean and
// covariance (divisor n) of the coefficient vectors, sum-to-zero projected
// where the basis requires it. Needs at least two groups; otherwise use
// init_identity.
InitialValues init_from_kde(const SampleSet& data, const KdeConfig& cfg,
                            const Basis& basis);

// Starting values for orthonormal bases: zero mean and identity
// covariance, sum-to-zero projected for equal-integral bases (bases whose
// functions already integrate to zero, such as the Egozcue basis, are
// left untouched).
InitialValues init_identity(const Basis& basis);

}  // namespace latdens
