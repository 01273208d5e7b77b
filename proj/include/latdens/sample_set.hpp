#pragma once

#include <vector>

#include "latdens/grid.hpp"

namespace latdens {

/**
 * Grouped raw observations: n groups of real values, all within the grid
 * interval, each group nonempty. This is the only data the estimator sees.
 */
class SampleSet {
public:
    SampleSet(Grid grid, std::vector<Eigen::VectorXd> groups);

    const Grid& grid() const { return grid_; }
    int n_groups() const { return static_cast<int>(groups_.size()); }
    const Eigen::VectorXd& group(int i) const { return groups_.at(i); }
    const std::vector<Eigen::VectorXd>& groups() const { return groups_; }

    // Number of observations per grid cell for group i. The posterior of
    // the scores depends on the data only through these counts.
    Eigen::VectorXd cell_counts(int i) const;

private:
    Grid grid_;
    std::vector<Eigen::VectorXd> groups_;
};

// Counts per cell for a single observation vector; throws
// std::invalid_argument when an observation lies outside the grid.
Eigen::VectorXd cell_counts(const Eigen::VectorXd& observations, const Grid& grid);

}  // namespace latdens
