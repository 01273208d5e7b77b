#include "latdens/sample_set.hpp"

#include <stdexcept>
#include <string>

namespace latdens {

SampleSet::SampleSet(Grid grid, std::vector<Eigen::VectorXd> groups)
    : grid_(grid), groups_(std::move(groups)) {
    if (groups_.empty())
        throw std::invalid_argument("SampleSet: need at least one group");
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.size() < 1)
            throw std::invalid_argument("SampleSet: group " + std::to_string(i) +
                                        " is empty");
        for (Eigen::Index j = 0; j < g.size(); ++j) {
            if (!(g[j] >= grid_.lower() && g[j] <= grid_.upper()))
                throw std::invalid_argument(
                    "SampleSet: observation " + std::to_string(g[j]) +
                    " in group " + std::to_string(i) + " outside [" +
                    std::to_string(grid_.lower()) + ", " +
                    std::to_string(grid_.upper()) + "]");
        }
    }
}

Eigen::VectorXd SampleSet::cell_counts(int i) const {
    return latdens::cell_counts(group(i), grid_);
}

Eigen::VectorXd cell_counts(const Eigen::VectorXd& observations, const Grid& grid) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(grid.n_cells());
    for (Eigen::Index j = 0; j < observations.size(); ++j)
        counts[grid.cell_index(observations[j])] += 1.0;
    return counts;
}

}  // namespace latdens
