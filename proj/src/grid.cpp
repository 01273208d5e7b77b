#include "latdens/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latdens {

Grid::Grid(double lower, double upper, int n_cells)
    : lower_(lower), upper_(upper), n_cells_(n_cells) {
    if (!(std::isfinite(lower) && std::isfinite(upper)))
        throw std::invalid_argument("Grid: interval bounds must be finite");
    if (!(upper > lower))
        throw std::invalid_argument("Grid: upper must exceed lower");
    if (n_cells < 2)
        throw std::invalid_argument("Grid: need at least 2 cells");
}

Eigen::VectorXd Grid::midpoints() const {
    Eigen::VectorXd mids(n_cells_);
    for (int k = 0; k < n_cells_; ++k) mids[k] = midpoint(k);
    return mids;
}

int Grid::cell_index(double x) const {
    if (!(x >= lower_ && x <= upper_))
        throw std::invalid_argument("Grid: point " + std::to_string(x) +
                                    " outside [" + std::to_string(lower_) +
                                    ", " + std::to_string(upper_) + "]");
    int k = static_cast<int>((x - lower_) / cell_width());
    if (k < 0) k = 0;
    if (k >= n_cells_) k = n_cells_ - 1;
    return k;
}

bool Grid::operator==(const Grid& other) const {
    return lower_ == other.lower_ && upper_ == other.upper_ &&
           n_cells_ == other.n_cells_;
}

GridFunction::GridFunction(Grid grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_cells())
        throw std::invalid_argument("GridFunction: got " +
                                    std::to_string(values_.size()) +
                                    " values for " +
                                    std::to_string(grid_.n_cells()) + " cells");
    if (!values_.allFinite())
        throw std::invalid_argument("GridFunction: values must be finite");
}

GridFunction GridFunction::zero(const Grid& grid) {
    return GridFunction(grid, Eigen::VectorXd::Zero(grid.n_cells()));
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
    return GridFunction(grid, Eigen::VectorXd::Constant(grid.n_cells(), value));
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    detail::require_same_grid(grid_, other.grid_, "GridFunction::operator+=");
    values_ += other.values_;
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    detail::require_same_grid(grid_, other.grid_, "GridFunction::operator-=");
    values_ -= other.values_;
    return *this;
}

GridFunction& GridFunction::operator*=(double factor) {
    values_ *= factor;
    return *this;
}

GridFunction operator+(GridFunction lhs, const GridFunction& rhs) {
    lhs += rhs;
    return lhs;
}

GridFunction operator-(GridFunction lhs, const GridFunction& rhs) {
    lhs -= rhs;
    return lhs;
}

GridFunction operator*(double factor, GridFunction f) {
    f *= factor;
    return f;
}

double integrate(const GridFunction& f) {
    return f.grid().cell_width() * f.values().sum();
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    detail::require_same_grid(f.grid(), g.grid(), "inner_product");
    return f.grid().cell_width() * f.values().dot(g.values());
}

double l2_norm(const GridFunction& f) {
    return std::sqrt(f.grid().cell_width()) * f.values().norm();
}

namespace detail {

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b)
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace detail

}  // namespace latdens
