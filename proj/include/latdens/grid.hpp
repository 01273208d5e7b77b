#pragma once

#include <Eigen/Dense>

namespace latdens {

/**
 * Equidistant cell partition of a compact interval [lower, upper].
 *
 * Functions are represented by one value per cell (piecewise constant,
 * midpoint convention), which makes the indicator basis, the midpoint
 * quadrature rule and the clr transform mutually exact.
 */
class Grid {
public:
    Grid(double lower, double upper, int n_cells);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    int n_cells() const { return n_cells_; }

    double length() const { return upper_ - lower_; }
    double cell_width() const { return (upper_ - lower_) / n_cells_; }

    // Midpoint of cell k (0-based).
    double midpoint(int k) const {
        return lower_ + (k + 0.5) * cell_width();
    }
    Eigen::VectorXd midpoints() const;

    // Index of the cell containing x; throws std::invalid_argument if x
    // lies outside [lower, upper]. The point upper belongs to the last cell.
    int cell_index(double x) const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    double lower_;
    double upper_;
    int n_cells_;
};

/// A real function on a grid, one value per cell.
class GridFunction {
public:
    GridFunction(Grid grid, Eigen::VectorXd values);

    static GridFunction zero(const Grid& grid);
    static GridFunction constant(const Grid& grid, double value);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }

    // Value of the cell containing x.
    double operator()(double x) const { return values_[grid_.cell_index(x)]; }

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double factor);

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

GridFunction operator+(GridFunction lhs, const GridFunction& rhs);
GridFunction operator-(GridFunction lhs, const GridFunction& rhs);
GridFunction operator*(double factor, GridFunction f);

// Midpoint quadrature: cell_width * sum(values). Exact for functions that
// are constant on cells.
double integrate(const GridFunction& f);

// L2 inner product integrate(f * g); throws on grid mismatch.
double inner_product(const GridFunction& f, const GridFunction& g);

double l2_norm(const GridFunction& f);

namespace detail {
void require_same_grid(const Grid& a, const Grid& b, const char* where);
}

}  // namespace latdens
