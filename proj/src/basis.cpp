#include "latdens/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latdens {

namespace {

constexpr double kOrthonormalTol = 1e-8;

}  // namespace

Basis::Basis(Grid grid, BasisKind kind, Eigen::MatrixXd functions)
    : grid_(grid), kind_(kind), functions_(std::move(functions)) {
    const double width = grid_.cell_width();
    integrals_ = width * functions_.colwise().sum();
    gram_ = width * (functions_.transpose() * functions_);

    // Coefficient sums are constrained when all basis integrals coincide
    // and are nonzero; bases already inside L2_0 leave coefficients free.
    const double scale = integrals_.cwiseAbs().maxCoeff();
    bool all_equal = true;
    for (Eigen::Index k = 1; k < integrals_.size(); ++k)
        if (std::abs(integrals_[k] - integrals_[0]) > 1e-12 * std::max(1.0, scale))
            all_equal = false;
    sum_zero_coefficients_ = all_equal && scale > 1e-12;
}

Basis Basis::normalized_indicator(const Grid& grid) {
    const int n = grid.n_cells();
    const double height = 1.0 / std::sqrt(grid.cell_width());
    Eigen::MatrixXd funcs = Eigen::MatrixXd::Zero(n, n);
    funcs.diagonal().setConstant(height);
    Basis basis(grid, BasisKind::normalized_indicator, std::move(funcs));
    // Disjoint supports and the width^{-1/2} scaling make the Gram matrix
    // the identity exactly; pin it to avoid rounding in downstream checks.
    basis.gram_ = Eigen::MatrixXd::Identity(n, n);
    return basis;
}

Basis Basis::explicit_orthonormal(const Grid& grid, Eigen::MatrixXd functions) {
    if (functions.rows() != grid.n_cells())
        throw std::invalid_argument("Basis: function values must have one row per cell");
    if (functions.cols() < 1)
        throw std::invalid_argument("Basis: need at least one function");
    Basis basis(grid, BasisKind::explicit_orthonormal, std::move(functions));
    Eigen::MatrixXd defect = basis.gram_ -
        Eigen::MatrixXd::Identity(basis.size(), basis.size());
    if (defect.cwiseAbs().maxCoeff() > kOrthonormalTol)
        throw std::invalid_argument("Basis: functions are not orthonormal (Gram defect " +
                                    std::to_string(defect.cwiseAbs().maxCoeff()) + ")");
    return basis;
}

GridFunction Basis::function(int k) const {
    if (k < 0 || k >= size())
        throw std::invalid_argument("Basis::function: index out of range");
    return GridFunction(grid_, functions_.col(k));
}

double Basis::evaluate(int k, double x) const {
    if (k < 0 || k >= size())
        throw std::invalid_argument("Basis::evaluate: index out of range");
    return functions_(grid_.cell_index(x), k);
}

Basis make_basis(const Grid& grid) { return Basis::normalized_indicator(grid); }

GridFunction expand(const Eigen::VectorXd& coeffs, const Basis& basis) {
    if (coeffs.size() != basis.size())
        throw std::invalid_argument("expand: " + std::to_string(coeffs.size()) +
                                    " coefficients for " +
                                    std::to_string(basis.size()) + " functions");
    return GridFunction(basis.grid(), basis.functions() * coeffs);
}

Eigen::VectorXd project(const GridFunction& g, const Basis& basis) {
    detail::require_same_grid(g.grid(), basis.grid(), "project");
    Eigen::VectorXd moments =
        basis.grid().cell_width() * (basis.functions().transpose() * g.values());
    if (basis.kind() == BasisKind::normalized_indicator) return moments;
    return basis.gram().llt().solve(moments);
}

Eigen::VectorXd project_sum_zero(const Eigen::VectorXd& v) {
    return v.array() - v.mean();
}

Eigen::MatrixXd project_sum_zero(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd centered = m;
    Eigen::VectorXd col_means = m.colwise().mean();
    centered.rowwise() -= col_means.transpose();
    Eigen::VectorXd row_means = centered.rowwise().mean();
    centered.colwise() -= row_means;
    return centered;
}

}  // namespace latdens
