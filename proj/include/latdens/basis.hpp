#pragma once

#include "latdens/grid.hpp"

namespace latdens {

enum class BasisKind {
    normalized_indicator,
    explicit_orthonormal,
};

/**
 * An ordered set of coefficient-generating functions on a grid.
 *
 * Two kinds are supported:
 *  - normalized_indicator: one indicator per cell scaled by width^{-1/2},
 *    so the Gram matrix is exactly the identity and all integrals are
 *    equal. Expansions integrate to zero iff the coefficients sum to zero.
 *  - explicit_orthonormal: arbitrary orthonormal functions supplied as a
 *    matrix of cell values (one column per function), validated to have
 *    identity Gram. Used for orthonormal bases of L2_0 such as the
 *    discrete Egozcue basis, where each function already integrates to
 *    zero and coefficients are unconstrained.
 */
class Basis {
public:
    static Basis normalized_indicator(const Grid& grid);
    // functions: n_cells x N, column k holds the values of e_k.
    static Basis explicit_orthonormal(const Grid& grid, Eigen::MatrixXd functions);

    BasisKind kind() const { return kind_; }
    const Grid& grid() const { return grid_; }
    int size() const { return static_cast<int>(functions_.cols()); }

    // Cell values of all functions, n_cells x N.
    const Eigen::MatrixXd& functions() const { return functions_; }
    GridFunction function(int k) const;

    const Eigen::VectorXd& integrals() const { return integrals_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

    // e_k(x) via the cell containing x.
    double evaluate(int k, double x) const;

    // True when all function integrals are equal and nonzero, in which
    // case expansions lie in L2_0 exactly iff coefficient sums vanish and
    // estimated parameters are projected accordingly.
    bool sum_zero_coefficients() const { return sum_zero_coefficients_; }

private:
    Basis(Grid grid, BasisKind kind, Eigen::MatrixXd functions);

    Grid grid_;
    BasisKind kind_;
    Eigen::MatrixXd functions_;
    Eigen::VectorXd integrals_;
    Eigen::MatrixXd gram_;
    bool sum_zero_coefficients_;
};

// The normalized indicator basis with one function per grid cell.
Basis make_basis(const Grid& grid);

// Linear combination sum_k coeffs[k] e_k; throws on length mismatch.
GridFunction expand(const Eigen::VectorXd& coeffs, const Basis& basis);

// Coefficients gram^{-1} <g, e_k>; plain inner products when the Gram
// matrix is the identity. Exact round trip with expand for functions in
// the span.
Eigen::VectorXd project(const GridFunction& g, const Basis& basis);

// Projection onto the orthogonal complement of the constant coefficient
// vector: v - mean(v), and P S P for matrices. Applied to estimated
// parameters of sum-zero-coefficient bases.
Eigen::VectorXd project_sum_zero(const Eigen::VectorXd& v);
Eigen::MatrixXd project_sum_zero(const Eigen::MatrixXd& m);

}  // namespace latdens
