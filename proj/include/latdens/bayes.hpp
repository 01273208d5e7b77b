#pragma once

#include "latdens/grid.hpp"

namespace latdens {

/// A probability density on a grid: strictly positive values with
/// quadrature integral 1 (within 1e-10). Construction validates both.
class Density {
public:
    explicit Density(GridFunction f);

    // Renormalizes a strictly positive function to unit integral.
    static Density normalized(GridFunction positive);

    const GridFunction& function() const { return f_; }
    const Grid& grid() const { return f_.grid(); }
    const Eigen::VectorXd& values() const { return f_.values(); }

private:
    GridFunction f_;
};

/// An element of L2_0: a grid function with quadrature integral 0
/// (within 1e-10).
class ClrFunction {
public:
    explicit ClrFunction(GridFunction f);

    const GridFunction& function() const { return f_; }
    const Grid& grid() const { return f_.grid(); }
    const Eigen::VectorXd& values() const { return f_.values(); }

private:
    GridFunction f_;
};

// Centered log-ratio transform: log(f) minus its interval average.
// Accepts any strictly positive function; the result is invariant under
// positive scaling of the input, so it is well defined on the equivalence
// classes of the Bayes space. Throws std::domain_error naming the first
// offending cell if a value is not strictly positive.
ClrFunction clr(const GridFunction& positive);
ClrFunction clr(const Density& f);

// Inverse clr: exp(g) renormalized to unit integral. Accepts any finite
// grid function (the result is invariant under adding constants); the
// maximum is subtracted before exponentiation so large values cannot
// overflow.
Density clr_inverse(const GridFunction& g);
Density clr_inverse(const ClrFunction& g);

// Bayes-space inner product
//   (1 / (2|I|)) * int int log(f1(x)/f1(y)) log(f2(x)/f2(y)) dx dy,
// computed through the product-sum expansion
//   int L1 L2 dx - (1/|I|) int L1 dx int L2 dx,  L = log f,
// which is the same value without the double loop.
double bayes_inner_product(const Density& f1, const Density& f2);

// Perturbation: renormalized pointwise product f1 * f2.
Density bayes_perturb(const Density& f1, const Density& f2);

// Powering: renormalized f^alpha.
Density bayes_power(double alpha, const Density& f);

}  // namespace latdens
