#include "latdens/bayes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latdens {

namespace {

constexpr double kIntegralTol = 1e-10;

// Log of every value; throws naming the first non-positive cell.
Eigen::VectorXd checked_log(const GridFunction& f, const char* where) {
    const auto& v = f.values();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (!(v[k] > 0.0))
            throw std::domain_error(std::string(where) +
                                    ": non-positive value " +
                                    std::to_string(v[k]) + " in cell " +
                                    std::to_string(k));
    }
    return v.array().log();
}

}  // namespace

Density::Density(GridFunction f) : f_(std::move(f)) {
    const auto& v = f_.values();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (!(v[k] > 0.0))
            throw std::invalid_argument("Density: non-positive value in cell " +
                                        std::to_string(k));
    }
    double mass = integrate(f_);
    if (std::abs(mass - 1.0) > kIntegralTol)
        throw std::invalid_argument("Density: integral " + std::to_string(mass) +
                                    " differs from 1 beyond tolerance");
}

Density Density::normalized(GridFunction positive) {
    double mass = integrate(positive);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("Density::normalized: total mass must be positive and finite");
    positive *= 1.0 / mass;
    return Density(std::move(positive));
}

ClrFunction::ClrFunction(GridFunction f) : f_(std::move(f)) {
    double mass = integrate(f_);
    if (std::abs(mass) > kIntegralTol)
        throw std::invalid_argument("ClrFunction: integral " +
                                    std::to_string(mass) +
                                    " differs from 0 beyond tolerance");
}

ClrFunction clr(const GridFunction& positive) {
    Eigen::VectorXd logs = checked_log(positive, "clr");
    // Subtract the average so the quadrature integral is zero exactly up
    // to rounding; constant shifts of log f (i.e. positive scalings of f)
    // cancel here.
    logs.array() -= logs.mean();
    return ClrFunction(GridFunction(positive.grid(), std::move(logs)));
}

ClrFunction clr(const Density& f) { return clr(f.function()); }

Density clr_inverse(const GridFunction& g) {
    Eigen::ArrayXd shifted = g.values().array() - g.values().maxCoeff();
    Eigen::VectorXd values = shifted.exp();
    return Density::normalized(GridFunction(g.grid(), std::move(values)));
}

Density clr_inverse(const ClrFunction& g) { return clr_inverse(g.function()); }

double bayes_inner_product(const Density& f1, const Density& f2) {
    detail::require_same_grid(f1.grid(), f2.grid(), "bayes_inner_product");
    Eigen::VectorXd l1 = checked_log(f1.function(), "bayes_inner_product");
    Eigen::VectorXd l2 = checked_log(f2.function(), "bayes_inner_product");
    const double width = f1.grid().cell_width();
    const double length = f1.grid().length();
    double cross = width * l1.dot(l2);
    double int1 = width * l1.sum();
    double int2 = width * l2.sum();
    return cross - int1 * int2 / length;
}

Density bayes_perturb(const Density& f1, const Density& f2) {
    detail::require_same_grid(f1.grid(), f2.grid(), "bayes_perturb");
    Eigen::VectorXd prod = f1.values().cwiseProduct(f2.values());
    return Density::normalized(GridFunction(f1.grid(), std::move(prod)));
}

Density bayes_power(double alpha, const Density& f) {
    // Through the logs so extreme powers stay in range.
    Eigen::ArrayXd logs = f.values().array().log() * alpha;
    logs -= logs.maxCoeff();
    Eigen::VectorXd values = logs.exp();
    return Density::normalized(GridFunction(f.grid(), std::move(values)));
}

}  // namespace latdens
