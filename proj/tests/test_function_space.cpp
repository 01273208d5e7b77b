#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "latdens/basis.hpp"
#include "latdens/bayes.hpp"
#include "latdens/grid.hpp"
#include "test_helpers.hpp"

using namespace latdens;
using test_helpers::random_smooth_clr;
using test_helpers::random_smooth_density;
using test_helpers::unit_grid;

namespace {

GridFunction from_midpoints(const Grid& grid, double (*f)(double)) {
    Eigen::VectorXd values(grid.n_cells());
    for (int k = 0; k < grid.n_cells(); ++k) values[k] = f(grid.midpoint(k));
    return GridFunction(grid, values);
}

}  // namespace

TEST_CASE("grid invariants") {
    Grid grid(0.0, 1.0, 200);
    CHECK(grid.cell_width() == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(grid.midpoint(0) == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(grid.midpoint(199) == doctest::Approx(0.9975).epsilon(1e-15));
    CHECK(grid.cell_index(0.0) == 0);
    CHECK(grid.cell_index(1.0) == 199);  // upper boundary joins the last cell
    CHECK(grid.cell_index(0.0051) == 1);
    CHECK_THROWS_AS(grid.cell_index(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1.0, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(Grid(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("integrate") {
    Grid grid = unit_grid();
    CHECK(integrate(GridFunction::constant(grid, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    // Midpoint rule is exact for linear functions.
    GridFunction linear = from_midpoints(grid, [](double x) { return x; });
    CHECK(integrate(linear) == doctest::Approx(0.5).epsilon(1e-15));
    GridFunction square = from_midpoints(grid, [](double x) { return x * x; });
    CHECK(std::abs(integrate(square) - 1.0 / 3.0) < 1e-5);
}

TEST_CASE("inner product") {
    Grid grid = unit_grid();
    GridFunction one = GridFunction::constant(grid, 1.0);
    CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-14));
    GridFunction f = from_midpoints(grid, [](double x) { return std::exp(x); });
    CHECK(inner_product(f, GridFunction::zero(grid)) == 0.0);

    // The two components of the simulation truth are orthogonal.
    GridFunction g1 = from_midpoints(grid, [](double x) { return 0.2 * std::sin(10.0 * (x - 0.5)); });
    GridFunction g2 = from_midpoints(grid, [](double x) { return 0.1 * std::cos(2.0 * M_PI * (x - 0.5)); });
    CHECK(std::abs(inner_product(g1, g2)) < 1e-4);

    Grid other(0.0, 1.0, 100);
    CHECK_THROWS_AS(inner_product(one, GridFunction::constant(other, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("clr of the uniform density is zero") {
    Grid grid = unit_grid();
    Density uniform(GridFunction::constant(grid, 1.0));
    CHECK(clr(uniform).values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clr of exp(2x) is 2x - 1 at the midpoints") {
    Grid grid = unit_grid();
    GridFunction f = from_midpoints(grid, [](double x) { return std::exp(2.0 * x); });
    ClrFunction g = clr(f);
    for (int k = 0; k < grid.n_cells(); ++k)
        CHECK(std::abs(g.values()[k] - (2.0 * grid.midpoint(k) - 1.0)) < 1e-12);
}

TEST_CASE("clr output integrates to zero") {
    Grid grid = unit_grid();
    Eigen::VectorXd bump(grid.n_cells());
    for (int k = 0; k < grid.n_cells(); ++k) {
        double x = grid.midpoint(k);
        bump[k] = std::exp(-0.5 * std::pow((x - 0.4) / 0.1, 2));
    }
    Density f = Density::normalized(GridFunction(grid, bump));
    CHECK(std::abs(integrate(clr(f).function())) < 1e-10);
}

TEST_CASE("clr errors name the offending cell") {
    Grid grid(0.0, 1.0, 4);
    Eigen::VectorXd values(4);
    values << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_WITH_AS(clr(GridFunction(grid, values)),
                         doctest::Contains("cell 2"), std::domain_error);
}

TEST_CASE("clr scale invariance") {
    Grid grid = unit_grid();
    latdens::rng::Stream rng(11);
    Density f = random_smooth_density(grid, rng);
    ClrFunction base = clr(f);
    for (double alpha : {0.5, 2.0, 10.0}) {
        ClrFunction scaled = clr(GridFunction(grid, alpha * f.values()));
        CHECK((scaled.values() - base.values()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("clr_inverse of zero is uniform") {
    Grid grid = unit_grid();
    Density f = clr_inverse(GridFunction::zero(grid));
    CHECK((f.values().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("clr_inverse of 2x - 1 matches the analytic exponential density") {
    Grid grid = unit_grid();
    GridFunction g = from_midpoints(grid, [](double x) { return 2.0 * x - 1.0; });
    Density f = clr_inverse(g);
    // Same normalization computed independently from the analytic form
    // exp(2x) at the midpoints.
    double z = 0.0;
    for (int k = 0; k < grid.n_cells(); ++k)
        z += std::exp(2.0 * grid.midpoint(k)) * grid.cell_width();
    for (int k : {0, 99, 199}) {
        double expected = std::exp(2.0 * grid.midpoint(k)) / z;
        CHECK(std::abs(f.values()[k] - expected) < 1e-10);
    }
    // The quadrature normalizer differs from the exact integral only by
    // the midpoint-rule error.
    CHECK(z == doctest::Approx(0.5 * (std::exp(2.0) - 1.0)).epsilon(1e-4));
}

TEST_CASE("clr round trips on random smooth inputs") {
    Grid grid = unit_grid();
    latdens::rng::Stream rng(17);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        Density f = random_smooth_density(grid, rng);
        Density back = clr_inverse(clr(f));
        worst = std::max(worst,
                         (back.values() - f.values()).cwiseAbs().maxCoeff());
        GridFunction g = random_smooth_clr(grid, rng);
        ClrFunction back_g = clr(clr_inverse(g));
        worst = std::max(worst,
                         (back_g.values() - g.values()).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("clr_inverse survives huge values via max subtraction") {
    Grid grid(0.0, 1.0, 4);
    Eigen::VectorXd values(4);
    values << 800.0, 700.0, 0.0, -900.0;
    Density f = clr_inverse(GridFunction(grid, values));
    CHECK(f.values().allFinite());
    CHECK(std::abs(integrate(f.function()) - 1.0) < 1e-12);
}

TEST_CASE("bayes inner product") {
    Grid grid = unit_grid();
    latdens::rng::Stream rng(23);
    Density uniform(GridFunction::constant(grid, 1.0));
    Density f = random_smooth_density(grid, rng);

    SUBCASE("uniform is the zero element") {
        CHECK(std::abs(bayes_inner_product(uniform, f)) < 1e-10);
    }

    SUBCASE("clr = 2x - 1 gives 1/3") {
        GridFunction g = from_midpoints(grid, [](double x) { return 2.0 * x - 1.0; });
        Density h = clr_inverse(g);
        // Exactly the grid quadrature of (2x-1)^2, which sits within the
        // midpoint-rule error of the analytic 1/3.
        CHECK(std::abs(bayes_inner_product(h, h) - inner_product(g, g)) < 1e-10);
        CHECK(std::abs(bayes_inner_product(h, h) - 1.0 / 3.0) < 1e-5);
    }

    SUBCASE("matches the naive double integral") {
        Density f2 = random_smooth_density(grid, rng);
        // Brute-force oracle: the defining double integral.
        const int n = grid.n_cells();
        const double w = grid.cell_width();
        Eigen::ArrayXd l1 = f.values().array().log();
        Eigen::ArrayXd l2 = f2.values().array().log();
        double brute = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                brute += (l1[a] - l1[b]) * (l2[a] - l2[b]) * w * w;
        brute /= 2.0 * grid.length();
        CHECK(std::abs(bayes_inner_product(f, f2) - brute) < 1e-8);
    }

    SUBCASE("agrees with the clr inner product (isometry)") {
        for (int rep = 0; rep < 20; ++rep) {
            Density a = random_smooth_density(grid, rng);
            Density b = random_smooth_density(grid, rng);
            double direct = bayes_inner_product(a, b);
            double through_clr = inner_product(clr(a).function(), clr(b).function());
            CHECK(std::abs(direct - through_clr) < 1e-8);
        }
    }
}

TEST_CASE("perturbation and powering") {
    Grid grid = unit_grid();
    latdens::rng::Stream rng(31);
    Density uniform(GridFunction::constant(grid, 1.0));
    Density f = random_smooth_density(grid, rng);

    SUBCASE("uniform is neutral") {
        Density same = bayes_perturb(f, uniform);
        CHECK((same.values() - f.values()).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("power zero gives uniform") {
        Density flat = bayes_power(0.0, f);
        CHECK((flat.values().array() - 1.0).abs().maxCoeff() < 1e-12);
    }

    SUBCASE("doubling on clr level") {
        GridFunction g = from_midpoints(grid, [](double x) { return 2.0 * x - 1.0; });
        Density h = clr_inverse(g);
        ClrFunction doubled = clr(bayes_power(2.0, h));
        for (int k = 0; k < grid.n_cells(); ++k)
            CHECK(std::abs(doubled.values()[k] - (4.0 * grid.midpoint(k) - 2.0)) < 1e-10);
    }

    SUBCASE("clr is a homomorphism") {
        Density f2 = random_smooth_density(grid, rng);
        GridFunction sum = clr(f).function() + clr(f2).function();
        ClrFunction perturbed = clr(bayes_perturb(f, f2));
        CHECK((perturbed.values() - sum.values()).cwiseAbs().maxCoeff() < 1e-10);

        GridFunction scaled = 3.0 * clr(f).function();
        ClrFunction powered = clr(bayes_power(3.0, f));
        CHECK((powered.values() - scaled.values()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("normalized indicator basis") {
    SUBCASE("four cells on the unit interval") {
        Grid grid(0.0, 1.0, 4);
        Basis basis = make_basis(grid);
        CHECK(basis.size() == 4);
        CHECK(basis.function(0).values()[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(basis.function(0).values()[1] == 0.0);
        CHECK(basis.sum_zero_coefficients());
        CHECK((basis.integrals().array() - 0.5).abs().maxCoeff() < 1e-15);
    }

    SUBCASE("gram is the identity exactly") {
        Basis basis = make_basis(unit_grid());
        CHECK((basis.gram() - Eigen::MatrixXd::Identity(200, 200)).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("zero-sum coefficients expand into L2_0") {
        Grid grid = unit_grid();
        Basis basis = make_basis(grid);
        latdens::rng::Stream rng(37);
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd coeffs(basis.size());
            for (int k = 0; k < basis.size(); ++k) coeffs[k] = rng.normal();
            coeffs = project_sum_zero(coeffs);
            CHECK(std::abs(integrate(expand(coeffs, basis))) < 1e-12);
        }
    }
}

TEST_CASE("expand and project") {
    Grid grid = unit_grid(50);
    Basis basis = make_basis(grid);
    latdens::rng::Stream rng(41);

    SUBCASE("unit vector maps to the basis function") {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(basis.size());
        unit[7] = 1.0;
        GridFunction e7 = expand(unit, basis);
        CHECK((e7.values() - basis.function(7).values()).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("zero function projects to zero") {
        CHECK(project(GridFunction::zero(grid), basis).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("round trip") {
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd coeffs(basis.size());
            for (int k = 0; k < basis.size(); ++k) coeffs[k] = rng.normal();
            Eigen::VectorXd back = project(expand(coeffs, basis), basis);
            CHECK((back - coeffs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(expand(Eigen::VectorXd::Zero(3), basis), std::invalid_argument);
    }
}

TEST_CASE("explicit orthonormal basis validation") {
    Grid grid(0.0, 1.0, 2);
    Eigen::MatrixXd good(2, 1);
    good << 1.0, -1.0;  // norm^2 = 0.5 * (1 + 1) = 1
    Basis basis = Basis::explicit_orthonormal(grid, good);
    CHECK_FALSE(basis.sum_zero_coefficients());

    Eigen::MatrixXd bad(2, 1);
    bad << 1.0, 1.0;  // integral 1, but paired with itself below
    Eigen::MatrixXd pair(2, 2);
    pair << 1.0, 1.0, -1.0, 1.0;
    CHECK_THROWS_AS(Basis::explicit_orthonormal(grid, 2.0 * good),
                    std::invalid_argument);
    CHECK(Basis::explicit_orthonormal(grid, pair).size() == 2);
}

TEST_CASE("density and clr type validation") {
    Grid grid(0.0, 1.0, 4);
    Eigen::VectorXd not_normalized(4);
    not_normalized << 1.0, 2.0, 3.0, 4.0;
    CHECK_THROWS_AS(Density(GridFunction(grid, not_normalized)), std::invalid_argument);
    Eigen::VectorXd not_centered(4);
    not_centered << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(ClrFunction(GridFunction(grid, not_centered)), std::invalid_argument);
}
