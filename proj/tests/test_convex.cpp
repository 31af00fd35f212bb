#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "subtilt/convex.hpp"
#include "subtilt/distributions.hpp"
#include "subtilt/errors.hpp"
#include "subtilt/free_energy.hpp"

using namespace subtilt;

TEST_CASE("slope inversion on the exp-power model") {
    auto fe = exp_power_model(2.0);

    // lambda'(eta) = 2 eta / (1 - eta^2) = m  =>  eta = (sqrt(1 + m^2) - 1)/m.
    double ref10 = (std::sqrt(101.0) - 1.0) / 10.0;
    CHECK(inverse_lambda_prime(fe, 10.0) == doctest::Approx(ref10).epsilon(1e-12));
    CHECK(inverse_lambda_prime(fe, 4.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(inverse_lambda_prime(fe, 0.0) == 0.0);
    CHECK(inverse_lambda_prime(fe, -10.0) == doctest::Approx(-ref10).epsilon(1e-12));

    for (double m = 1e-6; m <= 1e6; m *= 10.0) {
        CAPTURE(m);
        double eta = inverse_lambda_prime(fe, m);
        // One ulp of eta moves the slope by about lambda''(eta) * ulp(eta), which
        // caps how small the residual can be once eta approaches the boundary.
        double ulp_floor = 4.0 * fe.lambda_second(eta) * 2.3e-16 * std::max(1.0, eta);
        CHECK(std::fabs(fe.lambda_prime(eta) - m) <= 1e-12 * m + ulp_floor);
        // Against the closed form eta = m / (1 + sqrt(1 + m^2)).
        double ref = m / (1.0 + std::sqrt(1.0 + m * m));
        CHECK(eta == doctest::Approx(ref).epsilon(1e-11));
    }
    CHECK_THROWS_AS(inverse_lambda_prime(fe, std::nan("")), DomainError);
}

TEST_CASE("slope inversion round-trips on both analytic models") {
    for (auto fe : {exp_power_model(2.0), gauss_power_model(4.0)}) {
        CAPTURE(fe.name());
        for (int j = 1; j <= 19; ++j) {
            double eta = 0.05 * j * fe.xi();
            double back = inverse_lambda_prime(fe, fe.lambda_prime(eta));
            CHECK(std::fabs(back - eta) <= 1e-10 * std::max(1.0, eta));
        }
    }
}

TEST_CASE("bounded-slope fixture cannot be inverted past its cap") {
    auto fe = truncated_quadratic_model(1.0, 0.75);  // lambda' < 1.5 on (-1, 1)
    CHECK(inverse_lambda_prime(fe, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(inverse_lambda_prime(fe, 2.0), ConvergenceFailure);
}

TEST_CASE("legendre transform of the exp-power model") {
    auto fe = exp_power_model(2.0);

    auto p = legendre(fe, 4.0 / 3.0);
    CHECK(p.maximizer == doctest::Approx(0.5).epsilon(1e-12));
    double ref = 0.5 * (4.0 / 3.0) + std::log(0.75);
    CHECK(p.value == doctest::Approx(ref).epsilon(1e-9));

    auto z = legendre(fe, 0.0);
    CHECK(z.value == 0.0);
    CHECK(z.maximizer == 0.0);

    for (double x : {-20.0, -3.0, -0.2, 0.01, 1.0, 7.0, 300.0}) {
        auto q = legendre(fe, x);
        CHECK(q.value >= 0.0);
        CHECK(q.x == x);
        // symmetry of the conjugate of an even function
        CHECK(legendre(fe, -x).value == doctest::Approx(q.value).epsilon(1e-12));
    }
}

TEST_CASE("Young's inequality holds across the grid") {
    for (auto fe : {exp_power_model(2.0), gauss_power_model(4.0)}) {
        CAPTURE(fe.name());
        for (int i = -9; i <= 9; ++i) {
            double eta = 0.1 * i * fe.xi();
            for (double x : {-11.0, -2.0, -0.3, 0.0, 0.7, 4.0, 25.0}) {
                auto j = legendre(fe, x);
                CHECK(eta * x <= j.value + fe.lambda(eta) + 1e-9);
            }
        }
    }
}

TEST_CASE("conjugate curvature is the reciprocal of lambda''") {
    auto fe = gauss_power_model(4.0);
    const double h = 1e-4;
    for (double b : {0.5, 1.0, 2.0, 5.0, 20.0}) {
        CAPTURE(b);
        double js = legendre_second(fe, b);
        double eta = inverse_lambda_prime(fe, b);
        CHECK(js * fe.lambda_second(eta) == doctest::Approx(1.0).epsilon(1e-8));

        double fd = (legendre(fe, b + h).value - 2.0 * legendre(fe, b).value +
                     legendre(fe, b - h).value) / (h * h);
        CHECK(std::fabs(fd - js) <= 1e-5 * std::max(1.0, js));
    }
    // Same identity on the exp-power model.
    auto fx = exp_power_model(2.0);
    for (double b : {0.5, 4.0 / 3.0, 10.0}) {
        double eta = inverse_lambda_prime(fx, b);
        CHECK(legendre_second(fx, b) * fx.lambda_second(eta) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("asymptotic slope approaches the tail coefficient") {
    std::vector<double> grid;
    for (double m = 1.0; m <= 1.0e4 + 1.0; m *= 2.0) grid.push_back(m);
    grid.push_back(1.0e4);

    auto se = asymptotic_slope(exp_power_model(2.0), grid);
    CHECK(se.non_decreasing);
    CHECK(std::fabs(se.limit_estimate - 1.0) < 1e-3);

    auto sg = asymptotic_slope(gauss_power_model(4.0), grid);
    CHECK(sg.non_decreasing);
    CHECK(std::fabs(sg.limit_estimate - 0.5) < 2e-3);

    CHECK_THROWS_AS(asymptotic_slope(exp_power_model(2.0), {}), DomainError);
    CHECK_THROWS_AS(asymptotic_slope(exp_power_model(2.0), {2.0, 1.0}), DomainError);
    CHECK_THROWS_AS(asymptotic_slope(exp_power_model(2.0), {-1.0, 1.0}), DomainError);
}

TEST_CASE("slope inversion works on the quadrature-backed model") {
    auto dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0);
    auto fe = numeric_model(dist, 0.5);
    double eta = inverse_lambda_prime(fe, 10.0);
    CHECK(std::fabs(eta - (std::sqrt(101.0) - 1.0) / 10.0) < 1e-8);

    auto p = legendre(fe, 4.0 / 3.0);
    CHECK(std::fabs(p.value - (0.5 * (4.0 / 3.0) + std::log(0.75))) < 1e-8);
}

TEST_CASE("explicit rate function") {
    RateFunction r(0.5, 0.5);
    CHECK(r(4.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r(-4.0) == r(4.0));
    CHECK(r(0.0) == 0.0);
    CHECK(r.xi() == 0.5);
    CHECK(r.alpha() == 0.5);
    CHECK_THROWS_AS(RateFunction(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(RateFunction(1.0, 1.5), DomainError);
}
