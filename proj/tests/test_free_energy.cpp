#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "subtilt/distributions.hpp"
#include "subtilt/errors.hpp"
#include "subtilt/free_energy.hpp"

using namespace subtilt;

namespace {

// Closed forms recomputed from scratch, independent of the implementation.
double exp_lam(double e) { return -std::log(1.0 - e * e); }
double exp_lam1(double e) { return 2.0 * e / (1.0 - e * e); }
double exp_lam2(double e) { return 2.0 * (1.0 + e * e) / ((1.0 - e * e) * (1.0 - e * e)); }

double gauss_f(double e) { return std::pow(1.0 + 2.0 * e, -0.5) + std::pow(1.0 - 2.0 * e, -0.5); }
double gauss_lam(double e) { return std::log(gauss_f(e)) - std::log(2.0); }
double gauss_lam1(double e) {
    double fp = -std::pow(1.0 + 2.0 * e, -1.5) + std::pow(1.0 - 2.0 * e, -1.5);
    return fp / gauss_f(e);
}
double gauss_lam2(double e) {
    double f = gauss_f(e);
    double fp = -std::pow(1.0 + 2.0 * e, -1.5) + std::pow(1.0 - 2.0 * e, -1.5);
    double fpp = 3.0 * (std::pow(1.0 + 2.0 * e, -2.5) + std::pow(1.0 - 2.0 * e, -2.5));
    return (fpp * f - fp * fp) / (f * f);
}

// E[exp(eta sign(X)|X|)] for X the symmetrized Gamma(k) pushed through any
// signed power, evaluated at the matching alpha: 0.5 * ((1-e)^-k + (1+e)^-k).
double symgamma_lam(double k, double e) {
    return std::log(0.5 * (std::pow(1.0 - e, -k) + std::pow(1.0 + e, -k)));
}
double symgamma_lam1(double k, double e) {
    double num = k * (std::pow(1.0 - e, -k - 1.0) - std::pow(1.0 + e, -k - 1.0));
    return num / (std::pow(1.0 - e, -k) + std::pow(1.0 + e, -k));
}

}  // namespace

TEST_CASE("exp-power closed forms") {
    auto fe = exp_power_model(2.0);
    CHECK(fe.alpha() == 0.5);
    CHECK(fe.xi() == 1.0);
    CHECK_FALSE(fe.xi_is_infinite());
    REQUIRE(fe.distribution() != nullptr);
    CHECK(fe.distribution()->power() == 2.0);

    CHECK(fe.lambda(0.0) == 0.0);
    CHECK(fe.lambda(0.5) == doctest::Approx(-std::log(0.75)).epsilon(1e-15));
    CHECK(fe.lambda_prime(0.5) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(fe.lambda_second(0.5) == doctest::Approx(2.0 * 1.25 / 0.5625).epsilon(1e-15));
    CHECK(fe.relative_variance(0.5) == doctest::Approx(2.5).epsilon(1e-14));

    for (double e : {0.1, 0.35, 0.77, 0.999}) {
        CHECK(fe.lambda(-e) == fe.lambda(e));
        CHECK(fe.lambda_prime(-e) == doctest::Approx(-fe.lambda_prime(e)).epsilon(1e-15));
        CHECK(fe.lambda_second(e) >= -1e-10);
    }

    CHECK_THROWS_AS(fe.lambda(1.0), DomainError);
    CHECK_THROWS_AS(fe.lambda(-1.0), DomainError);
    CHECK_THROWS_AS(fe.lambda_prime(1.2), DomainError);
    CHECK_THROWS_AS(fe.relative_variance(0.0), UndefinedAtZero);
    CHECK_THROWS_AS(exp_power_model(1.0), DomainError);
    CHECK_THROWS_AS(exp_power_model(0.5), DomainError);

    // Boundary degeneracy: V tends to 1 from above.
    double v = fe.relative_variance(0.999);
    CHECK(v >= 1.0);
    CHECK(v <= 1.01);
    CHECK(fe.relative_variance(0.3) > fe.relative_variance(0.6));
    CHECK(fe.relative_variance(0.6) > fe.relative_variance(0.9));
}

TEST_CASE("gauss-power closed forms") {
    auto fe = gauss_power_model(4.0);
    CHECK(fe.alpha() == 0.5);
    CHECK(fe.xi() == 0.5);

    CHECK(fe.lambda(0.0) == 0.0);
    for (double e : {0.05, 0.2, 0.3, 0.45, 0.4999}) {
        CHECK(fe.lambda(e) == doctest::Approx(gauss_lam(e)).epsilon(1e-13));
        CHECK(fe.lambda_prime(e) == doctest::Approx(gauss_lam1(e)).epsilon(1e-13));
        CHECK(fe.lambda_second(e) == doctest::Approx(gauss_lam2(e)).epsilon(1e-13));
        CHECK(fe.lambda(-e) == fe.lambda(e));
        CHECK(fe.lambda_second(e) >= -1e-10);
    }

    double v = fe.relative_variance(0.4999);
    CHECK(v >= 2.0);
    CHECK(v <= 2.05);

    CHECK_THROWS_AS(fe.lambda(0.5), DomainError);
    CHECK_THROWS_AS(fe.lambda(-0.6), DomainError);
    CHECK_THROWS_AS(gauss_power_model(2.0), DomainError);
}

TEST_CASE("finite differences confirm the analytic derivatives") {
    const double h = 1e-5;
    auto models = std::vector<FreeEnergyModel>{exp_power_model(2.0), exp_power_model(3.0),
                                               gauss_power_model(4.0), gauss_power_model(5.0)};
    for (const auto& fe : models) {
        CAPTURE(fe.name());
        for (int j = 1; j <= 18; ++j) {
            double e = 0.05 * j * fe.xi();  // up to 90% of the domain
            double fd1 = (fe.lambda(e + h) - fe.lambda(e - h)) / (2.0 * h);
            double fd2 = (fe.lambda(e + h) - 2.0 * fe.lambda(e) + fe.lambda(e - h)) / (h * h);
            CHECK(std::fabs(fd1 - fe.lambda_prime(e)) <=
                  1e-6 * (1.0 + std::fabs(fe.lambda_prime(e))));
            CHECK(std::fabs(fd2 - fe.lambda_second(e)) <=
                  1e-4 * (1.0 + std::fabs(fe.lambda_second(e))));
        }
    }
}

TEST_CASE("numeric model reproduces the exp-power closed form") {
    auto dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0);
    auto fe = numeric_model(dist, 0.5);

    CHECK_FALSE(fe.xi_is_infinite());
    CHECK(std::fabs(fe.xi() - 1.0) < 5e-6);
    CHECK(std::fabs(fe.lambda(0.0)) < 1e-10);

    for (int j = 0; j < 64; ++j) {
        double e = -0.99 + 1.98 * j / 63.0;
        CAPTURE(e);
        CHECK(std::fabs(fe.lambda(e) - exp_lam(e)) <= 1e-6);
        CHECK(std::fabs(fe.lambda_prime(e) - exp_lam1(e)) <= 1e-6);
        CHECK(std::fabs(fe.lambda_second(e) - exp_lam2(e)) <= 1e-6);
    }

    // Tilted-mean identity at a representative point, tighter than the grid bound.
    CHECK(std::fabs(fe.lambda_prime(0.5) - 4.0 / 3.0) < 1e-8);
    CHECK_THROWS_AS(fe.lambda(1.5), DomainError);
}

TEST_CASE("numeric model reproduces the gauss-power closed form") {
    auto dist = DistributionModel::power_of(DistributionModel::standard_gaussian(), 4.0);
    auto fe = numeric_model(dist, 0.5);

    CHECK(std::fabs(fe.xi() - 0.5) < 5e-6);
    CHECK(std::fabs(fe.lambda(0.0)) < 1e-10);
    for (int j = 0; j < 64; ++j) {
        double e = -0.49 + 0.98 * j / 63.0;
        CAPTURE(e);
        CHECK(std::fabs(fe.lambda(e) - gauss_lam(e)) <= 1e-6);
        CHECK(std::fabs(fe.lambda_prime(e) - gauss_lam1(e)) <= 1e-6);
        CHECK(std::fabs(fe.lambda_second(e) - gauss_lam2(e)) <= 1e-6);
    }
}

TEST_CASE("numeric model via the density-only path: symmetrized Gamma powers") {
    // Non-integer shape has no closed tail, forcing the density-based scans.
    auto dist =
        DistributionModel::power_of(DistributionModel::symmetrized_gamma(2.5), 2.0);
    CHECK_FALSE(dist.has_closed_tail());
    auto fe = numeric_model(dist, 0.5);

    CHECK(std::fabs(fe.xi() - 1.0) < 2e-5);
    CHECK(std::fabs(fe.lambda(0.0)) < 1e-10);
    for (double e : {0.2, 0.5, 0.9}) {
        CAPTURE(e);
        CHECK(std::fabs(fe.lambda(e) - symgamma_lam(2.5, e)) <= 1e-6);
        CHECK(std::fabs(fe.lambda_prime(e) - symgamma_lam1(2.5, e)) <= 1e-6);
        CHECK(fe.lambda(-e) == doctest::Approx(fe.lambda(e)).epsilon(1e-12));
    }
}

TEST_CASE("numeric model detects an unbounded domain") {
    // Raw symmetrized Gamma tails are exponential, so compressing by any
    // alpha < 1 makes every tilt integrable.
    auto fe = numeric_model(DistributionModel::symmetrized_gamma(2.5), 0.6);
    CHECK(fe.xi_is_infinite());
    CHECK(std::isinf(fe.xi()));
    double l5 = fe.lambda(5.0);
    CHECK(std::isfinite(l5));
    CHECK(l5 > 0.0);
    CHECK(fe.lambda(-5.0) == doctest::Approx(l5).epsilon(1e-10));
    CHECK(std::fabs(fe.lambda(0.0)) < 1e-10);

    auto fg = numeric_model(DistributionModel::standard_gaussian(), 0.5);
    CHECK(fg.xi_is_infinite());
    CHECK(std::isfinite(fg.lambda(2.0)));
}

TEST_CASE("numeric model detects a degenerate domain") {
    // alpha above the tail exponent: sign(X)|X|^0.9 has tails heavier than
    // exponential, so no positive tilt is integrable.
    auto dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0);
    auto fe = numeric_model(dist, 0.9);
    CHECK(fe.xi() == 0.0);
    CHECK(std::fabs(fe.lambda(0.0)) < 1e-10);
    CHECK_THROWS_AS(fe.lambda(0.1), DomainError);
}

TEST_CASE("numeric derivatives are internally consistent") {
    auto dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0);
    auto fe = numeric_model(dist, 0.5);
    const double h = 1e-5;
    for (double e : {0.1, 0.4, 0.7, 0.9}) {
        CAPTURE(e);
        double fd1 = (fe.lambda(e + h) - fe.lambda(e - h)) / (2.0 * h);
        CHECK(std::fabs(fd1 - fe.lambda_prime(e)) <=
              1e-6 * (1.0 + std::fabs(fe.lambda_prime(e))));
    }
}

TEST_CASE("quadrature budget propagates as QuadratureFailure") {
    NumericFreeEnergyOptions tight;
    tight.quad_abs_tol = 1e-15;
    tight.quad_rel_tol = 1e-15;
    tight.max_segments = 2;
    auto dist = DistributionModel::power_of(DistributionModel::two_sided_exponential(), 2.0);
    auto fe = numeric_model(dist, 0.5, tight);
    CHECK_THROWS_AS(fe.lambda(0.5), QuadratureFailure);
}

TEST_CASE("truncated quadratic fixture") {
    auto fe = truncated_quadratic_model(1.0, 0.75);
    CHECK(fe.xi() == 1.0);
    CHECK(fe.distribution() == nullptr);
    CHECK(fe.lambda(0.5) == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK(fe.lambda_prime(0.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(fe.lambda_second(0.9) == 1.5);
    CHECK_THROWS_AS(fe.lambda(1.0), DomainError);
    CHECK_THROWS_AS(truncated_quadratic_model(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(truncated_quadratic_model(1.0, 0.0), DomainError);
}

TEST_CASE("domain errors carry the boundary in the message") {
    auto fe = exp_power_model(2.0);
    try {
        fe.lambda(1.5);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        std::string msg = err.what();
        CHECK(msg.find("xi = 1") != std::string::npos);
        CHECK(msg.find("1.5") != std::string::npos);
    }
}
