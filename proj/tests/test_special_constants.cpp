#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcurv/errors.hpp"
#include "qcurv/special_constants.hpp"

#include <cmath>
#include <numbers>

using namespace qcurv;

namespace {

/// Elementary factorial route for integer arguments: I_p^q = q!(p-q-2)!/(p-1)!.
double beta_by_factorials(int p, int q)
{
    double v = 1.0;
    for (int k = 2; k <= q; ++k)
        v *= k;
    for (int k = 2; k <= p - q - 2; ++k)
        v *= k;
    for (int k = 2; k <= p - 1; ++k)
        v /= k;
    return v;
}

}

TEST_CASE("beta integral agrees with its quadrature oracle on the integer lattice")
{
    double worst = 0;
    for (int p = 3; p <= 16; ++p)
        for (int q = 0; q <= p - 2; ++q) {
            const double closed = beta_integral(p, q);
            const double quad = beta_integral_quadrature(p, q);
            worst = std::max(worst, std::abs(closed - quad) / quad);
            CHECK(closed == doctest::Approx(beta_by_factorials(p, q)).epsilon(1e-13));
        }
    CHECK(worst < 1e-10);
}

TEST_CASE("beta integral at non-integer arguments")
{
    CHECK(beta_integral(4.5, 1.25) == doctest::Approx(beta_integral_quadrature(4.5, 1.25)).epsilon(1e-10));
    // I_2^0 = ∫ (1+t)^{-2} dt = 1.
    CHECK(beta_integral(2, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("the I_6^2 value behind the n = 6 Sobolev constant")
{
    CHECK(beta_integral(6, 2) == doctest::Approx(1.0 / 30.0).epsilon(1e-14));
}

TEST_CASE("recursion step reproduces the next lattice value")
{
    for (int p = 3; p <= 16; ++p)
        for (int q = 0; q + 2 < p; ++q) {
            const double next = beta_recursion_step(p, q, beta_integral(p, q));
            CHECK(std::abs(next - beta_integral(p, q + 1)) / beta_integral(p, q + 1) < 1e-12);
        }
}

TEST_CASE("domain errors at the integrability boundary")
{
    CHECK_THROWS_AS(beta_integral(3, 2), DomainError);
    CHECK_THROWS_AS(beta_integral(3, -1), DomainError);
    CHECK_THROWS_AS(beta_integral_quadrature(2, 1), DomainError);
    CHECK_THROWS_AS(beta_recursion_step(4, 2, 1.0), DomainError);
    CHECK_THROWS_AS(DimensionSpec(4), DomainError);
}

TEST_CASE("dimension spec carries the critical exponent")
{
    CHECK(DimensionSpec(6).critical_exponent() == Rational{6, 1});
    CHECK(DimensionSpec(8).critical_exponent() == Rational{4, 1});
    CHECK(DimensionSpec(5).critical_exponent() == Rational{10, 1});
    CHECK(DimensionSpec(7).critical_exponent() == Rational{14, 3});
    CHECK_FALSE(DimensionSpec(5).theorem_grade());
    CHECK(DimensionSpec(6).theorem_grade());
}

TEST_CASE("sphere areas")
{
    using std::numbers::pi;
    CHECK(sphere_area(2) == doctest::Approx(2 * pi));
    CHECK(sphere_area(3) == doctest::Approx(4 * pi));
    CHECK(sphere_area(6) == doctest::Approx(pi * pi * pi));
    CHECK(sphere_area(8) == doctest::Approx(pi * pi * pi * pi / 3));
}

TEST_CASE("best Sobolev constant from an independent closed form")
{
    using std::numbers::pi;
    // n = 6: 6·8·4·2·(I_6^2 ω_5/2)^{2/3} with I_6^2 = 1/30 and ω_5 = π³.
    const double k6 = 384.0 * std::pow(pi * pi * pi / 60.0, 2.0 / 3.0);
    CHECK(best_sobolev_sq_inv(DimensionSpec(6)) == doctest::Approx(k6).epsilon(1e-13));
    CHECK(best_sobolev_sq_inv(DimensionSpec(6)) == doctest::Approx(247.28445).epsilon(1e-7));
    // n = 8: 8·10·6·4·(I_8^3 ω_7/2)^{1/2} with I_8^3 = 3!3!/7! and ω_7 = π⁴/3.
    const double k8 = 1920.0 * std::sqrt(36.0 / 5040.0 * pi * pi * pi * pi / 6.0);
    CHECK(best_sobolev_sq_inv(DimensionSpec(8)) == doctest::Approx(k8).epsilon(1e-13));
}
