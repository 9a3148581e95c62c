#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qcurv/errors.hpp"
#include "qcurv/quotient_minimizer.hpp"

#include <cmath>
#include <random>

using namespace qcurv;

namespace {

auto one = [](double) { return 1.0; };

std::shared_ptr<const HermiteMesh> mesh(int n, int elements)
{
    return std::make_shared<const HermiteMesh>(DimensionSpec(n), 1.0, elements);
}

HermiteField random_field(std::shared_ptr<const HermiteMesh> m, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double a = c(rng), b = c(rng), d = c(rng);
    return HermiteField::interpolate(m, [=](double r) {
        // (1 - r²)² (a + b r² + d cos 3r): clamped at r = 1 with zero slope at r = 0.
        const double s = 1 - r * r;
        const double g = a + b * r * r + d * std::cos(3 * r);
        const double gd = 2 * b * r - 3 * d * std::sin(3 * r);
        const double gdd = 2 * b - 9 * d * std::cos(3 * r);
        return Jet2{s * s * g, -4 * r * s * g + s * s * gd, (12 * r * r - 4) * g - 8 * r * s * gd + s * s * gdd};
    });
}

}

TEST_CASE("Hermite mesh bookkeeping")
{
    const HermiteMesh m(DimensionSpec(6), 1.0, 4);
    CHECK(m.dofs() == 7);
    CHECK(m.value_dof(0) == 0);
    CHECK(m.derivative_dof(0) == -1);
    CHECK(m.value_dof(4) == -1);
    CHECK(m.derivative_dof(4) == -1);
    const auto e0 = m.element_dofs(0);
    CHECK(e0 == std::array<int, 4>{0, -1, 1, 2});
    const auto e3 = m.element_dofs(3);
    CHECK(e3 == std::array<int, 4>{5, 6, -1, -1});
}

TEST_CASE("Hermite interpolation is exact for cubics")
{
    auto m = mesh(6, 8);
    auto u = HermiteField::interpolate(m, [](double r) {
        return Jet2{(1 - r) * (1 - r) * (1 + 2 * r), 6 * r * r - 6 * r, 12 * r - 6};
    });
    // (1-r)²(1+2r) has zero slope at 0 and vanishes to second order at 1.
    for (double r : {0.0, 0.13, 0.5, 0.77, 0.99}) {
        CHECK(u.value(r) == doctest::Approx((1 - r) * (1 - r) * (1 + 2 * r)));
        CHECK(u.evaluate(r).d2 == doctest::Approx(12 * r - 6));
    }
}

TEST_CASE("energy is an exact quadratic form")
{
    auto m = mesh(6, 64);
    const auto w = SingularWeightConfig::constant(1.5, 3.0, 1.0, 1.0, 0.05);
    CHECK(energy(HermiteField(m), w) == 0.0);
    const auto u = random_field(m, 1);
    std::vector<double> twice(u.coefficients().begin(), u.coefficients().end());
    for (double& x : twice)
        x *= 2;
    CHECK(energy(HermiteField(m, twice), w) == doctest::Approx(4 * energy(u, w)).epsilon(1e-14));
    CHECK(energy_form(*m, w).quadratic(u.coefficients()) == doctest::Approx(energy(u, w)).epsilon(1e-13));

    // Polarisation recovers the symmetric bilinear form.
    const auto v = random_field(m, 2);
    std::vector<double> sum(u.coefficients().begin(), u.coefficients().end());
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum[i] += v.coefficients()[i];
    const auto k = energy_form(*m, w);
    const auto kv = k.apply(v.coefficients());
    double uv = 0;
    for (std::size_t i = 0; i < kv.size(); ++i)
        uv += u.coefficients()[i] * kv[i];
    CHECK(energy(HermiteField(m, sum), w) == doctest::Approx(energy(u, w) + energy(v, w) + 2 * uv).epsilon(1e-10));
}

TEST_CASE("energy form is symmetric to machine precision")
{
    auto m = mesh(8, 32);
    const auto k = energy_form(*m, SingularWeightConfig::constant(2.0, 4.0, 1.0, 1.0, 0.1));
    double worst = 0, scale = 0;
    for (int i = 0; i < k.size(); ++i)
        for (int j = 0; j < k.size(); ++j) {
            worst = std::max(worst, std::abs(k.entry(i, j) - k.entry(j, i)));
            scale = std::max(scale, std::abs(k.entry(i, j)));
        }
    CHECK(worst <= 1e-15 * scale);
}

TEST_CASE("Hermite bubble energy matches the continuum bubble integral")
{
    auto m = mesh(6, 1024);
    const double eps = 0.05;
    const auto u = bubble_field(m, eps);
    const BubbleProfile b(DimensionSpec(6), eps, Cutoff{0.5, 1.0});
    const auto cont = bubble_energy(b, nullptr, one);
    CHECK(energy(u, SingularWeightConfig::flat()) == doctest::Approx(cont.bilap).epsilon(1e-6));
    CHECK(constraint_integral(u, one) == doctest::Approx(cont.f_mass).epsilon(1e-6));
    CHECK(quotient(u, SingularWeightConfig::flat(), one) == doctest::Approx(cont.quotient).epsilon(1e-6));
}

TEST_CASE("quotient is even and monotone in the potential")
{
    auto m = mesh(6, 128);
    const auto u = random_field(m, 3);
    std::vector<double> neg(u.coefficients().begin(), u.coefficients().end());
    for (double& x : neg)
        x = -x;
    const auto w = SingularWeightConfig::constant(1.5, 3.0, 1.0, 1.0, 0.05);
    CHECK(quotient(HermiteField(m, neg), w, one) == doctest::Approx(quotient(u, w, one)).epsilon(1e-14));
    const auto big_b = SingularWeightConfig::constant(0.0, 0.0, 0.0, 1e4, 0.05);
    CHECK(quotient(u, big_b, one) > quotient(u, SingularWeightConfig::flat(), one));
    CHECK_THROWS_AS(quotient(HermiteField(m), w, one), DomainError);
}

TEST_CASE("flat minimization descends monotonically onto the constraint")
{
    MinimizeOptions o;
    o.intervals = 511;
    auto w = SingularWeightConfig::flat();
    w.rho_min = 4e-3;
    const auto r = minimize(w, one, std::nullopt, o);
    CHECK(r.converged);
    CHECK(r.el_residual < o.tol);
    CHECK(r.constraint_defect < 1e-8);
    for (std::size_t i = 1; i < r.history.size(); ++i)
        CHECK(r.history[i] <= r.history[i - 1]);
    const auto init = bubble_field(r.minimizer.mesh_ptr(), 10 * w.rho_min);
    CHECK(r.quotient <= quotient(init, w, one) + 1e-6);
    CHECK(r.quotient == doctest::Approx(247.28445).epsilon(0.02));
    CHECK(el_residual(r.minimizer, w, one) == doctest::Approx(r.el_residual).epsilon(1e-6));
}

TEST_CASE("a large potential raises the minimum")
{
    MinimizeOptions o;
    o.intervals = 255;
    auto flat = SingularWeightConfig::flat();
    flat.rho_min = 0.01;
    auto heavy = SingularWeightConfig::constant(0.0, 0.0, 0.0, 1e3, 0.01);
    const double q0 = minimize(flat, one, std::nullopt, o).quotient;
    const double q1 = minimize(heavy, one, std::nullopt, o).quotient;
    CHECK(q1 > q0);
}

TEST_CASE("minimizer preconditions and divergence")
{
    MinimizeOptions o;
    o.intervals = 127;
    auto w = SingularWeightConfig::flat();
    w.rho_min = 1e-3;
    CHECK_THROWS_AS(minimize(w, one, std::nullopt, o), ConfigError);
    auto bad = SingularWeightConfig::constant(0.0, 0.0, 0.0, -1e6, 0.05);
    CHECK_THROWS_AS(minimize(bad, one, std::nullopt, o), DivergenceError);
    CHECK_THROWS_AS(SingularWeightConfig::constant(2.5, 3.0, 1.0, 1.0, 0.01).validate(), ConfigError);
    CHECK(SingularWeightConfig::constant(2.0, 3.0, 1.0, 1.0, 0.01).sharp());
}

TEST_CASE("weights are regularised at rho_min")
{
    const auto w = SingularWeightConfig::constant(2.0, 4.0, 3.0, 5.0, 0.1);
    CHECK(w.gradient_weight(0.01) == doctest::Approx(3.0 / 0.01));
    CHECK(w.gradient_weight(0.5) == doctest::Approx(3.0 / 0.25));
    CHECK(w.potential_weight(0.0) == doctest::Approx(5.0 / 1e-4));
}

TEST_CASE("continuation with inert weights gives identical quotients")
{
    MinimizeOptions o;
    o.intervals = 255;
    const auto base = SingularWeightConfig::constant(1.5, 3.0, 0.0, 0.0, 0.01);
    const auto c = sharp_continuation(base, {{1.5, 3.0}, {1.8, 3.6}}, one, DimensionSpec(6), o);
    REQUIRE(c.steps.size() == 2);
    for (const auto& s : c.steps)
        CHECK(s.result.quotient == doctest::Approx(c.sharp.quotient).epsilon(1e-9));
    CHECK(c.hypothesis_margin == doctest::Approx(1.0));
}

TEST_CASE("continuation checks its path and the sharp hypothesis")
{
    MinimizeOptions o;
    o.intervals = 255;
    const auto base = SingularWeightConfig::constant(1.5, 3.0, 1.0, 1.0, 0.01);
    CHECK_THROWS_AS(sharp_continuation(base, {}, one, DimensionSpec(6), o), ConfigError);
    CHECK_THROWS_AS(sharp_continuation(base, {{1.8, 3.6}, {1.5, 3.0}}, one, DimensionSpec(6), o), ConfigError);
    CHECK_THROWS_AS(sharp_continuation(base, {{2.1, 3.6}}, one, DimensionSpec(6), o), ConfigError);
    const auto negative = SingularWeightConfig::constant(1.5, 3.0, 1.0, -20.0, 0.01);
    CHECK_THROWS_AS(sharp_continuation(negative, {{1.5, 3.0}}, one, DimensionSpec(6), o), DivergenceError);
}

TEST_CASE("weighted constant estimates")
{
    const DimensionSpec six(6);
    CHECK(weighted_exponent(six, 0.0) == doctest::Approx(6.0));
    CHECK(weighted_exponent(six, -4.0) == doctest::Approx(2.0));
    const auto e = estimate_weighted_constant(six, 0.0);
    CHECK(e.p == doctest::Approx(6.0));
    CHECK(e.k_sq <= 1.0 / best_sobolev_sq_inv(six) * (1 + 1e-6));
    CHECK(e.k_sq == doctest::Approx(1.0 / best_sobolev_sq_inv(six)).epsilon(0.05));
    // Same seed, same answer.
    CHECK(estimate_weighted_constant(six, -2.0).k_sq == estimate_weighted_constant(six, -2.0).k_sq);
    WeightedConstantOptions wrong;
    wrong.p = 3.0;
    CHECK_THROWS_AS(estimate_weighted_constant(six, 0.0, wrong), ConfigError);
    CHECK_THROWS_AS(estimate_weighted_constant(six, -5.0), ConfigError);
}

TEST_CASE("doubling the mesh moves the flat quotient by less than half a percent")
{
    auto w = SingularWeightConfig::flat();
    w.rho_min = 2e-3;
    MinimizeOptions coarse, fine;
    coarse.intervals = 1023;
    fine.intervals = 2047;
    const double qc = minimize(w, one, std::nullopt, coarse).quotient;
    const double qf = minimize(w, one, std::nullopt, fine).quotient;
    CHECK(std::abs(qc - qf) / qf < 5e-3);
}
