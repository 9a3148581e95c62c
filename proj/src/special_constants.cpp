#include "qcurv/special_constants.hpp"

#include "qcurv/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace qcurv {

DimensionSpec::DimensionSpec(int n)
    : n_(n)
{
    if (n < 5)
        throw DomainError("dimension must be >= 5 for the critical exponent 2n/(n-4) to exceed 2, got "
                          + std::to_string(n));
    critical_ = Rational::make(2L * n, n - 4L);
    omega_ = sphere_area(n);
}

namespace {

void require_convergent(double p, double q)
{
    if (!(q > -1.0) || !(p - q - 1.0 > 0.0))
        throw DomainError("beta integral I_p^q diverges: need q > -1 and p - q - 1 > 0 (p="
                          + std::to_string(p) + ", q=" + std::to_string(q) + ")");
}

} // namespace

double beta_integral(double p, double q)
{
    require_convergent(p, q);
    return std::exp(std::lgamma(q + 1.0) + std::lgamma(p - q - 1.0) - std::lgamma(p));
}

double beta_integral_quadrature(double p, double q)
{
    require_convergent(p, q);
    // t = s/(1-s): t^q (1+t)^{-p} dt = s^q (1-s)^{p-q-2} ds on [0,1).
    const double a = q;
    const double b = p - q - 2.0;
    auto integrand = [a, b](double s, double complement) {
        // complement = 1 - s evaluated without cancellation near s = 1
        const double one_minus = complement > 0 ? complement : 1.0 - s;
        return std::pow(s, a) * std::pow(one_minus, b);
    };
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    double error = 0;
    const double value = rule.integrate(integrand, 0.0, 1.0, 1e-15, &error);
    return value;
}

double beta_recursion_step(double p, double q, double prior)
{
    if (!(p - q - 2.0 > 0.0))
        throw DomainError("beta recursion needs p - q - 2 > 0 (p=" + std::to_string(p)
                          + ", q=" + std::to_string(q) + ")");
    return (q + 1.0) / (p - q - 2.0) * prior;
}

double sphere_area(int n)
{
    if (n < 2)
        throw DomainError("sphere_area needs n >= 2");
    const double half = 0.5 * n;
    return 2.0 * std::exp(half * std::log(std::numbers::pi) - std::lgamma(half));
}

double best_sobolev_sq_inv(const DimensionSpec& dim)
{
    const double n = dim.n();
    const double mass = beta_integral(n, 0.5 * n - 1.0) * dim.omega() / 2.0;
    return n * (n + 2.0) * (n - 2.0) * (n - 4.0) * std::pow(mass, 4.0 / n);
}

} // namespace qcurv
