#include "qcurv/regularity.hpp"

#include "qcurv/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

namespace qcurv {

const char* to_string(DecayRegime r)
{
    switch (r) {
    case DecayRegime::power: return "power";
    case DecayRegime::log: return "log";
    case DecayRegime::bounded: return "bounded";
    }
    return "unknown";
}

namespace {

void require_exponents(int n, double p)
{
    if (n < 5)
        throw DomainError("kernel bookkeeping needs n >= 5");
    if (!(p > n / 4.0))
        throw DomainError("integrability exponent p must exceed n/4");
}

} // namespace

KernelIterate giraud_classify(int n, double p, int j)
{
    require_exponents(n, p);
    if (j < 0)
        throw DomainError("iterate index must be non-negative");
    // (j+1)p/(p+j) vs n/4, cross-multiplied.
    const double lhs = 4.0 * (j + 1.0) * p;
    const double rhs = n * (p + j);
    DecayRegime regime = DecayRegime::bounded;
    if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs))
        regime = DecayRegime::log;
    else if (lhs < rhs)
        regime = DecayRegime::power;
    const double exponent = (j + 1.0) * (4.0 - n) + j * n * (1.0 - 1.0 / p);
    return {j, n, p, regime, exponent};
}

int first_bounded_iterate(int n, double p)
{
    require_exponents(n, p);
    const double bound = p * (n - 4.0) / (4.0 * p - n);
    const int start = std::max(0, static_cast<int>(std::floor(bound)) - 1);
    for (int j = start; j <= start + 4; ++j)
        if (giraud_classify(n, p, j).regime == DecayRegime::bounded)
            return j;
    throw NumericalError("no bounded iterate found near the closed-form bound");
}

double kato_stummel_exponent(int n, double p, int j)
{
    return (j + 1.0) * (n - 4.0) - j * n * (1.0 - 1.0 / p);
}

namespace {

// ∫₀^t |f(r)| r^{n-1-l} dr by tanh-sinh (tolerates the endpoint singularity).
double centred_integral(const std::function<double(double)>& density, double n, double l, double t,
                        double tolerance, double* error)
{
    thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
    auto g = [&](double r) { return r <= 0 ? 0.0 : std::abs(density(r)) * std::pow(r, n - 1.0 - l); };
    double l1 = 0;
    return rule.integrate(g, 0.0, t, tolerance, error, &l1);
}

// Off-centre value at distance d from the centre: ω_{n-2} ∫ r^{n-1}|f(r)| ∫₀^π sin^{n-2}θ
// (r² + d² - 2rd cosθ)^{-l/2} dθ dr.
double offset_integral(const std::function<double(double)>& density, int n, double l, double t, double d)
{
    thread_local boost::math::quadrature::tanh_sinh<double> rule(10);
    const double omega_lower = sphere_area(n - 1);
    auto angular = [&](double r) {
        // Evaluated in logs: near θ = 0 with r = d both factors under/overflow.
        auto g = [&](double th) {
            const double s = std::sin(th);
            if (!(s > 0))
                return 0.0;
            const double half = std::sin(0.5 * th);
            const double dist2 = std::max((r - d) * (r - d) + 4.0 * r * d * half * half, 1e-300);
            return std::exp((n - 2.0) * std::log(s) - 0.5 * l * std::log(dist2));
        };
        return rule.integrate(g, 0.0, M_PI, 1e-9);
    };
    auto radial = [&](double r) { return r <= 0 ? 0.0 : std::pow(r, n - 1.0) * std::abs(density(r)) * angular(r); };
    if (d > 0 && d < t)
        return omega_lower * (rule.integrate(radial, 0.0, d, 1e-8) + rule.integrate(radial, d, t, 1e-8));
    return omega_lower * rule.integrate(radial, 0.0, t, 1e-8);
}

} // namespace

KatoStummelResult kato_stummel_phi(const KatoStummelQuery& query, const DimensionSpec& dim)
{
    const double n = dim.n();
    if (!(query.l < n))
        throw DomainError("kernel exponent l must be < n for the radial integral to converge");
    if (!(query.t > 0))
        throw DomainError("Kato-Stummel radius t must be positive");

    auto phi_at = [&](double t) {
        double err_coarse = 0, err_fine = 0, coarse = 0, fine = 0;
        try {
            coarse = centred_integral(query.density, n, query.l, t, 1e-6, &err_coarse);
            fine = centred_integral(query.density, n, query.l, t, 1e-10, &err_fine);
        } catch (const std::exception&) {
            // Boost reports a non-finite integrand value near the origin as an evaluation error.
            fine = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(fine) || !std::isfinite(coarse)
            || std::abs(fine - coarse) > 1e-3 * std::max(std::abs(fine), 1e-300)
            || err_fine > 1e-3 * std::max(std::abs(fine), 1e-300))
            throw ResolutionError("Kato-Stummel integral does not converge under refinement "
                                  "(density not integrable against the kernel)");
        double value = dim.omega() * fine;
        if (!query.monotone) {
            for (int k = 1; k <= 8; ++k)
                value = std::max(value, offset_integral(query.density, dim.n(), query.l, t, t * k / 8.0));
        }
        return value;
    };

    KatoStummelResult res{};
    res.phi = phi_at(query.t);
    bool decreasing = true;
    double t = query.t;
    double prev = res.phi;
    for (int k = 0; k < 12; ++k) {
        const double v = k == 0 ? res.phi : phi_at(t);
        res.decay_t.push_back(t);
        res.decay.push_back(v);
        if (k > 0 && v > prev)
            decreasing = false;
        prev = v;
        t *= 0.5;
    }
    res.decreasing_to_zero = decreasing && res.decay.back() < 1e-2 * std::max(res.decay.front(), 1e-300);
    return res;
}

RegularityClass regularity_class(int n, double p)
{
    require_exponents(n, p);
    const double ratio = p / n;
    const double fraction = ratio - std::floor(ratio);
    const double exponent = 3.0 - fraction;
    RegularityClass rc{};
    rc.exponent = exponent;
    rc.k = static_cast<int>(std::floor(exponent));
    rc.fraction = exponent - rc.k;
    rc.beta_lo = 0.0;
    rc.beta_hi = 1.0 - fraction;
    return rc;
}

} // namespace qcurv
