#include "qcurv/bubble_expansion.hpp"

#include "qcurv/errors.hpp"
#include "qcurv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace qcurv {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

Jet2 product(const Jet2& a, const Jet2& b)
{
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

Jet2 quotient(const Jet2& a, const Jet2& b)
{
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
}

// f∘x given f, f', f'' at x.v.
Jet2 compose(double f, double f1, double f2, const Jet2& x)
{
    return {f, f1 * x.d1, f2 * x.d1 * x.d1 + f1 * x.d2};
}

// ψ(x) = exp(-1/x) for x > 0, else 0.
Jet2 psi(const Jet2& x)
{
    if (x.v <= 0)
        return {};
    const double g = std::exp(-1.0 / x.v);
    const double inv = 1.0 / x.v;
    return compose(g, g * inv * inv, g * (inv * inv * inv * inv - 2.0 * inv * inv * inv), x);
}

} // namespace

Jet2 Cutoff::evaluate(double r) const
{
    if (r <= start)
        return {1.0, 0.0, 0.0};
    if (r >= end)
        return {};
    const double w = end - start;
    const Jet2 x{(end - r) / w, -1.0 / w, 0.0};
    const Jet2 y{1.0 - x.v, -x.d1, -x.d2};
    const Jet2 a = psi(x);
    const Jet2 b = psi(y);
    return quotient(a, Jet2{a.v + b.v, a.d1 + b.d1, a.d2 + b.d2});
}

BubbleProfile::BubbleProfile(DimensionSpec dim, double epsilon, std::optional<Cutoff> cutoff)
    : BubbleProfile(dim, epsilon, cutoff, 0.5 * (dim.n() - 4.0))
{
}

BubbleProfile::BubbleProfile(DimensionSpec dim, double epsilon, std::optional<Cutoff> cutoff, double decay)
    : dim_(dim)
    , epsilon_(epsilon)
    , cutoff_(cutoff)
    , decay_(decay)
{
    if (!(epsilon > 0))
        throw ConfigError("bubble scale epsilon must be positive");
    if (cutoff && !(cutoff->start > 0 && cutoff->start < cutoff->end))
        throw ConfigError("cutoff needs 0 < start < end");
    if (!(decay > 0))
        throw ConfigError("profile decay exponent must be positive");
}

double BubbleProfile::support() const
{
    return cutoff_ ? cutoff_->end : std::numeric_limits<double>::infinity();
}

Jet2 BubbleProfile::evaluate(double r) const
{
    const double s = decay_;
    const double u = r * r + epsilon_ * epsilon_;
    const double g = std::pow(u, -s);
    const Jet2 core{g, -2.0 * s * r * g / u, -2.0 * s * g / u + 4.0 * s * (s + 1.0) * r * r * g / (u * u)};
    if (!cutoff_)
        return core;
    return product(cutoff_->evaluate(r), core);
}

double BubbleProfile::laplacian(double r) const
{
    const Jet2 j = evaluate(r);
    return -(j.d2 + (dim_.n() - 1.0) / r * j.d1);
}

namespace {

using Integrand = std::function<void(double r, const Jet2& phi, double lap, std::span<double> out)>;

std::vector<double> partition(const BubbleProfile& profile, int panels_per_decade, int cutoff_panels,
                              const std::vector<double>& extra)
{
    const double eps = profile.epsilon();
    const double lo = eps * 1e-5;
    const double hi = profile.cutoff() ? profile.support() : eps * 1e7;
    std::vector<double> b{0.0};
    b = merge_breaks(b, geometric_breaks(lo, hi, panels_per_decade));
    if (profile.cutoff())
        b = merge_breaks(b, uniform_breaks(profile.cutoff()->start, profile.cutoff()->end, cutoff_panels));
    std::vector<double> inside;
    for (double x : extra)
        if (x > lo && x < hi)
            inside.push_back(x);
    inside.push_back(std::min(eps, hi));
    return merge_breaks(b, inside);
}

std::vector<double> integrate_profile(const BubbleProfile& profile, const BubbleQuadrature& quad,
                                      std::size_t count, const Integrand& integrand,
                                      const std::vector<double>& extra_breaks = {})
{
    const double n = profile.dim().n();
    const double omega = profile.dim().omega();
    const double curvature = quad.curvature;
    auto run = [&](int density, int band) {
        PanelQuadrature rule(partition(profile, density, band, extra_breaks));
        return rule.integrate_many(
            [&](double r, std::span<double> out) {
                if (r <= 0) {
                    std::fill(out.begin(), out.end(), 0.0);
                    return;
                }
                const Jet2 phi = profile.evaluate(r);
                const double lap = -(phi.d2 + (n - 1.0) / r * phi.d1);
                integrand(r, phi, lap, out);
                const double measure = omega * std::pow(r, n - 1.0) * (1.0 - curvature * r * r / (6.0 * n));
                for (double& x : out)
                    x *= measure;
            },
            count);
    };
    const auto coarse = run(quad.panels_per_decade, quad.cutoff_panels);
    const auto fine = run(2 * quad.panels_per_decade, 2 * quad.cutoff_panels);
    for (std::size_t k = 0; k < count; ++k) {
        const double scale = std::max(std::abs(fine[k]), 1e-300);
        if (!std::isfinite(fine[k]) || std::abs(fine[k] - coarse[k]) > quad.refinement_tolerance * scale)
            throw ResolutionError("bubble quadrature not resolved: integral " + std::to_string(k)
                                  + " changed from " + std::to_string(coarse[k]) + " to "
                                  + std::to_string(fine[k]) + " under refinement");
    }
    return fine;
}

} // namespace

BubbleEnergy bubble_energy(const BubbleProfile& profile, const SingularWeightConfig* weights,
                           const std::function<double(double)>& f, const BubbleQuadrature& quad)
{
    if (quad.panels_per_decade * PanelQuadrature::points_per_panel < 64)
        throw ConfigError("bubble quadrature needs at least 64 nodes per decade");
    const double big_n = profile.dim().N();
    std::vector<double> extra;
    if (weights)
        extra.push_back(weights->rho_min);
    const auto v = integrate_profile(
        profile, quad, 4,
        [&](double r, const Jet2& phi, double lap, std::span<double> out) {
            out[0] = lap * lap;
            out[1] = weights ? weights->gradient_weight(r) * phi.d1 * phi.d1 : 0.0;
            out[2] = weights ? weights->potential_weight(r) * phi.v * phi.v : 0.0;
            out[3] = f(r) * std::pow(std::abs(phi.v), big_n);
        },
        extra);
    BubbleEnergy e{v[0], v[1], v[2], v[3], 0.0, 0.0};
    e.norm_sq = std::pow(e.f_mass, 2.0 / big_n);
    e.quotient = (e.bilap + e.grad_weighted + e.pot_weighted) / e.norm_sq;
    return e;
}

GiraudMass giraud_mass(const BubbleProfile& profile, const SingularWeightConfig& weights, double p,
                       const BubbleQuadrature& quad)
{
    const double n = profile.dim().n();
    if (!(p > n / 4.0))
        throw ConfigError("Hölder exponent p must exceed n/4");
    const double q = 2.0 * p / (p - 1.0);
    const auto v = integrate_profile(
        profile, quad, 3,
        [&](double r, const Jet2& phi, double, std::span<double> out) {
            out[0] = weights.gradient_weight(r) * phi.d1 * phi.d1;
            out[1] = std::pow(std::abs(phi.d1), q);
            out[2] = std::pow(std::abs(phi.v), q);
        },
        {weights.rho_min});
    const double holder = 1.0 - 1.0 / p;
    return {v[0], v[1], std::pow(v[1], holder), v[2], std::pow(v[2], holder)};
}

MassExponents mass_exponents(int n, double p)
{
    const double m = n;
    return {-(m - 4.0), -(m - 4.0) + 2.0 + (m - 4.0) / p, m * (p - 1.0) / p - 2.0 * (m - 3.0),
            -2.0 * (m - 4.0) + m * (p - 1.0) / p};
}

namespace {

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& values)
{
    std::vector<double> x, y;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        x.push_back(std::log(eps[i]));
        y.push_back(std::log(values[i]));
    }
    const auto fit = fit_linear(x, y);
    return fit.c1;
}

} // namespace

std::vector<SlopeCheck> mass_scaling(const DimensionSpec& dim, double p, const std::vector<double>& epsilons,
                                     std::optional<Cutoff> cutoff, double tolerance, const BubbleQuadrature& quad)
{
    if (epsilons.size() < 2)
        throw ConfigError("slope regression needs at least two epsilons");
    const auto ex = mass_exponents(dim.n(), p);
    const auto unit = SingularWeightConfig::constant(0.0, 0.0, 1.0, 0.0, 1e-12);
    std::vector<double> bilap, bprime, c;
    for (double eps : epsilons) {
        const BubbleProfile profile(dim, eps, cutoff);
        const auto e = bubble_energy(profile, nullptr, [](double) { return 1.0; }, quad);
        const auto g = giraud_mass(profile, unit, p, quad);
        bilap.push_back(e.bilap);
        bprime.push_back(g.Bprime_pow);
        c.push_back(g.C);
    }
    auto check = [&](std::string name, const std::vector<double>& values, double predicted, double derived) {
        const double slope = loglog_slope(epsilons, values);
        return SlopeCheck{std::move(name), slope, predicted, derived, std::abs(slope - predicted) <= tolerance};
    };
    return {check("bilap", bilap, ex.bilap, ex.bilap),
            check("Bprime_pow", bprime, ex.bprime_printed, ex.bprime_derived),
            check("C", c, ex.c, ex.c)};
}

const char* to_string(ExpansionTerm t)
{
    switch (t) {
    case ExpansionTerm::B_gradient: return "B_gradient";
    case ExpansionTerm::Bprime: return "Bprime";
    case ExpansionTerm::C_potential: return "C_potential";
    case ExpansionTerm::f_mass: return "f_mass";
    case ExpansionTerm::bilaplacian_energy: return "bilaplacian_energy";
    case ExpansionTerm::quotient: return "quotient";
    }
    return "unknown";
}

std::vector<double> default_epsilons(double delta)
{
    return {0.04 * delta, 0.028 * delta, 0.02 * delta, 0.014 * delta, 0.01 * delta};
}

BasisFit fit_basis(const std::vector<std::vector<double>>& basis, const std::vector<double>& y)
{
    const std::size_t k = basis.size();
    const std::size_t m = y.size();
    if (k == 0 || m < k)
        throw ConfigError("fit needs at least as many points as basis functions");
    for (const auto& col : basis)
        if (col.size() != m)
            throw ConfigError("fit basis columns must match the data length");
    // Normal equations with Gaussian elimination (k is 2 or 3 here).
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t r = 0; r < m; ++r)
                a[i][j] += basis[i][r] * basis[j][r];
        for (std::size_t r = 0; r < m; ++r)
            a[i][k] += basis[i][r] * y[r];
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                piv = r;
        std::swap(a[c], a[piv]);
        if (a[c][c] == 0.0)
            throw NumericalError("degenerate fit basis");
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c)
                continue;
            const double factor = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= k; ++j)
                a[r][j] -= factor * a[c][j];
        }
    }
    BasisFit fit{std::vector<double>(k), 0.0};
    for (std::size_t i = 0; i < k; ++i)
        fit.coefficients[i] = a[i][k] / a[i][i];
    for (std::size_t r = 0; r < m; ++r) {
        double model = 0;
        for (std::size_t i = 0; i < k; ++i)
            model += fit.coefficients[i] * basis[i][r];
        fit.residual = std::max(fit.residual, std::abs(model - y[r]) / std::max(std::abs(y[r]), 1e-300));
    }
    return fit;
}

LinearFit fit_linear(const std::vector<double>& g, const std::vector<double>& y)
{
    if (g.size() < 2)
        throw ConfigError("linear fit needs at least two matching points");
    const auto fit = fit_basis({std::vector<double>(g.size(), 1.0), g}, y);
    return {fit.coefficients[0], fit.coefficients[1], fit.residual};
}

namespace {

// Relative ε² correction produced by the measure factor (1 - S r²/(6n)) on an
// integral whose t-form is ∫ t^q (1+t)^{-p} dt, or NaN if it does not converge.
double measure_correction(double n, double curvature, double p, double q)
{
    if (curvature == 0.0)
        return 0.0;
    if (!(p - q - 2.0 > 0.0))
        return nan_value;
    return -curvature / (6.0 * n) * beta_integral(p, q + 1.0) / beta_integral(p, q);
}

double safe_beta(double p, double q)
{
    return (q > -1.0 && p - q - 1.0 > 0.0) ? beta_integral(p, q) : nan_value;
}

} // namespace

ExpansionReportSet verify_expansion(const DimensionSpec& dim, const FModel& f_model, double curvature,
                                    const std::vector<double>& epsilons, const ExpansionOptions& opts)
{
    if (!dim.theorem_grade())
        throw ConfigError("bubble expansion needs n >= 6");
    if (epsilons.size() < 3)
        throw ConfigError("expansion fit needs at least three epsilons");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw ConfigError("epsilons must be strictly decreasing");
    if (!(f_model.f_p > 0))
        throw ConfigError("f(P) must be positive");

    const int ni = dim.n();
    const double n = ni;
    const double big_n = dim.N();
    const double omega = dim.omega();
    const double p = opts.p;
    const double q = 2.0 * p / (p - 1.0);
    const Cutoff cutoff{opts.cutoff_fraction * opts.delta, opts.delta};
    if (f_model(ni, opts.delta) <= 0)
        throw ConfigError("f model must stay positive on the support");
    BubbleQuadrature quad = opts.quadrature;
    quad.curvature = curvature;

    const std::function<double(double)> f = [&](double r) { return f_model(ni, r); };
    std::vector<double> bilap, grad, pot, mass, bprime, quot;
    for (double eps : epsilons) {
        const BubbleProfile profile(dim, eps, cutoff);
        const auto v = integrate_profile(profile, quad, 5,
                                         [&](double r, const Jet2& phi, double lap, std::span<double> out) {
                                             out[0] = lap * lap;
                                             out[1] = phi.d1 * phi.d1;
                                             out[2] = phi.v * phi.v;
                                             out[3] = f(r) * std::pow(std::abs(phi.v), big_n);
                                             out[4] = std::pow(std::abs(phi.d1), q);
                                         });
        bilap.push_back(v[0]);
        grad.push_back(v[1]);
        pot.push_back(v[2]);
        mass.push_back(v[3]);
        bprime.push_back(v[4]);
        quot.push_back(v[0] / std::pow(v[3], 2.0 / big_n));
    }

    ExpansionReportSet set{};
    const bool log_case = ni == 6;
    std::vector<double> g2, glog;
    for (double e : epsilons) {
        g2.push_back(e * e);
        glog.push_back(e * e * std::log(1.0 / (e * e)));
    }

    const double i_main = beta_integral(n, 0.5 * n - 1.0);
    auto measure = [&](ExpansionTerm term, double scale, double lead, double corr, std::string order,
                       const std::vector<double>& values, const std::vector<double>& g) {
        std::vector<double> y;
        for (std::size_t i = 0; i < values.size(); ++i)
            y.push_back(values[i] * std::pow(epsilons[i], -scale));
        std::vector<std::vector<double>> basis{std::vector<double>(values.size(), 1.0), g};
        if (log_case && &g == &glog)
            basis.push_back(g2);
        const auto fit = fit_basis(basis, y);
        const double c0 = fit.coefficients[0];
        set.reports.push_back({term, scale, lead, c0, corr, fit.coefficients[1] / c0, std::move(order), epsilons, values});
    };

    // ∫ f φ^N: leading ω I_n^{n/2-1}/2 f(P) ε^{-n}, relative ε² correction -(Δf/(2f) + S/6)/(n-2).
    measure(ExpansionTerm::f_mass, -n, omega * i_main / 2.0 * f_model.f_p,
            -(f_model.lap_f / (2.0 * f_model.f_p) + curvature / 6.0) / (n - 2.0), "2", mass, g2);

    // ∫ (Δφ)²: leading ω n(n-4)(n²-4)/2 I ε^{-(n-4)}.
    const double consolidated = (n * n + 4.0 * n - 20.0) / (6.0 * (n - 6.0) * (n * n - 4.0));
    const double componentwise = (n * n + 4.0) * (n - 4.0) / (6.0 * (n - 6.0) * n * (n * n - 4.0))
        + 4.0 * (n - 1.0) / (3.0 * n * (n - 6.0) * (n + 2.0));
    set.bilap_curvature_consolidated = log_case ? nan_value : consolidated;
    set.bilap_curvature_componentwise = log_case ? nan_value : componentwise;
    if (!log_case && std::abs(consolidated - componentwise) > 1e-12 * std::abs(consolidated))
        set.warnings.push_back("bubble_expansion.verify_expansion: componentwise bilaplacian curvature "
                               "coefficient differs from the consolidated one");
    measure(ExpansionTerm::bilaplacian_energy, -(n - 4.0), omega * n * (n - 4.0) * (n * n - 4.0) / 2.0 * i_main,
            log_case ? nan_value : -curvature * consolidated, log_case ? "log" : "2", bilap,
            log_case ? glog : g2);

    // ∫ |∇φ|² = (n-4)² ω/2 I_{n-2}^{n/2} ε^{6-n} (n > 6).
    measure(ExpansionTerm::B_gradient, 6.0 - n, (n - 4.0) * (n - 4.0) * omega / 2.0 * safe_beta(n - 2.0, 0.5 * n),
            measure_correction(n, curvature, n - 2.0, 0.5 * n), "2", grad, g2);

    // ∫ φ² = ω/2 I_{n-4}^{n/2-1} ε^{8-n} (n > 8).
    measure(ExpansionTerm::C_potential, 8.0 - n, omega / 2.0 * safe_beta(n - 4.0, 0.5 * n - 1.0),
            measure_correction(n, curvature, n - 4.0, 0.5 * n - 1.0), "2", pot, g2);

    // ∫ |∇φ|^q = (n-4)^q ω/2 I_{(n-2)q/2}^{(q+n-2)/2} ε^{n-(n-3)q}.
    const double bp = 0.5 * (n - 2.0) * q;
    const double bq = 0.5 * (q + n - 2.0);
    measure(ExpansionTerm::Bprime, n - (n - 3.0) * q, std::pow(n - 4.0, q) * omega / 2.0 * safe_beta(bp, bq),
            measure_correction(n, curvature, bp, bq), "2", bprime, g2);
    const auto ex = mass_exponents(ni, p);
    set.warnings.push_back("bubble_expansion.verify_expansion: printed B' scaling eps^(-n+4+2p/(p-1)) = eps^"
                           + std::to_string(-n + 4.0 + q) + " and coefficient without the 1/2 Jacobian "
                           "disagree with the substitution r = eps*sqrt(t), which gives eps^"
                           + std::to_string(n - (n - 3.0) * q) + "; B'^(1-1/p) exponent printed "
                           + std::to_string(ex.bprime_printed) + " vs derived " + std::to_string(ex.bprime_derived));

    // Quotient.
    const double k_inv = best_sobolev_sq_inv(dim);
    set.c0_predicted = k_inv * std::pow(f_model.f_p, -2.0 / big_n);
    const double ratio = f_model.lap_f / f_model.f_p;
    if (log_case) {
        set.c1_predicted = -4.0 * std::pow(omega / 2.0, 0.75) * std::pow(f_model.f_p * i_main, -1.0 / 3.0)
            * curvature / 3.0;
        set.c1_recombined = set.c1_predicted;
    } else {
        set.c1_predicted = -set.c0_predicted * (consolidated * curvature - (n - 4.0) / (2.0 * n * (n - 2.0)) * ratio);
        set.c1_recombined = set.c0_predicted
            * (-consolidated * curvature + (n - 4.0) / (n * (n - 2.0)) * (ratio / 2.0 + curvature / 6.0));
        if (std::abs(set.c1_predicted - set.c1_recombined) > 1e-12 * std::max(std::abs(set.c1_predicted), 1.0))
            set.warnings.push_back("bubble_expansion.verify_expansion: consolidated quotient correction "
                                   + std::to_string(set.c1_predicted)
                                   + " drops the S_g/6 term of the norm expansion; recombined value "
                                   + std::to_string(set.c1_recombined));
    }
    set.c1_predicted_sign = set.c1_predicted > 0 ? 1 : (set.c1_predicted < 0 ? -1 : 0);

    // Quotient: absolute coefficients; for n = 6 the plain ε² column absorbs the
    // cutoff contribution so that c₁ isolates the logarithmic term.
    std::vector<std::vector<double>> basis{std::vector<double>(epsilons.size(), 1.0), log_case ? glog : g2};
    if (log_case)
        basis.push_back(g2);
    const auto qfit = fit_basis(basis, quot);
    set.c0 = qfit.coefficients[0];
    set.c1 = qfit.coefficients[1];
    set.c2 = log_case ? qfit.coefficients[2] : 0.0;
    set.fit_residual = qfit.residual;
    set.reports.push_back({ExpansionTerm::quotient, 0.0, set.c0_predicted, set.c0, set.c1_predicted, set.c1,
                           log_case ? "log" : "2", epsilons, quot});
    if (qfit.residual > opts.fit_tolerance)
        throw NumericalError("quotient fit residual " + std::to_string(qfit.residual)
                             + " exceeds tolerance; widen or refine the epsilon range");
    return set;
}

} // namespace qcurv
