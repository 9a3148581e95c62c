#include "qcurv/conformal_geometry.hpp"

#include "qcurv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcurv {

ConformalFactor::ConformalFactor(double alpha, int n)
    : alpha_(alpha)
    , n_(n)
{
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ConfigError("conformal exponent alpha must lie in (1, 2)");
    if (n < 6)
        throw ConfigError("conformal factor requires n >= 6");
}

PowerSum ConformalFactor::log_a() const
{
    return PowerSum::monomial(n_, -1.0, 2.0 - alpha_);
}

LogFactorCalculus log_factor_calculus(const ConformalFactor& cf)
{
    const double half_n = 0.5 * cf.n();
    LogFactorCalculus c{cf.log_a(), PowerSum(cf.n()), PowerSum(cf.n()), PowerSum(cf.n()),
                        PowerSum(cf.n()), PowerSum(cf.n()), PowerSum(cf.n())};
    c.lap_log_a = laplacian(c.log_a);
    c.bilap_log_a = bilaplacian(c.log_a);
    c.grad_sq_log_a = grad_sq(c.log_a);
    c.lap_grad_sq_log_a = laplacian(c.grad_sq_log_a);
    c.second_order = -c.lap_log_a + half_n * c.grad_sq_log_a;
    c.fourth_order = -c.bilap_log_a + half_n * c.lap_grad_sq_log_a;
    return c;
}

PowerSum scalar_curvature(const ConformalFactor& cf)
{
    return (-0.5 * cf.n()) * log_factor_calculus(cf).second_order;
}

PaneitzConstants paneitz_constants(int n)
{
    const double m = n;
    const double n1 = m - 1.0;
    const double n2 = m - 2.0;
    PaneitzConstants c{};
    c.alpha_scale = ((m + 2.0) * n2 * n2 + 4.0) / (4.0 * n1 * n2);
    c.beta_square = m * (std::pow(m, 4) - 4.0 * std::pow(m, 3) - 16.0 * m * m + 48.0 * m - 32.0)
        * (m - 4.0) / (64.0 * n1 * n1 * n2 * n2);
    c.a_n = 4.0 * (std::pow(m, 5) - std::pow(m, 4) - 18.0 * std::pow(m, 3) + 48.0 * m * m - 56.0 * m + 36.0)
        / (16.0 * n1 * n1 * n2 * n2);
    c.b_n = m * (m - 4.0) / (8.0 * n1);
    return c;
}

PaneitzCoefficients paneitz_coefficients(const ConformalFactor& cf)
{
    const auto calc = log_factor_calculus(cf);
    const auto k = paneitz_constants(cf.n());
    const PowerSum& x = calc.second_order;
    const PowerSum& y = calc.fourth_order;
    const PowerSum x2 = x * x;

    PaneitzCoefficients p{(-k.alpha_scale) * x,
                          (-k.b_n) * y + k.beta_square * x2,
                          PowerSum(cf.n()),
                          k.a_n * x2 + (4.0 * k.b_n) * y,
                          k.a_n * x2 + k.b_n * y,
                          k};
    p.discriminant = p.alpha_tilde * p.alpha_tilde - 4.0 * p.beta_tilde;
    return p;
}

double threshold_rho1(double alpha, int n)
{
    const double ratio = alpha * (n - alpha) * (n - 2.0 - alpha)
        / ((2.0 - alpha) * (alpha - 1.0) * n * (n - 2.0 * alpha));
    return std::pow(ratio, 1.0 / (2.0 - alpha));
}

double threshold_rho2(double alpha, int n)
{
    return std::pow(2.0 * (n - alpha) / (n * (2.0 - alpha)), 1.0 / (2.0 - alpha));
}

double threshold_rho3_printed(double alpha, int n)
{
    const auto k = paneitz_constants(n);
    const double num = alpha * (2.0 - alpha) * (n - alpha) * (n - 2.0 - alpha) * k.a_n;
    const double den = k.b_n + (alpha - 1.0) * (2.0 - alpha) * (2.0 - alpha) * n * (n - 2.0 - alpha) * k.a_n;
    return std::pow(num / den, 1.0 / (2.0 - alpha));
}

namespace {

bool close(double a, double b)
{
    return std::abs(a - b) <= 1e-10 * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Root of c1 ρ^{e1} + c2 ρ^{e2} (two-term sum) on (0, ∞), or NaN.
double two_term_root(const PowerSum& s)
{
    if (s.terms().size() != 2)
        return std::numeric_limits<double>::quiet_NaN();
    const auto a = s.terms()[0];
    const auto b = s.terms()[1];
    const double ratio = -a.coefficient / b.coefficient;
    if (!(ratio > 0))
        return std::numeric_limits<double>::quiet_NaN();
    return std::pow(ratio, 1.0 / (b.exponent - a.exponent));
}

// First sign change of `s` on a log scan of [lo, hi], refined by bisection.
double first_root(const PowerSum& s, double lo, double hi)
{
    const int steps = 4000;
    double prev_r = lo;
    double prev = s(lo);
    for (int i = 1; i <= steps; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / steps);
        const double v = s(r);
        if ((prev < 0) != (v < 0)) {
            double a = prev_r, b = r;
            for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
                const double mid = std::sqrt(a * b);
                if ((s(mid) < 0) == (prev < 0))
                    a = mid;
                else
                    b = mid;
            }
            return 0.5 * (a + b);
        }
        prev = v;
        prev_r = r;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

SignCheck sample_sign(const std::string& name, const PowerSum& s, double upper, bool want_positive)
{
    const int count = 4000;
    const double lo = upper * 1e-6;
    const double hi = upper * (1.0 - 1e-9);
    double worst = want_positive ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    bool holds = true;
    for (int i = 0; i < count; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
        const double v = s(r);
        if (want_positive) {
            worst = std::min(worst, v);
            holds = holds && v > 0;
        } else {
            worst = std::max(worst, v);
            holds = holds && v < 0;
        }
    }
    return {name, upper, holds, worst};
}

} // namespace

std::vector<CoefficientAudit> audit_printed_coefficients(const ConformalFactor& cf)
{
    const double a = cf.alpha();
    const double n = cf.n();
    const auto calc = log_factor_calculus(cf);
    const auto pc = paneitz_coefficients(cf);
    const auto& k = pc.constants;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<CoefficientAudit> rows;
    auto add = [&](std::string q, double e, double printed, double derived) {
        rows.push_back({std::move(q), e, printed, derived, close(printed, derived)});
    };

    add("grad_sq_log_a", 2.0 - 2.0 * a, (2.0 - a) * (2.0 - a), calc.grad_sq_log_a.coefficient_of(2.0 - 2.0 * a));
    add("bilap_log_a", -a - 2.0, -a * (2.0 - a) * (n - a) * (n - 2.0 - a),
        calc.bilap_log_a.coefficient_of(-a - 2.0));
    add("lap_grad_sq_log_a", -2.0 * a, 2.0 * (2.0 - a) * (2.0 - a) * (a - 1.0) * (n - 2.0 - a),
        calc.lap_grad_sq_log_a.coefficient_of(-2.0 * a));
    add("fourth_order_bracket", -a - 2.0, -(2.0 - a) * a * (n - a) * (n - 2.0 - a),
        calc.fourth_order.coefficient_of(-a - 2.0));
    add("fourth_order_bracket", -2.0 * a, (2.0 - a) * (2.0 - a) * (a - 1.0) * n * (n - 2.0 * a),
        calc.fourth_order.coefficient_of(-2.0 * a));
    add("a_n", nan, k.a_n, k.alpha_scale * k.alpha_scale - 4.0 * k.beta_square);
    add("discriminant_fourth_order_factor", nan, k.b_n, 4.0 * k.b_n);
    add("rho1", nan, threshold_rho1(a, cf.n()), two_term_root(calc.fourth_order));
    add("rho2", nan, threshold_rho2(a, cf.n()), two_term_root(calc.second_order));
    const double r3 = first_root(pc.discriminant, 1e-8, 1e12);
    add("rho3", nan, threshold_rho3_printed(a, cf.n()), r3);
    return rows;
}

std::vector<DerivativeAudit> audit_derivatives(const ConformalFactor& cf,
                                               std::span<const RadialSample> samples, double tolerance)
{
    const int n = cf.n();
    const double half_n = 0.5 * n;
    const auto calc = log_factor_calculus(cf);
    const auto pc = paneitz_coefficients(cf);
    const auto& k = pc.constants;
    const PowerSum log_a = calc.log_a;
    const RadialFunction f = [log_a](double r) { return log_a(r); };

    std::vector<DerivativeAudit> out;
    auto push = [&](std::string name, const PowerSum& sym, RadialOperator op, const PowerSum& arg) {
        out.push_back({std::move(name), sym, oracle_check(arg, sym, op, samples, tolerance)});
    };
    push("lap_log_a", calc.lap_log_a, RadialOperator::laplacian, log_a);
    push("bilap_log_a", calc.bilap_log_a, RadialOperator::bilaplacian, log_a);
    push("grad_sq_log_a", calc.grad_sq_log_a, RadialOperator::grad_sq, log_a);

    // Everything below is assembled from finite differences of log A alone.
    using WidthOracle = std::function<double(double, double)>;
    auto x_fd = [&](double r, double w) {
        return -fd_laplacian(f, n, r, w) + half_n * std::pow(fd_first(f, r, w), 2);
    };
    auto lap_grad_sq_fd = [&](double r, double w) {
        const RadialFunction g = [&](double q) { return std::pow(fd_first(f, q, w / 4.0), 2); };
        return fd_laplacian(g, n, r, w);
    };
    auto y_fd = [&](double r, double w) { return -fd_bilaplacian(f, n, r, w) + half_n * lap_grad_sq_fd(r, w); };
    auto beta_fd = [&](double r, double w) { return -k.b_n * y_fd(r, w) + k.beta_square * std::pow(x_fd(r, w), 2); };

    auto composite = [&](std::string name, const PowerSum& sym, const WidthOracle& oracle, double order) {
        OracleReport total;
        total.tolerance = tolerance;
        for (const auto& s : samples) {
            const RadialSample one[] = {s};
            const RadialFunction bound = [&](double r) { return oracle(r, s.stencil_width); };
            const RadialFunction scale = [&](double r) { return std::abs(log_a(r)) * std::pow(r, -order); };
            const auto part = compare_to_oracle(sym, bound, scale, one, tolerance);
            total.rows.insert(total.rows.end(), part.rows.begin(), part.rows.end());
            total.max_deviation = std::max(total.max_deviation, part.max_deviation);
        }
        total.pass = total.max_deviation < tolerance;
        out.push_back({std::move(name), sym, std::move(total)});
    };

    composite("lap_grad_sq_log_a", calc.lap_grad_sq_log_a, lap_grad_sq_fd, 4.0);
    composite("fourth_order_bracket", calc.fourth_order, y_fd, 4.0);
    composite("scalar_curvature", (-half_n) * calc.second_order,
              [&](double r, double w) { return -half_n * x_fd(r, w); }, 2.0);
    composite("alpha_tilde", pc.alpha_tilde, [&](double r, double w) { return -k.alpha_scale * x_fd(r, w); },
              2.0);
    composite("beta_tilde", pc.beta_tilde, beta_fd, 4.0);
    composite("discriminant", pc.discriminant,
              [&](double r, double w) {
                  const double at = -k.alpha_scale * x_fd(r, w);
                  return at * at - 4.0 * beta_fd(r, w);
              },
              4.0);
    composite("lap_alpha_tilde", laplacian(pc.alpha_tilde),
              [&](double r, double w) {
                  const RadialFunction at = [&](double q) { return -k.alpha_scale * x_fd(q, w / 4.0); };
                  return fd_laplacian(at, n, r, w);
              },
              4.0);
    return out;
}

Thresholds thresholds(const ConformalFactor& cf)
{
    const auto calc = log_factor_calculus(cf);
    const auto pc = paneitz_coefficients(cf);
    Thresholds t{};
    t.rho1 = threshold_rho1(cf.alpha(), cf.n());
    t.rho2 = threshold_rho2(cf.alpha(), cf.n());
    t.rho3_printed = threshold_rho3_printed(cf.alpha(), cf.n());
    t.rho3 = first_root(pc.discriminant, 1e-8, 1e12);
    if (!(t.rho1 > 0) || !(t.rho2 > 0) || !(t.rho3 > 0) || !std::isfinite(t.rho1)
        || !std::isfinite(t.rho2) || !std::isfinite(t.rho3))
        throw ConfigError("non-positive or undefined threshold for alpha=" + std::to_string(cf.alpha())
                          + ", n=" + std::to_string(cf.n()));
    t.rho_admissible = std::min({t.rho1, t.rho2, t.rho3});

    t.checks.push_back(sample_sign("fourth_order_bracket < 0", calc.fourth_order, t.rho1, false));
    t.checks.push_back(sample_sign("lap_alpha_tilde > 0", laplacian(pc.alpha_tilde), t.rho1, true));
    t.checks.push_back(sample_sign("alpha_tilde > 0", pc.alpha_tilde, t.rho2, true));
    t.checks.push_back(sample_sign("discriminant < 0", pc.discriminant, t.rho3, false));
    for (const auto& c : t.checks)
        if (!c.holds)
            throw ConfigError("sampled sign condition '" + c.condition + "' fails below "
                              + std::to_string(c.upper));

    const auto printed_check = sample_sign("discriminant > 0 (printed rho3)", pc.discriminant,
                                           t.rho3_printed, true);
    if (!printed_check.holds)
        t.warnings.push_back("conformal_geometry.thresholds: printed rho3 = " + std::to_string(t.rho3_printed)
                             + " does not bound a region where the discriminant is positive; the exact "
                               "discriminant is negative below its first root rho3 = "
                             + std::to_string(t.rho3));
    for (const auto& row : audit_printed_coefficients(cf))
        if (!row.agree)
            t.warnings.push_back("conformal_geometry.audit: printed " + row.quantity + " = "
                                 + std::to_string(row.printed) + " disagrees with derived "
                                 + std::to_string(row.derived));
    return t;
}

const char* to_string(HypothesisVariant v)
{
    switch (v) {
    case HypothesisVariant::main: return "main";
    case HypothesisVariant::corollary: return "corollary";
    case HypothesisVariant::n6: return "n6";
    case HypothesisVariant::expansion: return "expansion";
    }
    return "unknown";
}

HypothesisVariant hypothesis_variant_from_string(const std::string& s)
{
    if (s == "main")
        return HypothesisVariant::main;
    if (s == "corollary")
        return HypothesisVariant::corollary;
    if (s == "n6")
        return HypothesisVariant::n6;
    if (s == "expansion")
        return HypothesisVariant::expansion;
    throw ConfigError("unknown hypothesis variant '" + s + "'");
}

HypothesisDecision check_theorem_hypothesis(const DimensionSpec& dim, double rg, double a, double f,
                                            double lap_f, HypothesisVariant variant)
{
    if (!(f > 0))
        throw ConfigError("f(P) must be positive");
    if (!dim.theorem_grade())
        throw ConfigError("hypothesis checks need n >= 6");
    const double n = dim.n();
    const double q = n * n - 2.0 * n - 4.0;
    const double lap_term = (4.0 - n) / (2.0 * n * (n - 2.0) * q) * lap_f / f;
    HypothesisDecision d{variant, false, 0.0, ""};
    switch (variant) {
    case HypothesisVariant::main:
        if (dim.n() == 6) {
            d.margin = rg;
            d.condition = "R_g(P) > 0";
        } else {
            d.margin = rg + lap_term;
            d.condition = "R_g(P) + (4-n)/(2n(n-2)(n^2-2n-4)) lap_f/f > 0";
        }
        break;
    case HypothesisVariant::corollary:
        if (dim.n() == 6) {
            d.margin = rg + 3.0 * a;
            d.condition = "R_g(P) > -3 a(P)";
        } else {
            d.margin = rg + q / (2.0 * n * (n - 1.0)) * a + lap_term;
            d.condition = "R_g(P) + (n^2-2n-4)/(2n(n-1)) a(P) + (4-n)/(2n(n-2)(n^2-2n-4)) lap_f/f > 0";
        }
        break;
    case HypothesisVariant::n6:
        if (dim.n() != 6)
            throw ConfigError("variant n6 requires n = 6");
        d.margin = rg + 3.0 * a;
        d.condition = "R_g(P) > -3 a(P)";
        break;
    case HypothesisVariant::expansion:
        if (dim.n() <= 6)
            throw ConfigError("variant expansion requires n > 6");
        d.margin = 4.0 * q / ((n - 6.0) * (n - 2.0) * (n + 2.0)) * rg - lap_f / f;
        d.condition = "4(n^2-2n-4)/((n-6)(n-2)(n+2)) S_g - lap_f/f > 0";
        break;
    }
    d.holds = d.margin > 0;
    return d;
}

std::vector<double> sample_on_grid(const PowerSum& expr, const RadialGrid& grid, double floor)
{
    std::vector<double> out(grid.intervals() + 1);
    for (int i = 0; i <= grid.intervals(); ++i)
        out[i] = expr(std::max(grid.node(i), floor));
    return out;
}

ComparisonResult positive_comparison(std::span<const double> alpha_tilde, const RadialField& u,
                                     const std::function<double(double)>& f, double tol)
{
    const RadialGrid& grid = u.grid();
    const int m = grid.intervals();
    if (alpha_tilde.size() < static_cast<std::size_t>(m))
        throw ConfigError("alpha_tilde must be sampled at every unknown node");
    for (int i = 0; i < m; ++i)
        if (!(alpha_tilde[i] > 0))
            throw NumericalError("alpha_tilde is not positive at node " + std::to_string(i)
                                 + "; the comparison operator loses its maximum principle");

    const auto vol = grid.volumes();
    SymBand op = dirichlet_form(grid);
    for (int i = 0; i < m; ++i)
        op.add(i, i, vol[i] * 0.5 * alpha_tilde[i]);

    const auto lap_u = apply_laplacian(grid, u.unknowns());
    std::vector<double> rhs(m);
    for (int i = 0; i < m; ++i)
        rhs[i] = vol[i] * std::abs(lap_u[i] + 0.5 * alpha_tilde[i] * u.values()[i]);

    BandCholesky solver(op);
    auto v = solver.solve(rhs);
    v.push_back(0.0);
    RadialField vf(u.grid_ptr(), v);

    const double scale = u.max_abs();
    double min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= m; ++i)
        min_margin = std::min(min_margin, v[i] - std::abs(u.values()[i]));
    if (min_margin < -tol * scale)
        throw NumericalError("comparison solution fails to dominate |u| (margin "
                             + std::to_string(min_margin) + ")");

    const double mass = weighted_power_integral(grid, vf.unknowns(), f, grid.dim().N());
    if (!(mass > 0))
        throw NumericalError("comparison solution has zero weighted norm");
    const double k = std::pow(mass, -1.0 / grid.dim().N());
    std::vector<double> vh(v);
    for (double& x : vh)
        x *= k;
    return {std::move(vf), RadialField(u.grid_ptr(), std::move(vh)), k, min_margin};
}

} // namespace qcurv
