#include "qcurv/power_sum.hpp"

#include "qcurv/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace qcurv {

namespace {

constexpr double merge_tolerance = 1e-12;

std::vector<PowerTerm> canonical(std::vector<PowerTerm> terms)
{
    std::sort(terms.begin(), terms.end(),
              [](const PowerTerm& a, const PowerTerm& b) { return a.exponent < b.exponent; });
    std::vector<PowerTerm> out;
    for (const auto& t : terms) {
        if (!out.empty() && std::abs(t.exponent - out.back().exponent) < merge_tolerance)
            out.back().coefficient += t.coefficient;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const PowerTerm& t) { return t.coefficient == 0.0; });
    return out;
}

void require_same_dim(const PowerSum& a, const PowerSum& b)
{
    if (a.dim() != b.dim())
        throw ConfigError("power sums in different dimensions cannot be combined");
}

} // namespace

PowerSum::PowerSum(int dim, std::vector<PowerTerm> terms)
    : dim_(dim)
    , terms_(canonical(std::move(terms)))
{
}

PowerSum PowerSum::monomial(int dim, double coefficient, double exponent)
{
    return PowerSum(dim, {{coefficient, exponent}});
}

double PowerSum::coefficient_of(double exponent) const
{
    for (const auto& t : terms_)
        if (std::abs(t.exponent - exponent) < merge_tolerance)
            return t.coefficient;
    return 0.0;
}

double PowerSum::operator()(double rho) const
{
    double s = 0;
    for (const auto& t : terms_)
        s += t.coefficient * std::pow(rho, t.exponent);
    return s;
}

double PowerSum::derivative(double rho) const
{
    double s = 0;
    for (const auto& t : terms_)
        s += t.coefficient * t.exponent * std::pow(rho, t.exponent - 1.0);
    return s;
}

PowerSum PowerSum::operator-() const
{
    return -1.0 * *this;
}

PowerSum operator+(const PowerSum& a, const PowerSum& b)
{
    require_same_dim(a, b);
    std::vector<PowerTerm> t(a.terms_.begin(), a.terms_.end());
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return PowerSum(a.dim_, std::move(t));
}

PowerSum operator-(const PowerSum& a, const PowerSum& b)
{
    return a + (-1.0 * b);
}

PowerSum operator*(double s, const PowerSum& a)
{
    std::vector<PowerTerm> t(a.terms_.begin(), a.terms_.end());
    for (auto& term : t)
        term.coefficient *= s;
    return PowerSum(a.dim_, std::move(t));
}

PowerSum operator*(const PowerSum& a, const PowerSum& b)
{
    require_same_dim(a, b);
    std::vector<PowerTerm> t;
    t.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& x : a.terms_)
        for (const auto& y : b.terms_)
            t.push_back({x.coefficient * y.coefficient, x.exponent + y.exponent});
    return PowerSum(a.dim_, std::move(t));
}

std::string PowerSum::to_string() const
{
    if (terms_.empty())
        return "0";
    std::string s;
    char buf[96];
    for (const auto& t : terms_) {
        std::snprintf(buf, sizeof buf, "%s%.12g*rho^%.12g", s.empty() ? "" : " + ", t.coefficient,
                      t.exponent);
        s += buf;
    }
    return s;
}

PowerSum laplacian(const PowerSum& expr)
{
    const double n = expr.dim();
    std::vector<PowerTerm> out;
    for (const auto& t : expr.terms()) {
        const double factor = -t.exponent * (t.exponent + n - 2.0);
        out.push_back({t.coefficient * factor, t.exponent - 2.0});
    }
    return PowerSum(expr.dim(), std::move(out));
}

PowerSum bilaplacian(const PowerSum& expr)
{
    return laplacian(laplacian(expr));
}

PowerSum grad_sq(const PowerSum& expr)
{
    if (expr.terms().size() > 1)
        throw DomainError("grad_sq is only closed on single radial monomials");
    if (expr.is_zero())
        return expr;
    const auto t = expr.terms().front();
    if (t.exponent == 0.0)
        return PowerSum(expr.dim());
    return PowerSum::monomial(expr.dim(), t.coefficient * t.coefficient * t.exponent * t.exponent,
                              2.0 * t.exponent - 2.0);
}

// --- finite differences ------------------------------------------------

namespace {

constexpr std::array<double, 4> first_coeffs{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
constexpr std::array<double, 4> second_coeffs{8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
constexpr double second_center = -205.0 / 72.0;

void require_interior(double rho, double width)
{
    if (!(width > 0))
        throw DomainError("stencil width must be positive");
    if (!(rho > 2.0 * width))
        throw DomainError("sample at rho=" + std::to_string(rho)
                          + " is too close to the origin for the stencil width "
                          + std::to_string(width));
}

} // namespace

double fd_first(const RadialFunction& f, double rho, double width)
{
    const double h = width / 4.0;
    double s = 0;
    for (int k = 1; k <= 4; ++k)
        s += first_coeffs[k - 1] * (f(rho + k * h) - f(rho - k * h));
    return s / h;
}

double fd_second(const RadialFunction& f, double rho, double width)
{
    const double h = width / 4.0;
    double s = second_center * f(rho);
    for (int k = 1; k <= 4; ++k)
        s += second_coeffs[k - 1] * (f(rho + k * h) + f(rho - k * h));
    return s / (h * h);
}

double fd_laplacian(const RadialFunction& f, int dim, double rho, double width)
{
    return -(fd_second(f, rho, width) + (dim - 1.0) / rho * fd_first(f, rho, width));
}

double fd_bilaplacian(const RadialFunction& f, int dim, double rho, double width)
{
    const double inner = width / 4.0;
    auto lap = [&](double r) { return fd_laplacian(f, dim, r, inner); };
    return fd_laplacian(lap, dim, rho, width);
}

const char* to_string(RadialOperator op)
{
    switch (op) {
    case RadialOperator::laplacian: return "laplacian";
    case RadialOperator::bilaplacian: return "bilaplacian";
    case RadialOperator::grad_sq: return "grad_sq";
    }
    return "unknown";
}

OracleReport compare_to_oracle(const PowerSum& symbolic, const RadialFunction& oracle,
                               const RadialFunction& scale, std::span<const RadialSample> samples,
                               double tolerance)
{
    OracleReport report;
    report.tolerance = tolerance;
    for (const auto& s : samples) {
        require_interior(s.rho, s.stencil_width);
        const double sym = symbolic(s.rho);
        const double fd = oracle(s.rho);
        const double denom = std::max({std::abs(sym), std::abs(fd), std::abs(scale(s.rho)), 1e-300});
        const double dev = std::abs(sym - fd) / denom;
        report.rows.push_back({s.rho, sym, fd, dev});
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    report.pass = report.max_deviation < tolerance;
    return report;
}

OracleReport oracle_check(const PowerSum& expr, const PowerSum& op_result, RadialOperator op,
                          std::span<const RadialSample> samples, double tolerance)
{
    const RadialFunction f = [&expr](double r) { return expr(r); };
    const int n = expr.dim();
    OracleReport report;
    report.tolerance = tolerance;
    for (const auto& s : samples) {
        require_interior(s.rho, s.stencil_width);
        double fd = 0;
        double order = 2;
        switch (op) {
        case RadialOperator::laplacian:
            fd = fd_laplacian(f, n, s.rho, s.stencil_width);
            break;
        case RadialOperator::bilaplacian:
            fd = fd_bilaplacian(f, n, s.rho, s.stencil_width);
            order = 4;
            break;
        case RadialOperator::grad_sq: {
            const double d = fd_first(f, s.rho, s.stencil_width);
            fd = d * d;
            break;
        }
        }
        const double natural = op == RadialOperator::grad_sq
            ? std::pow(std::abs(expr(s.rho)) / s.rho, 2.0)
            : std::abs(expr(s.rho)) * std::pow(s.rho, -order);
        const double sym = op_result(s.rho);
        const double denom = std::max({std::abs(sym), std::abs(fd), natural, 1e-300});
        const double dev = std::abs(sym - fd) / denom;
        report.rows.push_back({s.rho, sym, fd, dev});
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    report.pass = report.max_deviation < tolerance;
    return report;
}

std::vector<RadialSample> log_samples(double lo, double hi, int count, double relative_width)
{
    std::vector<RadialSample> s;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const double rho = lo * std::pow(hi / lo, t);
        s.push_back({rho, relative_width * rho});
    }
    return s;
}

} // namespace qcurv
