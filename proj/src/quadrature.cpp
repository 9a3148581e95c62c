#include "qcurv/quadrature.hpp"

#include "qcurv/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace qcurv {

namespace {

struct GaussTable {
    std::array<double, PanelQuadrature::points_per_panel> x{};
    std::array<double, PanelQuadrature::points_per_panel> w{};
};

// Boost stores the non-negative half of the symmetric rule.
const GaussTable& gauss_table()
{
    static const GaussTable table = [] {
        using rule = boost::math::quadrature::gauss<double, PanelQuadrature::points_per_panel>;
        const auto& abscissa = rule::abscissa();
        const auto& weights = rule::weights();
        GaussTable t;
        std::size_t k = 0;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            if (abscissa[i] == 0.0) {
                t.x[k] = 0.0;
                t.w[k++] = weights[i];
                continue;
            }
            t.x[k] = abscissa[i];
            t.w[k++] = weights[i];
            t.x[k] = -abscissa[i];
            t.w[k++] = weights[i];
        }
        return t;
    }();
    return table;
}

} // namespace

const UnitGaussRule& unit_gauss_rule()
{
    static const UnitGaussRule rule = [] {
        const auto& g = gauss_table();
        std::array<std::pair<double, double>, PanelQuadrature::points_per_panel> pts;
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i] = {0.5 * (g.x[i] + 1.0), 0.5 * g.w[i]};
        std::sort(pts.begin(), pts.end());
        UnitGaussRule r;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            r.x[i] = pts[i].first;
            r.w[i] = pts[i].second;
        }
        return r;
    }();
    return rule;
}

PanelQuadrature::PanelQuadrature(std::vector<double> breakpoints)
    : breaks_(std::move(breakpoints))
{
    if (breaks_.size() < 2)
        throw ConfigError("quadrature partition needs at least two breakpoints");
    if (!std::is_sorted(breaks_.begin(), breaks_.end()))
        throw ConfigError("quadrature partition must be increasing");
}

double PanelQuadrature::integrate(const std::function<double(double)>& f) const
{
    const auto& g = gauss_table();
    double total = 0;
    for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
        const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
        const double mid = 0.5 * (breaks_[p + 1] + breaks_[p]);
        double panel = 0;
        for (int i = 0; i < points_per_panel; ++i)
            panel += g.w[i] * f(mid + half * g.x[i]);
        total += half * panel;
    }
    return total;
}

std::vector<double> PanelQuadrature::integrate_many(
    const std::function<void(double, std::span<double>)>& f, std::size_t count) const
{
    const auto& g = gauss_table();
    std::vector<double> total(count, 0.0), panel(count), values(count);
    for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
        const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
        const double mid = 0.5 * (breaks_[p + 1] + breaks_[p]);
        std::fill(panel.begin(), panel.end(), 0.0);
        for (int i = 0; i < points_per_panel; ++i) {
            f(mid + half * g.x[i], values);
            for (std::size_t k = 0; k < count; ++k)
                panel[k] += g.w[i] * values[k];
        }
        for (std::size_t k = 0; k < count; ++k)
            total[k] += half * panel[k];
    }
    return total;
}

std::vector<double> geometric_breaks(double lo, double hi, int panels_per_decade)
{
    if (!(lo > 0) || !(hi > lo) || panels_per_decade < 1)
        throw ConfigError("geometric partition needs 0 < lo < hi and a positive panel density");
    const double decades = std::log10(hi / lo);
    const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade)));
    std::vector<double> b(panels + 1);
    for (int i = 0; i <= panels; ++i)
        b[i] = lo * std::pow(hi / lo, static_cast<double>(i) / panels);
    b.front() = lo;
    b.back() = hi;
    return b;
}

std::vector<double> uniform_breaks(double lo, double hi, int panels)
{
    std::vector<double> b(panels + 1);
    for (int i = 0; i <= panels; ++i)
        b[i] = lo + (hi - lo) * static_cast<double>(i) / panels;
    return b;
}

std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    std::vector<double> out;
    for (double x : a) {
        if (out.empty() || std::abs(x - out.back()) > 1e-12 * std::max(std::abs(x), 1e-300))
            out.push_back(x);
    }
    return out;
}

} // namespace qcurv
