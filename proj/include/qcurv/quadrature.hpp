#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace qcurv {

/// Composite Gauss–Legendre rule on an explicit partition. Each panel gets the
/// same 16-point rule, so the node density follows the breakpoints.
class PanelQuadrature {
public:
    static constexpr int points_per_panel = 16;

    explicit PanelQuadrature(std::vector<double> breakpoints);

    double integrate(const std::function<double(double)>& f) const;

    /// Evaluate several integrands on the same nodes in one sweep.
    std::vector<double> integrate_many(const std::function<void(double, std::span<double>)>& f,
                                       std::size_t count) const;

    std::span<const double> breakpoints() const { return breaks_; }
    std::size_t node_count() const { return (breaks_.size() - 1) * points_per_panel; }

private:
    std::vector<double> breaks_;
};

/// The 16-point Gauss–Legendre rule mapped to [0, 1] (nodes ascending).
struct UnitGaussRule {
    std::array<double, PanelQuadrature::points_per_panel> x;
    std::array<double, PanelQuadrature::points_per_panel> w;
};
const UnitGaussRule& unit_gauss_rule();

/// Geometric partition of [lo, hi] with `panels_per_decade` panels per factor of 10.
std::vector<double> geometric_breaks(double lo, double hi, int panels_per_decade);

/// Uniform partition of [lo, hi] into `panels` pieces.
std::vector<double> uniform_breaks(double lo, double hi, int panels);

/// Merge partitions, sort, and drop points closer than a relative 1e-12.
std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b);

} // namespace qcurv
