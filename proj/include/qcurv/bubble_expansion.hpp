#pragma once

#include "qcurv/special_constants.hpp"
#include "qcurv/weights.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qcurv {

/// Value and first two radial derivatives, propagated exactly through arithmetic.
struct Jet2 {
    double v = 0;
    double d1 = 0;
    double d2 = 0;
};

/// Smooth cutoff equal to 1 on [0, start] and 0 on [end, ∞), with an
/// exponential-type smoothstep in between. The default end is 2·start.
struct Cutoff {
    double start;
    double end;

    static Cutoff doubling(double start) { return {start, 2.0 * start}; }
    Jet2 evaluate(double r) const;
};

/// φ(r) = η(r)·(r² + ε²)^{-decay}, decay = (n-4)/2 for the extremal bubble.
class BubbleProfile {
public:
    BubbleProfile(DimensionSpec dim, double epsilon, std::optional<Cutoff> cutoff);
    BubbleProfile(DimensionSpec dim, double epsilon, std::optional<Cutoff> cutoff, double decay);

    const DimensionSpec& dim() const { return dim_; }
    double epsilon() const { return epsilon_; }
    double decay() const { return decay_; }
    const std::optional<Cutoff>& cutoff() const { return cutoff_; }
    /// Outer radius of the support (cutoff end), or +∞ for the uncut profile.
    double support() const;

    Jet2 evaluate(double r) const;
    double value(double r) const { return evaluate(r).v; }
    /// Geometer's Laplacian -(φ'' + (n-1)/r φ').
    double laplacian(double r) const;

private:
    DimensionSpec dim_;
    double epsilon_;
    std::optional<Cutoff> cutoff_;
    double decay_;
};

/// Radial model of f near its maximum point: f(r) = f(P) - Δf(P)/(2n) r².
struct FModel {
    double f_p = 1.0;
    double lap_f = 0.0;

    double operator()(int n, double r) const { return f_p - lap_f / (2.0 * n) * r * r; }
};

/// Quadrature controls for bubble integrals.
struct BubbleQuadrature {
    /// Gauss panels per decade of r (16 nodes each).
    int panels_per_decade = 8;
    /// Panels across the cutoff transition band.
    int cutoff_panels = 24;
    /// Relative change allowed when the partition is doubled.
    double refinement_tolerance = 1e-3;
    /// Scalar curvature at P; the measure becomes ω r^{n-1}(1 - S r²/(6n)) dr.
    double curvature = 0.0;
};

struct BubbleEnergy {
    double bilap;
    double grad_weighted;
    double pot_weighted;
    double f_mass;
    /// (f_mass)^{2/N}.
    double norm_sq;
    /// (bilap + grad_weighted + pot_weighted) / norm_sq.
    double quotient;
};

/// Integrates ∫(Δφ)², ∫ w_a|∇φ|², ∫ w_b φ², ∫ f φ^N over the support of φ.
/// Throws ResolutionError when doubling the partition moves any integral by more
/// than the refinement tolerance.
BubbleEnergy bubble_energy(const BubbleProfile& profile, const SingularWeightConfig* weights,
                           const std::function<double(double)>& f, const BubbleQuadrature& quad = {});

/// Hölder-split quantities for coefficients a ∈ L^p (gradient) and b ∈ L^p (potential):
/// B = ∫ w_a |∇φ|², Bprime_pow = (∫ |∇φ|^{2p/(p-1)})^{1-1/p}, C = (∫ |φ|^{2p/(p-1)})^{1-1/p}.
struct GiraudMass {
    double B;
    double Bprime;
    double Bprime_pow;
    double C_integral;
    double C;
};

GiraudMass giraud_mass(const BubbleProfile& profile, const SingularWeightConfig& weights, double p,
                       const BubbleQuadrature& quad = {});

/// ε-exponents of the Hölder-split terms.
struct MassExponents {
    double bilap;
    /// -(n-4) + 2 + (n-4)/p as printed.
    double bprime_printed;
    /// n(p-1)/p - 2(n-3), from the substitution r = ε√t.
    double bprime_derived;
    /// -2(n-4) + n(p-1)/p.
    double c;
};

MassExponents mass_exponents(int n, double p);

struct SlopeCheck {
    std::string term;
    double measured;
    double predicted;
    double derived;
    bool within_tolerance;
};

/// Log-log regression of bilap, Bprime_pow and C over an ε sequence, compared
/// with the predicted exponents at absolute tolerance `tolerance`.
std::vector<SlopeCheck> mass_scaling(const DimensionSpec& dim, double p, const std::vector<double>& epsilons,
                                     std::optional<Cutoff> cutoff, double tolerance = 0.05,
                                     const BubbleQuadrature& quad = {});

enum class ExpansionTerm { B_gradient, Bprime, C_potential, f_mass, bilaplacian_energy, quotient };

const char* to_string(ExpansionTerm t);

struct ExpansionReport {
    ExpansionTerm term;
    /// Power of ε multiplying the leading coefficient.
    double scale_exponent;
    double leading_predicted;
    double leading_measured;
    double correction_predicted;
    double correction_measured;
    /// "2", "log" or "n-4" etc.
    std::string correction_order;
    std::vector<double> epsilons;
    std::vector<double> values;
};

struct ExpansionOptions {
    double delta = 1.0;
    /// Cutoff start as a fraction of delta; the cutoff ends at delta.
    double cutoff_fraction = 0.5;
    double p = 3.0;
    BubbleQuadrature quadrature{};
    /// Fit residual (max relative) above which the ε range is declared insufficient.
    double fit_tolerance = 1e-3;
};

struct ExpansionReportSet {
    std::vector<ExpansionReport> reports;
    /// Quotient fit c₀ + c₁ g(ε), g = ε² (n > 6) or ε² log(1/ε²) (n = 6).
    double c0;
    double c1;
    /// Extra plain ε² coefficient fitted alongside the log term when n = 6 (the
    /// cutoff contributes at order ε^{n-4} = ε² there); 0 otherwise.
    double c2;
    double fit_residual;
    double c0_predicted;
    /// Correction coefficient from the consolidated bracket and from recombining
    /// the component expansions; they differ when S_g ≠ 0.
    double c1_predicted;
    double c1_recombined;
    int c1_predicted_sign;
    /// Curvature fractions of the bilaplacian-energy correction (componentwise sum vs consolidated).
    double bilap_curvature_componentwise;
    double bilap_curvature_consolidated;
    std::vector<std::string> warnings;
};

/// Default ε sequence {0.04, 0.028, 0.02, 0.014, 0.01}·δ.
std::vector<double> default_epsilons(double delta = 1.0);

/// Measures every expansion term on the flat background (curvature entering only
/// through the measure multiplier) and compares leading and correction coefficients.
ExpansionReportSet verify_expansion(const DimensionSpec& dim, const FModel& f_model, double curvature,
                                    const std::vector<double>& epsilons, const ExpansionOptions& opts = {});

/// Least squares fit y ≈ c0 + c1 g; returns {c0, c1, max relative residual}.
struct LinearFit {
    double c0;
    double c1;
    double residual;
};
LinearFit fit_linear(const std::vector<double>& g, const std::vector<double>& y);

/// Least squares y ≈ Σ_k c_k basis_k (column basis); returns coefficients and the
/// max relative residual in `residual`.
struct BasisFit {
    std::vector<double> coefficients;
    double residual;
};
BasisFit fit_basis(const std::vector<std::vector<double>>& basis, const std::vector<double>& y);

} // namespace qcurv
