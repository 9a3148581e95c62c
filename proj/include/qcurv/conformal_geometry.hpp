#pragma once

#include "qcurv/power_sum.hpp"
#include "qcurv/radial_field.hpp"
#include "qcurv/special_constants.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qcurv {

/// A = exp(-ρ^{2-α}) on a flat background, 1 < α < 2, n >= 6.
class ConformalFactor {
public:
    ConformalFactor(double alpha, int n);

    double alpha() const { return alpha_; }
    int n() const { return n_; }
    PowerSum log_a() const;

private:
    double alpha_;
    int n_;
};

/// Radial derivatives of log A and the two brackets every curvature quantity is built from:
///   second_order = -Δ log A + (n/2)|∇ log A|²
///   fourth_order = -Δ² log A + (n/2) Δ|∇ log A|²
struct LogFactorCalculus {
    PowerSum log_a;
    PowerSum lap_log_a;
    PowerSum bilap_log_a;
    PowerSum grad_sq_log_a;
    PowerSum lap_grad_sq_log_a;
    PowerSum second_order;
    PowerSum fourth_order;
};

LogFactorCalculus log_factor_calculus(const ConformalFactor& cf);

/// R_g = -(n/2)·second_order.
PowerSum scalar_curvature(const ConformalFactor& cf);

/// Dimension constants of the Paneitz coefficients:
///   alpha_scale c_n = ((n+2)(n-2)²+4)/(4(n-1)(n-2))   (α̃ = -c_n X)
///   beta_square d_n = n(n⁴-4n³-16n²+48n-32)(n-4)/(64(n-1)²(n-2)²)
///   a_n = 4(n⁵-n⁴-18n³+48n²-56n+36)/(16(n-1)²(n-2)²),  b_n = n(n-4)/(8(n-1))
struct PaneitzConstants {
    double alpha_scale;
    double beta_square;
    double a_n;
    double b_n;
};

PaneitzConstants paneitz_constants(int n);

struct PaneitzCoefficients {
    PowerSum alpha_tilde;
    PowerSum beta_tilde;
    /// α̃² - 4β̃ computed by exact power-sum arithmetic.
    PowerSum discriminant;
    /// a_n X² + 4 b_n Y: the factored structure the exact discriminant reduces to.
    PowerSum discriminant_structured;
    /// a_n X² + b_n Y, as printed before the factorisation.
    PowerSum discriminant_printed;
    PaneitzConstants constants;
};

PaneitzCoefficients paneitz_coefficients(const ConformalFactor& cf);

/// One line of the printed-vs-derived coefficient comparison.
struct CoefficientAudit {
    std::string quantity;
    double exponent;
    double printed;
    double derived;
    bool agree;
};

/// Compares every printed coefficient of the flat-background calculus with the
/// value derived by exact radial calculus. Disagreements are returned, not thrown.
std::vector<CoefficientAudit> audit_printed_coefficients(const ConformalFactor& cf);

/// Finite-difference oracle reports for every symbolic quantity, keyed by name.
struct DerivativeAudit {
    std::string quantity;
    PowerSum symbolic;
    OracleReport report;
};

std::vector<DerivativeAudit> audit_derivatives(const ConformalFactor& cf,
                                               std::span<const RadialSample> samples,
                                               double tolerance = 1e-6);

struct SignCheck {
    std::string condition;
    double upper;
    bool holds;
    /// Most adverse sampled value (largest for "< 0" conditions, smallest for "> 0").
    double worst;
};

/// ρ₁: below it Y < 0 (hence Δα̃ > 0); ρ₂: below it α̃ > 0;
/// ρ₃: first positive root of the exact discriminant, which is negative below it.
struct Thresholds {
    double rho1;
    double rho2;
    double rho3;
    double rho3_printed;
    double rho_admissible;
    std::vector<SignCheck> checks;
    std::vector<std::string> warnings;
};

/// Throws ConfigError if a threshold is non-positive or a sampled sign condition fails.
Thresholds thresholds(const ConformalFactor& cf);

/// Closed forms as printed.
double threshold_rho1(double alpha, int n);
double threshold_rho2(double alpha, int n);
double threshold_rho3_printed(double alpha, int n);

enum class HypothesisVariant { main, corollary, n6, expansion };

const char* to_string(HypothesisVariant v);
HypothesisVariant hypothesis_variant_from_string(const std::string& s);

struct HypothesisDecision {
    HypothesisVariant variant;
    bool holds;
    /// Left-hand side of the strict inequality `margin > 0`.
    double margin;
    std::string condition;
};

/// Evaluates the curvature condition at the concentration point P.
/// `rg` is R_g(P) (S_g(P) for the expansion variant). Requires f > 0, n >= 6;
/// the n6 variant requires n == 6 and the expansion variant n > 6.
HypothesisDecision check_theorem_hypothesis(const DimensionSpec& dim, double rg, double a, double f,
                                            double lap_f, HypothesisVariant variant);

struct ComparisonResult {
    RadialField v;
    RadialField v_hat;
    double k;
    /// min_i (v_i - |u_i|).
    double min_margin;
};

/// α̃ sampled at the grid nodes, singular point evaluated at max(ρ, floor).
std::vector<double> sample_on_grid(const PowerSum& expr, const RadialGrid& grid, double floor);

/// Solves Δv + (α̃/2)v = |Δu + (α̃/2)u| with v(ρ_max) = 0, v'(0) = 0, checks
/// v >= |u| - tol·‖u‖_∞ at every node and rescales v̂ = kv so that ∫ f v̂^N dμ = 1.
ComparisonResult positive_comparison(std::span<const double> alpha_tilde, const RadialField& u,
                                     const std::function<double(double)>& f, double tol = 1e-8);

} // namespace qcurv
