#pragma once

#include <functional>

namespace qcurv {

/// Singular coefficients a(ρ)/ρ^γ (gradient term) and Q_g(ρ)/ρ^α (potential term)
/// with the singular factor evaluated at max(ρ, rho_min).
struct SingularWeightConfig {
    double gamma = 0;
    double alpha = 0;
    std::function<double(double)> a_profile = [](double) { return 0.0; };
    std::function<double(double)> b_profile = [](double) { return 0.0; };
    double rho_min = 1e-3;

    double gradient_weight(double rho) const;
    double potential_weight(double rho) const;
    bool sharp() const { return gamma == 2.0 || alpha == 4.0; }

    /// Throws ConfigError when exponents leave [0,2]×[0,4] or rho_min <= 0.
    void validate() const;

    static SingularWeightConfig flat();
    static SingularWeightConfig constant(double gamma, double alpha, double a, double b, double rho_min);
};

} // namespace qcurv
